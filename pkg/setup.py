from setuptools import find_packages, setup

with open("README.md", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="replicoal",
    version="0.1.0",
    description="Simulation and analysis toolkit for the multi-type replicator coalescent",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["replicoal", "replicoal.*"]),
    include_package_data=True,
    python_requires=">=3.12",
    install_requires=["numpy", "scipy", "pandas", "matplotlib", "typed-argument-parser"],
    entry_points={"console_scripts": ["replicoal=replicoal.cli.app:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
    ],
)
