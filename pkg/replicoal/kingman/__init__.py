from replicoal.kingman.chain import (
    ComingDownEstimate,
    KingmanChain,
    KingmanPath,
    coming_down_constant,
    coupling_rate_check,
    expected_beta,
    kingman_clock_mass,
    laplace_hitting,
    simulate_kingman,
)

__all__ = [
    "coming_down_constant",
    "ComingDownEstimate",
    "coupling_rate_check",
    "expected_beta",
    "kingman_clock_mass",
    "KingmanChain",
    "KingmanPath",
    "laplace_hitting",
    "simulate_kingman",
]

for name in ("ComingDownEstimate", "KingmanChain", "KingmanPath"):
    globals()[name].__module__ = __name__
