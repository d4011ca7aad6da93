from replicoal.utils.errors import (
    BoundaryError,
    BudgetExceededError,
    ConfigError,
    LeapOvershootError,
    NumericalError,
    SimplexUnderflowError,
    SingularMatrixError,
)
from replicoal.utils.json import json_default, json_encodable
from replicoal.utils.logger import log
from replicoal.utils.random import SeedLike, as_generator, make_rng, rng

__all__ = [
    "as_generator",
    "BoundaryError",
    "BudgetExceededError",
    "ConfigError",
    "json_default",
    "json_encodable",
    "LeapOvershootError",
    "log",
    "make_rng",
    "NumericalError",
    "rng",
    "SeedLike",
    "SimplexUnderflowError",
    "SingularMatrixError",
]

for name in (
    "BoundaryError",
    "BudgetExceededError",
    "ConfigError",
    "LeapOvershootError",
    "NumericalError",
    "SimplexUnderflowError",
    "SingularMatrixError",
    "json_default",
    "json_encodable",
    "make_rng",
    "as_generator",
):
    globals()[name].__module__ = __name__
