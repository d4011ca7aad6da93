from replicoal.dual.h import (
    HConsistencyReport,
    HFunction,
    QIdentityReport,
    check_h_consistency,
    dual_rates,
    h_from_law,
    verify_q_identity,
)
from replicoal.dual.law import (
    DEFAULT_LEVEL_BUDGET,
    LevelDistribution,
    empirical_hitting_law,
    exact_hitting_law,
    exact_hitting_laws,
    total_variation,
)

__all__ = [
    "check_h_consistency",
    "DEFAULT_LEVEL_BUDGET",
    "dual_rates",
    "empirical_hitting_law",
    "exact_hitting_law",
    "exact_hitting_laws",
    "h_from_law",
    "HConsistencyReport",
    "HFunction",
    "LevelDistribution",
    "QIdentityReport",
    "total_variation",
    "verify_q_identity",
]

for name in ("HConsistencyReport", "HFunction", "LevelDistribution", "QIdentityReport"):
    globals()[name].__module__ = __name__
