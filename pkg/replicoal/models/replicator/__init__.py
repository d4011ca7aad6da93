from replicoal.models.replicator.ess import (
    EssReport,
    EssResult,
    ess_fixed_point,
    ess_quadratic_form,
    ess_tangent_curvature,
    verify_ess,
)
from replicoal.models.replicator.ode import Convergence, OdePath, converge_to_ess, integrate, mild_residual, replicator_rhs

__all__ = [
    "converge_to_ess",
    "Convergence",
    "ess_fixed_point",
    "ess_quadratic_form",
    "ess_tangent_curvature",
    "EssReport",
    "EssResult",
    "integrate",
    "mild_residual",
    "OdePath",
    "replicator_rhs",
    "verify_ess",
]

for name in ("Convergence", "EssReport", "EssResult", "OdePath"):
    globals()[name].__module__ = __name__
