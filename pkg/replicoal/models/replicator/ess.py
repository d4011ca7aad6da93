from dataclasses import dataclass

import numpy as np
import scipy.linalg

from replicoal.models.core import PayoffMatrix, SimplexPoint, check_simplex
from replicoal.utils import BoundaryError, SeedLike, SingularMatrixError, as_generator, json_encodable, log

ESS_RESIDUAL_TOL = 1e-10
"""Acceptable ``max |A x* - c 1|``."""

MAX_CONDITION = 1e12
"""Payoff matrices with a larger condition number are treated as singular."""


@json_encodable
@dataclass(frozen=True)
class EssResult:
    """
    Interior fixed point of the replicator equation.
    """

    x_star: SimplexPoint
    c: float
    """Common payoff, ``A x* = c 1``."""
    residual: float
    """``max |A x* - c 1|``."""


def ess_fixed_point(A: PayoffMatrix) -> EssResult:
    """
    Solve ``x* = A^-1 1 / (1^T A^-1 1)``.

    Raises:
        SingularMatrixError: A is singular or ill-conditioned, or ``1^T A^-1 1`` vanishes.
        BoundaryError: a coordinate of x* is not positive and A was derived from rates.
    """
    a = A.entries
    ones = np.ones(A.k)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError(f"payoff matrix is singular (condition number {cond:.3g})")
    try:
        y = scipy.linalg.solve(a, ones)
    except scipy.linalg.LinAlgError as e:
        raise SingularMatrixError(f"payoff matrix is singular: {e}") from e

    total = float(np.sum(y))
    if abs(total) < np.finfo(np.float64).eps * np.sum(np.abs(y)):
        raise SingularMatrixError("1^T A^-1 1 vanishes, no fixed point on the simplex")
    x_star = y / total
    c = 1.0 / total
    residual = float(np.max(np.abs(a @ x_star - c)))

    if np.any(x_star <= 0):
        if A.derived:
            raise BoundaryError(f"fixed point {x_star} is not interior")
        log.warning(f"fixed point {x_star} of direct payoff matrix is not interior")
    return EssResult(x_star=x_star, c=c, residual=residual)


def ess_quadratic_form(A: PayoffMatrix, x_star: SimplexPoint, u: np.ndarray, eps: float) -> float:
    """
    Evaluate ``x*^T A x - x^T A x`` at ``x = x* + eps u`` in expanded form,
    ``-eps u^T A x* - eps^2 u^T A u``.
    """
    a = A.entries
    return float(-eps * (u @ a @ x_star) - eps**2 * (u @ a @ u))


@json_encodable
@dataclass(frozen=True)
class EssReport:
    """
    Outcome of :func:`verify_ess`.
    """

    passed: bool
    """Whether every sampled value was strictly positive."""
    min_value: float
    """Smallest ``x*^T A x - x^T A x`` over the samples."""
    n_samples: int
    radius: float
    """Sampling radius actually used."""
    shrunk: bool
    """Whether the requested radius had to be reduced to stay within the simplex."""
    worst_direction: np.ndarray
    """Unit direction u attaining ``min_value``."""
    worst_eps: float


def verify_ess(A: PayoffMatrix, x_star: SimplexPoint, radius: float, samples: int, seed: SeedLike = None) -> EssReport:
    """
    Check the evolutionary stability inequality ``x*^T A x > x^T A x`` at random points near ``x_star``.

    Each sample is ``x = x* + eps u`` with u a uniformly random unit direction in the tangent space
    of the simplex and ``eps`` uniform in ``(0, radius]``.
    When ``x_star`` lies on the boundary, directions point from ``x_star`` towards uniform
    simplex points so that every sample stays feasible.

    Args:
        A: payoff matrix.
        x_star: candidate stable state.
        radius: largest distance from ``x_star``.
        samples: number of sampled points.
        seed: random seed or generator.
    """
    if radius <= 0 or samples < 1:
        raise ValueError("radius must be positive and samples at least 1")
    k = A.k
    x_star = check_simplex(np.asarray(x_star, dtype=np.float64), k, atol=1e-9)
    if k == 1:
        return EssReport(True, np.inf, 0, radius, False, np.zeros(1), 0.0)
    gen = as_generator(seed)
    a = A.entries
    shrunk = False

    if np.all(x_star > 0):
        # a unit tangent direction moves each coordinate by at most eps
        while radius > np.min(x_star):
            radius /= 2
            shrunk = True
        g = gen.standard_normal((samples, k))
        u = g - np.mean(g, axis=1, keepdims=True)
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        eps = radius * (1.0 - gen.random(samples))
    else:
        y = gen.dirichlet(np.ones(k), size=samples)
        d = y - x_star
        dist = np.linalg.norm(d, axis=1)
        u = d / dist[:, None]
        eps = np.minimum(radius, dist) * (1.0 - gen.random(samples))
    if shrunk:
        log.warning(f"verify_ess: radius reduced to {radius:.3g} to stay within the simplex")

    x = x_star + eps[:, None] * u
    # (x* - x)^T A x without cancellation
    values = -eps * np.einsum("si,ij,sj->s", u, a, x)
    worst = int(np.argmin(values))
    return EssReport(
        passed=bool(values[worst] > 0),
        min_value=float(values[worst]),
        n_samples=samples,
        radius=radius,
        shrunk=shrunk,
        worst_direction=u[worst],
        worst_eps=float(eps[worst]),
    )


def ess_tangent_curvature(A: PayoffMatrix) -> float:
    """
    Largest value of ``u^T A u`` over unit vectors u with zero coordinate sum.

    An interior fixed point is evolutionarily stable exactly when this is negative.
    """
    k = A.k
    if k == 1:
        return -np.inf
    # orthonormal basis of the sum-zero subspace
    basis = scipy.linalg.null_space(np.ones((1, k)))
    sym = (A.entries + A.entries.T) / 2
    return float(np.max(np.linalg.eigvalsh(basis.T @ sym @ basis)))
