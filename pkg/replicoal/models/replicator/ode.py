import math
from dataclasses import dataclass

import numpy as np

from replicoal.models.core import SIMPLEX_ATOL, PayoffMatrix, SimplexPoint, check_simplex
from replicoal.utils import SimplexUnderflowError, json_encodable, log

UNDERFLOW_TOL = 1e-12
"""Negative coordinates above ``-UNDERFLOW_TOL`` are rounding noise and get clamped to zero."""


def replicator_rhs(A: PayoffMatrix, x: np.ndarray) -> np.ndarray:
    """
    Vector field of the replicator equation, ``x_i ((A x)_i - x^T A x)``.

    Raises:
        ValueError: dimension mismatch.
    """
    if x.shape != (A.k,):
        raise ValueError(f"point has shape {x.shape}, payoff matrix has k={A.k}")
    ax = A.entries @ x
    mean = float(x @ ax)
    dx = x * (ax - mean)
    scale = max(1.0, abs(mean), float(np.max(np.abs(ax))))
    assert abs(float(np.sum(dx))) <= SIMPLEX_ATOL * scale, "vector field leaves simplex"
    return dx


def _project(x: np.ndarray) -> np.ndarray:
    low = float(np.min(x))
    if low < 0:
        if low < -UNDERFLOW_TOL:
            raise SimplexUnderflowError(f"coordinate fell to {low:.3g}")
        x = np.maximum(x, 0.0)
    return x / np.sum(x)


def _rk4_step(A: PayoffMatrix, x: np.ndarray, h: float) -> np.ndarray:
    k1 = replicator_rhs(A, x)
    k2 = replicator_rhs(A, x + h / 2 * k1)
    k3 = replicator_rhs(A, x + h / 2 * k2)
    k4 = replicator_rhs(A, x + h * k3)
    return _project(x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))


@json_encodable
@dataclass(frozen=True)
class OdePath:
    """
    Solution of the replicator equation on a time grid.
    """

    grid: np.ndarray
    """Increasing times, shape (N,)."""
    points: np.ndarray
    """Simplex point per grid time, shape (N, k)."""

    @property
    def final(self) -> SimplexPoint:
        return self.points[-1]

    def at(self, t: np.ndarray | float) -> np.ndarray:
        """
        Linearly interpolate the path at time(s) ``t`` within the grid.
        """
        t = np.asarray(t, dtype=np.float64)
        return np.stack([np.interp(t, self.grid, self.points[:, i]) for i in range(self.points.shape[1])], axis=-1)


def integrate(A: PayoffMatrix, x0: np.ndarray, T: float, step: float, *, record_every=1) -> OdePath:
    """
    Integrate the replicator equation with fixed-step fourth-order Runge-Kutta.

    After every step the point is renormalized onto the simplex.
    The final step is shortened so that the path ends exactly at ``T``.

    Args:
        A: payoff matrix.
        x0: starting point on the simplex.
        T: horizon, nonnegative.
        step: step size, positive.
        record_every: keep every n-th step in the returned path; the final point is always kept.

    Raises:
        ValueError: ``step`` or ``T`` invalid.
        SimplexUnderflowError: a coordinate became significantly negative.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if T < 0:
        raise ValueError(f"horizon must be nonnegative, got {T}")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    x = check_simplex(np.asarray(x0, dtype=np.float64), A.k, atol=1e-9).copy()
    if not np.all(x > 0):
        log.warning("integrate: starting point is on the simplex boundary")
    x /= np.sum(x)

    n_steps = math.ceil(T / step - 1e-9) if T > 0 else 0
    grid = [0.0]
    points = [x]
    t = 0.0
    for s in range(n_steps):
        h = min(step, T - t)
        x = _rk4_step(A, x, h)
        t = T if s == n_steps - 1 else t + h
        if (s + 1) % record_every == 0 or s == n_steps - 1:
            grid.append(t)
            points.append(x)
    return OdePath(grid=np.array(grid), points=np.array(points))


@json_encodable
@dataclass(frozen=True)
class Convergence:
    """
    Outcome of :func:`converge_to_ess`.
    """

    converged: bool
    horizon: float
    """Time reached when the procedure stopped."""
    distance: float
    """``|x(horizon) - x*|_1``."""
    x_final: SimplexPoint


def converge_to_ess(
    A: PayoffMatrix,
    x0: np.ndarray,
    x_star: np.ndarray,
    *,
    tol=1e-6,
    step=0.01,
    t_start=10.0,
    t_max=1e6,
) -> Convergence:
    """
    Integrate until the path is within ``tol`` of ``x_star`` in L1 norm, doubling the horizon each round.

    Integration continues from the previous horizon rather than restarting.
    """
    x = np.asarray(x0, dtype=np.float64)
    t = 0.0
    horizon = t_start
    while True:
        x = integrate(A, x, horizon - t, step, record_every=1 << 30).final
        t = horizon
        distance = float(np.sum(np.abs(x - x_star)))
        if distance < tol:
            return Convergence(True, t, distance, x)
        if horizon * 2 > t_max:
            log.warning(f"converge_to_ess: distance {distance:.3g} after horizon {t:g}")
            return Convergence(False, t, distance, x)
        horizon *= 2


def mild_residual(A: PayoffMatrix, path: OdePath) -> float:
    """
    Largest L1 deviation from the integral form ``x(t) = x(0) + int_0^t rhs(x(s)) ds`` along ``path``,
    with the integral evaluated by the trapezoid rule on the path grid.
    """
    rhs = np.array([replicator_rhs(A, x) for x in path.points])
    dt = np.diff(path.grid)
    increments = (rhs[1:] + rhs[:-1]) / 2 * dt[:, None]
    integral = np.vstack([np.zeros((1, A.k)), np.cumsum(increments, axis=0)])
    deviation = path.points - path.points[0] - integral
    return float(np.max(np.sum(np.abs(deviation), axis=1)))
