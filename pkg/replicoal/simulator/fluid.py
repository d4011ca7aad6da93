import math

import numpy as np

from replicoal.models.core import PayoffMatrix, RateMatrix, payoff_from_rates
from replicoal.simulator.trajectory import FluidPath, FluidState, StopCriterion, StopReason
from replicoal.utils import log

FLUID_MIN_SIGMA = 2.0
"""The continuum relaxation is singular at one block; integration never goes below this count."""

FLUID_WARN_SIGMA = 1e3
"""Starting below this block count, the continuum relaxation is a poor approximation."""

DEFAULT_FLUID_STEP = 0.01
"""Default step, in clock (tau) units."""


def fluid_payoff(model: RateMatrix | PayoffMatrix) -> np.ndarray:
    """
    Payoff matrix driving the continuum relaxation.

    A payoff matrix supplied directly with nonnegative entries is shifted by a constant so that
    every entry is at most -1; the shift leaves frequency dynamics unchanged at leading order.
    """
    if isinstance(model, RateMatrix):
        return payoff_from_rates(model).entries
    a = model.entries
    top = float(np.max(a))
    if top >= 0:
        log.warning(f"fluid: shifting direct payoff matrix by {-(top + 1):g} to obtain merger rates")
        a = a - (top + 1)
    return a


def _field(a: np.ndarray, diag: np.ndarray, y: np.ndarray) -> np.ndarray:
    # y = (t, log sigma, r_1..r_k, compensator of 1/sigma), derivative in clock time
    k = diag.size
    sigma = math.exp(y[1])
    r = y[2 : 2 + k]
    g = diag / sigma - a @ r
    s = float(r @ g)
    dy = np.empty_like(y)
    dy[0] = 1.0 / sigma
    dy[1] = -s
    dy[2 : 2 + k] = sigma / (sigma - 1) * (s * r - r * g)
    dy[2 + k] = s / (sigma - 1)
    return dy


def _rk4(a: np.ndarray, diag: np.ndarray, y: np.ndarray, h: float) -> np.ndarray:
    k1 = _field(a, diag, y)
    k2 = _field(a, diag, y + h / 2 * k1)
    k3 = _field(a, diag, y + h / 2 * k2)
    k4 = _field(a, diag, y + h * k3)
    out = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    r = np.maximum(out[2:-1], 0.0)
    out[2:-1] = r / np.sum(r)
    return out


def _land(a: np.ndarray, diag: np.ndarray, y: np.ndarray, h: float, idx: int, target: float) -> tuple[np.ndarray, float]:
    """Find the partial step from ``y`` after which coordinate ``idx`` equals ``target``."""
    lo, hi = 0.0, h
    sign = np.sign(target - y[idx])
    y_mid = y
    for _ in range(100):
        mid = (lo + hi) / 2
        y_mid = _rk4(a, diag, y, mid)
        gap = target - y_mid[idx]
        if abs(gap) <= 1e-14 * max(1.0, abs(target)):
            break
        if np.sign(gap) == sign:
            lo = mid
        else:
            hi = mid
    y_mid = y_mid.copy()
    y_mid[idx] = target
    return y_mid, mid


def integrate_fluid(
    model: RateMatrix | PayoffMatrix,
    f0: FluidState,
    *,
    sigma_stop: float,
    horizon: float = math.inf,
    step: float = DEFAULT_FLUID_STEP,
) -> FluidPath:
    """
    Integrate the continuum relaxation until ``sigma`` reaches ``sigma_stop`` or time reaches ``horizon``.

    The system is integrated in clock time ``tau`` with fixed-step RK4; the final step is
    shortened so that the path lands exactly on the stopping level.

    Args:
        model: merger rates, or a payoff matrix supplied directly.
        f0: initial continuum state.
        sigma_stop: stopping block count, clipped below at ``FLUID_MIN_SIGMA``.
        horizon: stopping real time.
        step: step in clock units.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    a = fluid_payoff(model)
    k = a.shape[0]
    if f0.r.shape != (k,):
        raise ValueError(f"state has {f0.r.shape} types, model has {k}")
    diag = np.diag(a).copy()
    if f0.sigma < FLUID_WARN_SIGMA:
        log.warning(f"fluid: starting block count {f0.sigma:g} is small for a continuum relaxation")

    degenerate = sigma_stop < FLUID_MIN_SIGMA
    l_stop = math.log(max(sigma_stop, FLUID_MIN_SIGMA))
    y = np.concatenate([[0.0, math.log(f0.sigma)], f0.r, [0.0]])
    taus = [0.0]
    rows = [y]
    tau = 0.0
    reason: StopReason | None = None

    if y[1] < l_stop:
        reason = "degenerate" if degenerate else "unreachable"
    elif y[1] == l_stop:
        reason = "degenerate" if degenerate else "hit_sigma"
    elif horizon <= 0:
        reason = "max_time"
    while reason is None:
        y_next = _rk4(a, diag, y, step)
        h = step
        if y_next[1] <= l_stop:
            y_next, h = _land(a, diag, y, step, 1, l_stop)
            reason = "degenerate" if degenerate else "hit_sigma"
        if y_next[0] >= horizon:
            y_next, h = _land(a, diag, y, step, 0, horizon)
            reason = "max_time"
        tau += h
        taus.append(tau)
        rows.append(y_next)
        y = y_next

    if reason == "degenerate":
        log.warning("fluid: continuum block count reached 2, stopping")
    path = np.array(rows)
    sigma = np.exp(path[:, 1])
    r = path[:, 2 : 2 + k]
    alpha = np.hstack([r - r[0], path[:, 2 + k :]])
    return FluidPath(t=path[:, 0], tau=np.array(taus), sigma=sigma, r=r, alpha=alpha, stop_reason=reason)


def simulate_fluid(
    model: RateMatrix | PayoffMatrix, f0: FluidState, stop: StopCriterion, step: float = DEFAULT_FLUID_STEP
) -> FluidPath:
    """
    Deterministic continuum path of block count and type frequencies.

    Block count decreases at the total merger rate evaluated at ``sigma * r``; frequencies follow
    the drift of the merger compensator. In clock time, frequencies solve the replicator equation
    up to terms of order ``1/sigma``.

    Args:
        model: merger rates, or a payoff matrix supplied directly.
        f0: initial continuum state.
        stop: stop criterion; "absorb" runs until the block count reaches 2.
        step: step in clock (tau) units.
    """
    path = integrate_fluid(model, f0, sigma_stop=stop.sigma_target, horizon=stop.time_limit, step=step)
    log.debug(f"simulate_fluid: sigma {f0.sigma:g} -> {path.sigma[-1]:g} at t={path.end_time:.6g} ({path.stop_reason})")
    return path
