from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from replicoal.analysis.clock import clock, frequencies_at
from replicoal.models.core import RateMatrix
from replicoal.simulator import Trajectory, hitting_time
from replicoal.utils import json_encodable

type Density = Callable[[np.ndarray], np.ndarray]
"""Maps block counts of shape (M, k) to integrand values of shape (M, d)."""


def compensator_density(C: RateMatrix, n: np.ndarray) -> np.ndarray:
    """
    Drift density of ``y = (r, 1/sigma)`` in each state of ``n``.

    A merger removing a type-j block moves r by ``(r - e_j) / (sigma - 1)`` and
    ``1/sigma`` by ``1 / (sigma (sigma - 1))``; the density weighs these jumps by the removal rates.
    States with a single block have zero density.

    Args:
        C: merger rates.
        n: block counts, shape (M, k), may be non-integer.

    Returns: Shape (M, k+1).
    """
    n = np.atleast_2d(np.asarray(n, dtype=np.float64))
    sigma = np.sum(n, axis=1)
    d = C.victim_rates(n)
    lam = np.sum(d, axis=1)
    live = sigma > 1
    out = np.zeros((n.shape[0], n.shape[1] + 1))
    s, r = sigma[live], n[live] / sigma[live, None]
    out[live, :-1] = (lam[live, None] * r - d[live]) / (s - 1)[:, None]
    out[live, -1] = lam[live] / (s * (s - 1))
    return out


def quadratic_variation_density(C: RateMatrix, n: np.ndarray) -> np.ndarray:
    """
    Density of the predictable quadratic variation of the martingale part of ``y``,
    ``sum_j d_j |jump_j|^2``. Shape (M, 1).
    """
    n = np.atleast_2d(np.asarray(n, dtype=np.float64))
    sigma = np.sum(n, axis=1)
    d = C.victim_rates(n)
    out = np.zeros((n.shape[0], 1))
    live = sigma > 1
    s = sigma[live]
    r = n[live] / s[:, None]
    rr = np.sum(r * r, axis=1)
    jump = (rr[:, None] - 2 * r + 1 + (1 / s**2)[:, None]) / ((s - 1) ** 2)[:, None]
    out[live, 0] = np.sum(d[live] * jump, axis=1)
    return out


def _sigma_density(power: int) -> Density:
    def density(n: np.ndarray) -> np.ndarray:
        sigma = np.sum(np.atleast_2d(n), axis=1)
        out = np.zeros((sigma.size, 1))
        live = sigma > 1
        out[live, 0] = sigma[live] / (sigma[live] - 1) ** power
        return out

    return density


def path_integral(traj: Trajectory, density: Density, t: np.ndarray, *, fluid_values: np.ndarray | None = None) -> np.ndarray:
    """
    Integrate a state density along ``traj`` from 0 to each real time in ``t``.

    Holding intervals contribute exactly. Within a continuum prefix, ``fluid_values`` gives the
    integral at each continuum step when known; otherwise the trapezoid rule is used.
    Times after the end of the trajectory are NaN unless it was absorbed.

    Returns: Shape (len(t), d).
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    dens = density(traj.counts.astype(np.float64))
    width = dens.shape[1]

    if traj.fluid is not None:
        f = traj.fluid
        if fluid_values is None:
            fd = density(f.sigma[:, None] * f.r)
            steps = (fd[1:] + fd[:-1]) / 2 * np.diff(f.t)[:, None]
            fluid_values = np.vstack([np.zeros((1, width)), np.cumsum(steps, axis=0)])
        base = fluid_values[-1]
    else:
        base = np.zeros(width)

    cum = base + np.vstack([np.zeros((1, width)), np.cumsum(dens[:-1] * np.diff(traj.times)[:, None], axis=0)])
    absorbed = traj.stop_reason == "absorbed"
    tt = np.minimum(t, traj.end_time) if absorbed else t

    out = np.full((t.size, width), np.nan)
    ok = (tt >= 0) & (tt <= traj.end_time)
    discrete = ok & (tt >= traj.times[0])
    if np.any(discrete):
        idx = np.searchsorted(traj.times, tt[discrete], side="right") - 1
        out[discrete] = cum[idx] + dens[idx] * (tt[discrete] - traj.times[idx])[:, None]
    continuum = ok & ~discrete
    if np.any(continuum):
        assert traj.fluid is not None and fluid_values is not None
        f = traj.fluid
        out[continuum] = np.stack([np.interp(tt[continuum], f.t, fluid_values[:, i]) for i in range(width)], axis=1)
    return out


def compensator(traj: Trajectory, C: RateMatrix, t: float, start: float = 0.0) -> np.ndarray:
    """
    Compensator of ``y = (r, 1/sigma)`` accumulated over ``[start, t]``, stopped at absorption.

    The first k components compensate r, the last compensates ``1/sigma``.

    Raises:
        ValueError: ``t`` after the end of a trajectory that was not absorbed, or ``start > t``.
    """
    if start > t:
        raise ValueError(f"start {start} after t {t}")
    if t > traj.end_time and traj.stop_reason != "absorbed":
        raise ValueError(f"time {t} after trajectory end {traj.end_time}")
    values = _compensator_at(traj, C, np.array([start, t]))
    return values[1] - values[0]


def _compensator_at(traj: Trajectory, C: RateMatrix, t: np.ndarray) -> np.ndarray:
    fluid_values = traj.fluid.alpha if traj.fluid is not None else None
    return path_integral(traj, lambda n: compensator_density(C, n), t, fluid_values=fluid_values)


def observable_at(traj: Trajectory, t: np.ndarray) -> np.ndarray:
    """``y = (r, 1/sigma)`` at real times ``t``, shape (len(t), k+1)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    tt = np.minimum(t, traj.end_time) if traj.stop_reason == "absorbed" else t
    r = frequencies_at(traj, tt)
    inv = np.full(t.size, np.nan)
    ok = ~np.isnan(r[:, 0])
    inv[ok] = [1.0 / traj.sigma_at(u) for u in tt[ok]]
    return np.hstack([r, inv[:, None]])


def initial_observable(traj: Trajectory) -> np.ndarray:
    if traj.fluid is not None:
        return np.append(traj.fluid.r[0], 1.0 / traj.fluid.sigma[0])
    return np.append(traj.counts[0] / traj.sigmas[0], 1.0 / traj.sigmas[0])


def martingale_residual(traj: Trajectory, C: RateMatrix, grid: np.ndarray) -> np.ndarray:
    """
    Martingale part ``m(t) = y(t) - y(0) - alpha(t)`` at real times ``grid``.

    Returns: Shape (len(grid), k+1); rows after the end of a non-absorbed trajectory are NaN.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=np.float64))
    return observable_at(traj, grid) - initial_observable(traj) - _compensator_at(traj, C, grid)


@json_encodable
@dataclass(frozen=True)
class TauMartingale:
    """
    Martingale part read through the time change, with pathwise second-moment integrals.
    """

    grid: np.ndarray
    """Clock times, shape (G,)."""
    tau: np.ndarray
    """Real times, shape (G,)."""
    values: np.ndarray
    """``m(tau(s))``, shape (G, k+1)."""
    quadratic_variation: np.ndarray
    """Predictable quadratic variation up to ``tau(s)``, shape (G,)."""
    sigma_over_sq: np.ndarray
    """``int_0^{tau(s)} sigma / (sigma - 1)^2 du`` before absorption, shape (G,)."""
    sigma_over_lin: np.ndarray
    """``int_0^{tau(s)} sigma / (sigma - 1) du`` before absorption, shape (G,)."""


def tau_martingale(traj: Trajectory, C: RateMatrix, grid: np.ndarray) -> TauMartingale:
    """
    Evaluate ``m^tau(s) = m(tau(s))`` and the pathwise integrals bounding its second moment.

    Clock times beyond the total clock mass are NaN unless the trajectory was absorbed.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=np.float64))
    tau = clock(traj).inverse(grid)
    ok = ~np.isnan(tau)
    safe = np.where(ok, tau, 0.0)

    def masked(a: np.ndarray) -> np.ndarray:
        a = a.copy()
        a[~ok] = np.nan
        return a

    values = masked(martingale_residual(traj, C, safe))
    qv = masked(path_integral(traj, lambda n: quadratic_variation_density(C, n), safe)[:, 0])
    sq = masked(path_integral(traj, _sigma_density(2), safe)[:, 0])
    lin = masked(path_integral(traj, _sigma_density(1), safe)[:, 0])
    return TauMartingale(grid=grid, tau=tau, values=values, quadratic_variation=qv, sigma_over_sq=sq, sigma_over_lin=lin)


def clock_mass_at(traj: Trajectory, m: int) -> float | None:
    """
    Clock mass ``int_0^{gamma_m} sigma(u) du`` accumulated until the block count first equals ``m``.
    """
    t = hitting_time(traj, m)
    if t is None:
        return None
    return float(clock(traj)(t))
