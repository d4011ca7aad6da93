from dataclasses import dataclass
from typing import Literal

import numpy as np

from replicoal.analysis.clock import time_change
from replicoal.analysis.compensator import martingale_residual, tau_martingale
from replicoal.analysis.moments import RunningMoments
from replicoal.models.core import BlockState, RateMatrix, largest_remainder_round, payoff_from_rates
from replicoal.models.replicator import ess_fixed_point, integrate
from replicoal.simulator import (
    DEFAULT_SWITCH_SIGMA,
    Method,
    SimulationPlan,
    StopCriterion,
    Trajectory,
    UpperMethod,
    run_ensemble,
    state_at_hitting,
)
from replicoal.utils import json_encodable, log

DEFAULT_SIGMA_CUTOFF = 1000
"""Clock-time comparisons only use the part of a run above this block count."""


def initial_state(sigma0: int, r0: np.ndarray) -> BlockState:
    """Integer starting state with ``sigma0`` blocks closest to frequencies ``r0``."""
    return BlockState(largest_remainder_round(sigma0, np.asarray(r0, dtype=np.float64)))


@json_encodable
@dataclass(frozen=True)
class EnsembleSummary:
    """
    Per-grid-point ensemble means of a per-type error, with standard errors.
    """

    grid: np.ndarray
    """Grid, shape (G,)."""
    time_kind: Literal["tau", "real", "sigma"]
    """Whether the grid is clock time, real time, or a block-count level."""
    mean_abs_err: np.ndarray
    """Shape (G, k)."""
    stderr: np.ndarray
    """Shape (G, k)."""
    n_runs: int
    """Runs contributing to the statistics."""
    n_excluded: int = 0
    """Runs excluded because they did not cover the grid."""

    @property
    def sup_error(self) -> np.ndarray:
        """Largest mean error over the grid, per type."""
        return np.max(self.mean_abs_err, axis=0)


def ensemble_vs_ode(
    C: RateMatrix,
    sigma0: int,
    r0: np.ndarray,
    n_runs: int,
    grid: np.ndarray,
    seed: int | None,
    *,
    method: Method = "hybrid",
    switch_sigma: int = DEFAULT_SWITCH_SIGMA,
    upper: UpperMethod = "fluid",
    sigma_cutoff: int = DEFAULT_SIGMA_CUTOFF,
    ode_step: float = 0.01,
    threads: int | None = None,
) -> EnsembleSummary:
    """
    Compare time-changed frequencies ``R(s) = r(tau(s))`` with the replicator equation.

    Every run starts from the same state and stops at ``sigma_cutoff`` blocks.
    Runs whose clock mass does not cover ``grid`` are excluded and counted.

    Args:
        C: merger rates.
        sigma0: initial block count.
        r0: initial frequencies, interior.
        n_runs: number of runs.
        grid: clock times.
        seed: master seed.
        method: simulation method.
        switch_sigma: hybrid switch level.
        upper: hybrid handling above the switch.
        sigma_cutoff: stopping block count.
        ode_step: replicator integration step.
        threads: worker threads.
    """
    grid = np.asarray(grid, dtype=np.float64)
    initial = initial_state(sigma0, r0)
    stop = StopCriterion.hit_sigma(sigma_cutoff) if sigma0 > sigma_cutoff else StopCriterion.absorb()
    sim = SimulationPlan(C, method, switch_sigma=switch_sigma, upper=upper).prepare(initial, stop)
    ode = integrate(payoff_from_rates(C), initial.r, float(np.max(grid)), ode_step)
    x = ode.at(grid)

    def one(i: int, gen: np.random.Generator) -> np.ndarray | None:
        tc = time_change(sim(gen), grid)
        if not np.all(tc.in_range):
            return None
        return np.abs(tc.R - x)

    acc = RunningMoments((grid.size, C.k))
    excluded = 0
    for err in run_ensemble(one, n_runs, seed, threads):
        if err is None:
            excluded += 1
        else:
            acc.add(err)
    if excluded:
        log.info(f"ensemble_vs_ode: excluded {excluded} of {n_runs} runs with insufficient clock mass")
    return EnsembleSummary(
        grid=grid,
        time_kind="tau",
        mean_abs_err=acc.mean,
        stderr=acc.stderr,
        n_runs=acc.count,
        n_excluded=excluded,
    )


@json_encodable
@dataclass(frozen=True)
class BottleneckStat:
    """
    Mean distance of the frequencies at the first visit to level ``m`` from the stable state.
    """

    m: int
    mean: np.ndarray
    """Mean ``|r_i(gamma_m) - x*_i|`` per type, shape (k,)."""
    stderr: np.ndarray
    n_runs: int

    @property
    def l1(self) -> float:
        """Sum of the per-type means."""
        return float(np.sum(self.mean))


def bottleneck_curve(
    C: RateMatrix,
    sigma0: int,
    r0: np.ndarray,
    ms: list[int],
    n_runs: int,
    seed: int | None,
    *,
    method: Method = "hybrid",
    switch_sigma: int = DEFAULT_SWITCH_SIGMA,
    upper: UpperMethod = "fluid",
    threads: int | None = None,
) -> list[BottleneckStat]:
    """
    Bottleneck statistic at several levels from a single ensemble; each run stops at ``min(ms)``.
    """
    if not ms or min(ms) < 2 or max(ms) > sigma0:
        raise ValueError(f"levels {ms} must lie in [2, {sigma0}]")
    x_star = ess_fixed_point(payoff_from_rates(C)).x_star
    initial = initial_state(sigma0, r0)
    stop = StopCriterion.hit_sigma(min(ms))
    sim = SimulationPlan(C, method, switch_sigma=switch_sigma, upper=upper).prepare(initial, stop)

    def one(i: int, gen: np.random.Generator) -> np.ndarray:
        traj = sim(gen)
        rows = []
        for m in ms:
            r = state_at_hitting(traj, m)
            assert r is not None, f"run {i} never reached level {m}"
            rows.append(np.abs(r - x_star))
        return np.array(rows)

    acc = RunningMoments((len(ms), C.k))
    for err in run_ensemble(one, n_runs, seed, threads):
        acc.add(err)
    mean, stderr = acc.mean, acc.stderr
    return [BottleneckStat(m, mean[i], stderr[i], acc.count) for i, m in enumerate(ms)]


def bottleneck_stat(
    C: RateMatrix,
    sigma0: int,
    r0: np.ndarray,
    m: int,
    n_runs: int,
    seed: int | None,
    **kwargs,
) -> BottleneckStat:
    """
    Mean ``|r_i(gamma_m) - x*_i|`` per type over ``n_runs`` runs from ``sigma0`` blocks.
    Keyword arguments are passed to :func:`bottleneck_curve`.
    """
    return bottleneck_curve(C, sigma0, r0, [m], n_runs, seed, **kwargs)[0]


@json_encodable
@dataclass(frozen=True)
class MartingaleMeanReport:
    """
    Ensemble mean of the martingale part at real times, per component.
    """

    grid: np.ndarray
    mean: np.ndarray
    """Shape (G, k+1)."""
    stderr: np.ndarray
    max_z: float
    """Largest ``|mean| / stderr`` over grid points and components."""
    passed: bool
    n_runs: int


def _exact_runs(C: RateMatrix, sigma0: int, r0: np.ndarray, stop: StopCriterion):
    plan = SimulationPlan(C, "exact", record_sigma=None)
    return plan.prepare(initial_state(sigma0, r0), stop)


def martingale_mean_check(
    C: RateMatrix,
    sigma0: int,
    r0: np.ndarray,
    n_runs: int,
    grid: np.ndarray,
    seed: int | None,
    *,
    z_limit=4.0,
    threads: int | None = None,
) -> MartingaleMeanReport:
    """
    Check that the martingale part ``y(t) - y(0) - alpha(t)`` has mean zero.

    Passes when every component at every grid time is within ``z_limit`` standard errors of zero.
    """
    grid = np.asarray(grid, dtype=np.float64)
    sim = _exact_runs(C, sigma0, r0, StopCriterion.max_time(float(np.max(grid))))
    residuals = run_ensemble(lambda i, gen: martingale_residual(sim(gen), C, grid), n_runs, seed, threads)
    acc = RunningMoments((grid.size, C.k + 1))
    for m in residuals:
        acc.add(m)
    mean, stderr = acc.mean, acc.stderr
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0, np.abs(mean) / stderr, np.where(np.abs(mean) > 1e-12, np.inf, 0.0))
    max_z = float(np.max(z))
    return MartingaleMeanReport(grid, mean, stderr, max_z, max_z <= z_limit, acc.count)


@json_encodable
@dataclass(frozen=True)
class SecondMomentReport:
    """
    Second moment of the time-changed martingale part against pathwise bounds, per clock time.
    """

    grid: np.ndarray
    mean_sq: np.ndarray
    """Empirical mean of the squared norm of the martingale part, shape (G,)."""
    mean_sq_stderr: np.ndarray
    quadratic_variation: np.ndarray
    """Mean predictable quadratic variation, equal in expectation to ``mean_sq``."""
    quadratic_variation_stderr: np.ndarray
    printed_bound: np.ndarray
    """``4 c_max E int sigma / (sigma - 1)^2``."""
    corrected_bound: np.ndarray
    """``3 c_max E int sigma / (sigma - 1)``."""
    n_runs: int
    n_excluded: int

    @property
    def isometry_z(self) -> float:
        """Largest standardized gap between ``mean_sq`` and ``quadratic_variation``."""
        se = np.hypot(self.mean_sq_stderr, self.quadratic_variation_stderr)
        gap = np.abs(self.mean_sq - self.quadratic_variation)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, gap / se, np.where(gap > 1e-15, np.inf, 0.0))
        return float(np.max(z))

    @property
    def printed_holds(self) -> bool:
        return bool(np.all(self.mean_sq <= self.printed_bound))

    @property
    def corrected_holds(self) -> bool:
        return bool(np.all(self.mean_sq <= self.corrected_bound))


def second_moment_check(
    C: RateMatrix,
    sigma0: int,
    r0: np.ndarray,
    n_runs: int,
    grid: np.ndarray,
    seed: int | None,
    *,
    stop: StopCriterion | None = None,
    threads: int | None = None,
) -> SecondMomentReport:
    """
    Compare ``E |m(tau(s))|^2`` with pathwise integrals of the block count.

    The expected squared norm equals the expected predictable quadratic variation. It is compared against
    ``4 c_max E int_0^{tau(s)} sigma / (sigma - 1)^2 du``, which can fail at large block counts because the
    quadratic variation grows like ``s / sigma``, and against ``3 c_max E int_0^{tau(s)} sigma / (sigma - 1) du``,
    which dominates the quadratic variation density in every state.

    Args:
        stop: stop criterion for the exact runs, absorption by default; runs whose clock mass does not
            cover ``grid`` are excluded.
    """
    grid = np.asarray(grid, dtype=np.float64)
    sim = _exact_runs(C, sigma0, r0, stop or StopCriterion.absorb())

    def one(i: int, gen: np.random.Generator) -> np.ndarray | None:
        tm = tau_martingale(sim(gen), C, grid)
        if np.any(np.isnan(tm.tau)):
            return None
        return np.stack([np.sum(tm.values**2, axis=1), tm.quadratic_variation, tm.sigma_over_sq, tm.sigma_over_lin])

    acc = RunningMoments((4, grid.size))
    excluded = 0
    for row in run_ensemble(one, n_runs, seed, threads):
        if row is None:
            excluded += 1
        else:
            acc.add(row)
    mean, stderr = acc.mean, acc.stderr
    return SecondMomentReport(
        grid=grid,
        mean_sq=mean[0],
        mean_sq_stderr=stderr[0],
        quadratic_variation=mean[1],
        quadratic_variation_stderr=stderr[1],
        printed_bound=4 * C.c_max * mean[2],
        corrected_bound=3 * C.c_max * mean[3],
        n_runs=acc.count,
        n_excluded=excluded,
    )
