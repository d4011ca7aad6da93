import numpy as np

from replicoal.models.core import BlockState, RateMatrix
from replicoal.simulator.exact import DEFAULT_RECORD_SIGMA, DEFAULT_SNAPSHOT_EVERY, exact_loop
from replicoal.simulator.trajectory import Recorder, StopCriterion, Trajectory
from replicoal.utils import LeapOvershootError, SeedLike, as_generator, log

MAX_HALVINGS = 20
"""Step halvings allowed before a leap is declared a failure."""

EXACT_GAP = 10
"""Leaping stops once the block count is within this many mergers of the floor."""


def leap_step(rates: np.ndarray, counts: np.ndarray, sigma: int, eps: float) -> float:
    """
    Choose a leap length bounding the expected relative change of every count and of the total rate by ``eps``.

    Args:
        rates: channel rate matrix.
        counts: current counts.
        sigma: current block count.
        eps: error control parameter.
    """
    lam = float(np.sum(rates))
    victim = np.sum(rates, axis=0)
    # the total rate scales like sigma^2
    dt = eps * sigma / (2 * lam)
    active = victim > 0
    if np.any(active):
        allowed = np.maximum(eps * counts[active], 1.0) / victim[active]
        dt = min(dt, float(np.min(allowed)))
    return dt


def leap_means(C: RateMatrix, n: np.ndarray, rates: np.ndarray, dt: float, midpoint: bool) -> np.ndarray:
    """
    Expected merger count per channel over a leap of length ``dt`` from counts ``n``.

    With ``midpoint``, rates are evaluated at the state expected halfway through the leap,
    which makes the drift error second order in the leap length.
    """
    if not midpoint:
        return rates * dt
    half = np.maximum(n - np.sum(rates, axis=0) * dt / 2, 0.0)
    return np.maximum(C.channel_rates(half), 0.0) * dt


def tau_leap_loop(
    C: RateMatrix,
    counts: np.ndarray,
    t: float,
    *,
    floor: int,
    horizon: float,
    eps: float,
    gen: np.random.Generator,
    rec: Recorder,
    midpoint: bool = True,
) -> float:
    """
    Leap from state ``counts`` at time ``t`` until the block count is near ``floor`` or ``horizon`` is reached.
    ``counts`` is modified in place.

    Returns:
        Time at which leaping stopped.

    Raises:
        LeapOvershootError: a leap kept overshooting after repeated halving.
    """
    sigma = int(np.sum(counts))

    while sigma > floor + EXACT_GAP and t < horizon:
        n = counts.astype(np.float64)
        rates = C.channel_rates(n)
        lam = float(np.sum(rates))
        dt = leap_step(rates, n, sigma, eps)
        # keep the expected merger count within half the distance to the floor
        dt = min(dt, (sigma - floor) / (2 * lam), horizon - t)

        for _ in range(MAX_HALVINGS + 1):
            fired = gen.poisson(leap_means(C, n, rates, dt, midpoint))
            removed = np.sum(fired, axis=0)
            after = counts - removed
            if np.all(after >= 0) and int(np.sum(after)) >= floor:
                break
            dt /= 2
        else:
            raise LeapOvershootError(
                f"tau-leap overshoot at t={t:.6g} state={counts.tolist()} eps={eps} floor={floor} C={C.entries.tolist()}"
            )

        t += dt
        if np.any(removed):
            counts[:] = after
            sigma = int(np.sum(counts))
            rec.leap(t, counts)
    return t


def simulate_tau_leap(
    C: RateMatrix,
    n0: BlockState,
    stop: StopCriterion,
    seed: SeedLike = None,
    *,
    eps: float = 0.03,
    sigma_floor: int = 1000,
    midpoint: bool = True,
    record_sigma: int | None = DEFAULT_RECORD_SIGMA,
    snapshot_every: int = DEFAULT_SNAPSHOT_EVERY,
) -> Trajectory:
    """
    Simulate with Poisson tau-leaping above ``sigma_floor`` and exactly below it.

    Each leap draws a Poisson number of mergers per channel, with rates taken at the state expected
    halfway through the leap unless ``midpoint`` is False. A leap that would remove more
    blocks of a type than are present, or cross the floor, is redrawn with half the step.
    Leap records carry the ``LEAP`` channel marker.

    Args:
        C: merger rates.
        n0: initial state.
        stop: stop criterion.
        seed: random seed or generator.
        eps: error control parameter in ``(0, 0.1]``.
        sigma_floor: block count at which simulation becomes exact, at least 2.
        midpoint: evaluate rates at the expected mid-leap state rather than at the leap start.
        record_sigma: see :func:`simulate_exact`.
        snapshot_every: see :func:`simulate_exact`.

    Raises:
        LeapOvershootError: a leap kept overshooting after 20 halvings.
    """
    if not 0 < eps <= 0.1:
        raise ValueError(f"eps must be in (0, 0.1], got {eps}")
    if sigma_floor < 2:
        raise ValueError(f"sigma_floor must be at least 2, got {sigma_floor}")
    if n0.k != C.k:
        raise ValueError(f"state has {n0.k} types, rate matrix has {C.k}")
    gen = as_generator(seed)
    counts = n0.counts.copy()
    rec = Recorder(counts, 0.0, record_sigma=record_sigma, snapshot_every=snapshot_every)

    if stop.kind == "hit_sigma" and stop.sigma_target > n0.sigma:
        return rec.build(n0, 0.0, "unreachable")

    floor = max(sigma_floor, stop.sigma_target)
    t = tau_leap_loop(C, counts, 0.0, floor=floor, horizon=stop.time_limit, eps=eps, gen=gen, rec=rec, midpoint=midpoint)
    if t >= stop.time_limit:
        reason = "max_time"
        end_time = stop.time_limit
    else:
        end_time, reason = exact_loop(C, counts, t, stop, gen, rec)
    rec.flush(counts)
    log.debug(f"simulate_tau_leap: {n0} -> {BlockState(counts)} at t={end_time:.6g} ({reason})")
    return rec.build(n0, end_time, reason)
