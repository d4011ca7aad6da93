import numpy as np

from replicoal.models.core import BlockState, RateMatrix
from replicoal.simulator.trajectory import Recorder, StopCriterion, StopReason, Trajectory
from replicoal.utils import SeedLike, as_generator, log

DEFAULT_RECORD_SIGMA = 10_000
"""Exact simulators keep every merger below this block count."""

DEFAULT_SNAPSHOT_EVERY = 100
"""Above the recording threshold, one snapshot per this many mergers."""


def exact_loop(
    C: RateMatrix, counts: np.ndarray, t: float, stop: StopCriterion, gen: np.random.Generator, rec: Recorder
) -> tuple[float, StopReason]:
    """
    Gillespie loop from state ``counts`` at time ``t``, modifying ``counts`` in place.

    Returns:
        End time and stop reason.
    """
    k = C.k
    entries = C.entries
    diag = np.diag(entries)
    target = stop.sigma_target
    horizon = stop.time_limit
    sigma = int(np.sum(counts))

    while True:
        if sigma == target and stop.kind == "hit_sigma":
            return t, "hit_sigma"
        if sigma == 1:
            return t, "absorbed"

        n = counts.astype(np.float64)
        rates = entries * np.outer(n, n)
        np.fill_diagonal(rates, diag * n * (n - 1) / 2)
        cum = np.cumsum(rates.ravel())
        lam = cum[-1]
        assert lam > 0

        dt = gen.exponential(1.0 / lam)
        if t + dt > horizon:
            return horizon, "max_time"
        t += dt

        idx = int(np.searchsorted(cum, gen.random() * lam, side="right"))
        i, j = divmod(idx, k)
        counts[j] -= 1
        sigma -= 1
        rec.event(t, counts, i, j, sigma)


def simulate_exact(
    C: RateMatrix,
    n0: BlockState,
    stop: StopCriterion,
    seed: SeedLike = None,
    *,
    record_sigma: int | None = DEFAULT_RECORD_SIGMA,
    snapshot_every: int = DEFAULT_SNAPSHOT_EVERY,
) -> Trajectory:
    """
    Simulate the replicator coalescent exactly, one merger at a time.

    Holding times are exponential with the total merger rate; the merger channel is chosen
    with probability proportional to its rate, channels ordered survivor-major.

    Args:
        C: merger rates.
        n0: initial state.
        stop: stop criterion.
        seed: random seed or generator.
        record_sigma: keep every merger at or below this block count, None to keep every merger.
        snapshot_every: thinning interval above ``record_sigma``.
    """
    if n0.k != C.k:
        raise ValueError(f"state has {n0.k} types, rate matrix has {C.k}")
    gen = as_generator(seed)
    counts = n0.counts.copy()
    rec = Recorder(counts, 0.0, record_sigma=record_sigma, snapshot_every=snapshot_every)

    if stop.kind == "hit_sigma" and stop.sigma_target > n0.sigma:
        return rec.build(n0, 0.0, "unreachable")

    end_time, reason = exact_loop(C, counts, 0.0, stop, gen, rec)
    rec.flush(counts)
    log.debug(f"simulate_exact: {n0} -> {BlockState(counts)} at t={end_time:.6g} ({reason})")
    return rec.build(n0, end_time, reason)
