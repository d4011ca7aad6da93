import math
from dataclasses import dataclass

import numpy as np

from replicoal.analysis import RunningMoments
from replicoal.models.core import RateMatrix, rate_bounds
from replicoal.simulator import StopCriterion, StopReason, Trajectory, run_ensemble
from replicoal.utils import SeedLike, as_generator, json_encodable

CHUNK = 1 << 20
"""Levels drawn per batch when streaming holding times."""


@json_encodable
@dataclass(frozen=True)
class KingmanChain:
    """
    Single-type block-counting death chain: from n blocks, one disappears at rate ``rate_c * n (n - 1) / 2``.
    """

    rate_c: float
    """Pairwise collision rate."""
    n0: int | float
    """Initial block count; ``math.inf`` is accepted by closed forms only."""

    def __post_init__(self):
        if not self.rate_c > 0:
            raise ValueError(f"rate_c must be positive, got {self.rate_c}")
        if not self.n0 >= 1:
            raise ValueError(f"n0 must be at least 1, got {self.n0}")

    def holding_rates(self, levels: np.ndarray) -> np.ndarray:
        levels = np.asarray(levels, dtype=np.float64)
        return self.rate_c * levels * (levels - 1) / 2


@json_encodable
@dataclass(frozen=True)
class KingmanPath:
    """
    Path of a death chain: ``levels[i]`` is entered at ``times[i]``.
    """

    times: np.ndarray
    levels: np.ndarray
    end_time: float
    stop_reason: StopReason

    def hitting_time(self, m: int) -> float | None:
        """Time at which the chain enters level ``m``, None if never."""
        idx = int(self.levels[0]) - m
        if idx < 0 or idx >= self.levels.size:
            return None
        return float(self.times[idx])


def simulate_kingman(chain: KingmanChain, stop: StopCriterion, seed: SeedLike = None) -> KingmanPath:
    """
    Simulate the death chain with exponential holding times.
    """
    if not math.isfinite(chain.n0):
        raise ValueError("cannot simulate from infinitely many blocks")
    gen = as_generator(seed)
    n0 = int(chain.n0)
    if stop.kind == "hit_sigma" and stop.sigma_target > n0:
        return KingmanPath(np.zeros(1), np.array([n0]), 0.0, "unreachable")

    last = stop.sigma_target
    levels = np.arange(n0, last - 1, -1, dtype=np.int64)
    holds = gen.exponential(1.0, levels.size - 1) / chain.holding_rates(levels[:-1])
    times = np.concatenate([[0.0], np.cumsum(holds)])
    reason: StopReason = "hit_sigma" if stop.kind == "hit_sigma" else "absorbed"
    end_time = float(times[-1])
    if stop.kind == "max_time":
        keep = int(np.searchsorted(times, stop.value, side="right"))
        if keep < times.size:
            times, levels = times[:keep], levels[:keep]
            reason, end_time = "max_time", stop.value
    return KingmanPath(times, levels, end_time, reason)


def expected_beta(chain: KingmanChain, m: int) -> float:
    """
    Expected time for the chain to go from ``n0`` down to ``m`` blocks,
    ``sum_{j=m+1}^{n0} 2 / (rate_c j (j - 1)) = (2 / rate_c) (1/m - 1/n0)``.

    Raises:
        ValueError: ``m`` not in ``[1, n0)``.
    """
    if not 1 <= m < chain.n0:
        raise ValueError(f"m must be in [1, {chain.n0}), got {m}")
    tail = 0.0 if math.isinf(chain.n0) else 1.0 / chain.n0
    return 2.0 / chain.rate_c * (1.0 / m - tail)


def _level_at(chain: KingmanChain, eps_sorted: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    # stream holding times from n0 downward until the largest eps is passed
    found = np.zeros(eps_sorted.size, dtype=np.int64)
    level = int(chain.n0)
    t = 0.0
    pending = 0
    while pending < eps_sorted.size:
        if level == 1:
            found[pending:] = 1
            break
        size = min(CHUNK, level - 1)
        levels = np.arange(level, level - size, -1, dtype=np.float64)
        leave = t + np.cumsum(gen.exponential(1.0, size) / chain.holding_rates(levels))
        while pending < eps_sorted.size and leave[-1] > eps_sorted[pending]:
            i = int(np.searchsorted(leave, eps_sorted[pending], side="right"))
            found[pending] = int(levels[i])
            pending += 1
        t = float(leave[-1])
        level -= size
    return found


@json_encodable
@dataclass(frozen=True)
class ComingDownEstimate:
    """
    Estimate of ``eps * nu(eps)`` where ``nu(eps)`` is the block count at time ``eps``.
    """

    eps: float
    mean: float
    stderr: float
    n_runs: int
    limit: float
    """Small-time limit ``2 / rate_c``."""

    @property
    def relative_error(self) -> float:
        return abs(self.mean - self.limit) / self.limit


def coming_down_constant(
    chain: KingmanChain, eps_list: list[float], n_runs: int, seed: int | None, *, threads: int | None = None
) -> list[ComingDownEstimate]:
    """
    Monte Carlo estimate of ``eps * nu(eps)`` for each ``eps`` in ``eps_list``, starting from ``chain.n0`` blocks.

    Holding times are streamed in batches from the top level so that starts of ``10^7`` blocks fit in memory.
    """
    if not math.isfinite(chain.n0):
        raise ValueError("n0 must be finite")
    eps = np.array(sorted(eps_list), dtype=np.float64)
    if np.any(eps <= 0):
        raise ValueError("eps must be positive")
    acc = RunningMoments((eps.size,))
    for levels in run_ensemble(lambda i, gen: _level_at(chain, eps, gen), n_runs, seed, threads):
        acc.add(eps * levels)
    mean, stderr = acc.mean, acc.stderr
    limit = 2.0 / chain.rate_c
    by_eps = {e: ComingDownEstimate(float(e), float(mean[i]), float(stderr[i]), acc.count, limit) for i, e in enumerate(eps)}
    return [by_eps[float(e)] for e in eps_list]


def kingman_clock_mass(rate_c: float, m: int, n0: int, n_samples: int, seed: SeedLike = None) -> np.ndarray:
    """
    Samples of the clock mass ``sum_{n=m+1}^{n0} n * hold_n`` accumulated by the death chain between ``n0`` and ``m`` blocks.
    """
    if not 1 <= m < n0:
        raise ValueError(f"m must be in [1, {n0}), got {m}")
    gen = as_generator(seed)
    chain = KingmanChain(rate_c, n0)
    out = np.zeros(n_samples)
    top = n0
    while top > m:
        size = min(max(1, CHUNK // n_samples), top - m)
        levels = np.arange(top, top - size, -1, dtype=np.float64)
        holds = gen.exponential(1.0, (n_samples, size)) / chain.holding_rates(levels)
        out += holds @ levels
        top -= size
    return out


def laplace_hitting(samples: np.ndarray, theta: float) -> tuple[float, float]:
    """
    Empirical Laplace transform ``E[exp(-theta X)]`` of hitting-time samples, with its standard error.
    """
    values = np.exp(-theta * np.asarray(samples, dtype=np.float64))
    stderr = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return float(np.mean(values)), stderr


def coupling_rate_check(C: RateMatrix, traj: Trajectory) -> int:
    """
    Assert the Kingman comparison bounds on the total merger rate at every recorded state of ``traj``.

    Returns:
        Number of states checked.

    Raises:
        AssertionError: a visited state violates a bound.
    """
    lam = np.sum(C.victim_rates(traj.counts), axis=1)
    lower, upper = rate_bounds(C, traj.sigmas.astype(np.float64))
    tol = 1e-9 * np.maximum(1.0, upper)
    bad = (lam < lower - tol) | (lam > upper + tol)
    assert not np.any(bad), f"rate bound violated at {traj.counts[np.argmax(bad)].tolist()}"
    return int(lam.size)
