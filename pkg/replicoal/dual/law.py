import math
from collections import Counter
from dataclasses import dataclass
from typing import Literal

import numpy as np

from replicoal.models.core import BlockState, RateMatrix
from replicoal.simulator import StopCriterion, block_state_at_hitting, run_ensemble, simulate_exact
from replicoal.utils import BudgetExceededError, SeedLike, as_generator, json_encodable, log

type Key = tuple[int, ...]
"""Block counts as a tuple."""

DEFAULT_LEVEL_BUDGET = 100_000
"""Largest number of states enumerated on a single level."""

LEVEL_ATOL = 1e-12


@json_encodable
@dataclass(frozen=True)
class LevelDistribution:
    """
    Probability distribution over the states with a given block count.
    """

    level: int
    probs: dict[Key, float]
    """Probability per state; keys in lexicographic order."""

    def __post_init__(self):
        assert all(sum(key) == self.level for key in self.probs), "state outside level"
        object.__setattr__(self, "probs", dict(sorted(self.probs.items())))

    @property
    def total(self) -> float:
        return math.fsum(self.probs.values())

    def __getitem__(self, key: Key) -> float:
        return self.probs.get(key, 0.0)

    def check(self) -> "LevelDistribution":
        assert abs(self.total - 1.0) <= LEVEL_ATOL, f"level {self.level} mass {self.total}"
        return self


def _check_budget(eta: BlockState, m: int, budget: int) -> None:
    k = eta.k
    reachable = math.prod(int(v) + 1 for v in eta.counts)
    for level in range(m, eta.sigma + 1):
        size = min(math.comb(level + k - 1, k - 1), reachable)
        if size > budget:
            raise BudgetExceededError(f"level {level} has up to {size} states, budget is {budget}")


def exact_hitting_laws(
    C: RateMatrix, eta: BlockState, m: int, *, budget: int = DEFAULT_LEVEL_BUDGET
) -> dict[int, LevelDistribution]:
    """
    Law of the state at the first visit to every level from ``sigma(eta)`` down to ``m``.

    Each merger lowers the block count by one, so levels form a directed acyclic graph;
    probability mass is pushed from each level to the next with jump probabilities ``d_j(n) / q_n``.

    Raises:
        ValueError: ``m`` not in ``[1, sigma(eta)]``.
        BudgetExceededError: a level would exceed ``budget`` states.
    """
    if eta.k != C.k:
        raise ValueError(f"state has {eta.k} types, rate matrix has {C.k}")
    if not 1 <= m <= eta.sigma:
        raise ValueError(f"m must be in [1, {eta.sigma}], got {m}")
    _check_budget(eta, m, budget)

    laws = {eta.sigma: LevelDistribution(eta.sigma, {eta.key: 1.0})}
    current = {eta.key: 1.0}
    for level in range(eta.sigma, m, -1):
        keys = sorted(current)
        counts = np.array(keys, dtype=np.float64)
        d = C.victim_rates(counts)
        q = np.sum(d, axis=1)
        pushed: dict[Key, float] = {}
        for key, p, dj, qn in zip(keys, (current[k] for k in keys), d, q):
            for j in np.flatnonzero(dj > 0):
                child = key[:j] + (key[j] - 1,) + key[j + 1 :]
                pushed[child] = pushed.get(child, 0.0) + p * float(dj[j]) / float(qn)
        current = pushed
        laws[level - 1] = LevelDistribution(level - 1, pushed).check()
    log.debug(f"exact_hitting_laws: eta={eta} levels {eta.sigma}..{m}")
    return laws


def exact_hitting_law(
    C: RateMatrix, eta: BlockState, m: int, *, budget: int = DEFAULT_LEVEL_BUDGET
) -> LevelDistribution:
    """Law of the state at the first visit to level ``m``, see :func:`exact_hitting_laws`."""
    return exact_hitting_laws(C, eta, m, budget=budget)[m]


def _jump_chain_law(C: RateMatrix, eta: BlockState, m: int, n_runs: int, gen: np.random.Generator) -> Counter[Key]:
    counts = np.tile(eta.counts, (n_runs, 1)).astype(np.float64)
    for _ in range(eta.sigma - m):
        d = C.victim_rates(counts)
        cum = np.cumsum(d, axis=1)
        u = gen.random(n_runs) * cum[:, -1]
        j = np.sum(cum <= u[:, None], axis=1)
        counts[np.arange(n_runs), j] -= 1
    return Counter(tuple(int(v) for v in row) for row in counts)


def empirical_hitting_law(
    C: RateMatrix,
    eta: BlockState,
    m: int,
    n_runs: int,
    seed: SeedLike = None,
    *,
    method: Literal["jump_chain", "exact"] = "jump_chain",
    threads: int | None = None,
) -> LevelDistribution:
    """
    Monte Carlo law of the state at the first visit to level ``m``.

    Args:
        method: "jump_chain" samples the embedded jump chain for all runs at once;
            "exact" runs :func:`simulate_exact` once per run.
    """
    if not 1 <= m <= eta.sigma:
        raise ValueError(f"m must be in [1, {eta.sigma}], got {m}")
    if method == "jump_chain":
        tally = _jump_chain_law(C, eta, m, n_runs, as_generator(seed))
    else:
        if not (seed is None or isinstance(seed, int)):
            raise ValueError("exact method needs an integer master seed")
        stop = StopCriterion.hit_sigma(m)

        def one(i: int, gen: np.random.Generator) -> Key:
            state = block_state_at_hitting(simulate_exact(C, eta, stop, gen, record_sigma=None), m)
            assert state is not None
            return state.key

        tally = Counter(run_ensemble(one, n_runs, seed, threads))
    return LevelDistribution(m, {key: c / n_runs for key, c in tally.items()})


def total_variation(p: LevelDistribution, q: LevelDistribution) -> float:
    """Total variation distance between two distributions on the same level."""
    if p.level != q.level:
        raise ValueError(f"levels differ: {p.level} != {q.level}")
    keys = set(p.probs) | set(q.probs)
    return 0.5 * math.fsum(abs(p[key] - q[key]) for key in keys)
