from dataclasses import dataclass

import numpy as np

from replicoal.dual.law import DEFAULT_LEVEL_BUDGET, Key, LevelDistribution, exact_hitting_laws
from replicoal.models.core import BlockState, RateMatrix
from replicoal.utils import json_encodable

Q_IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class HFunction:
    """
    ``h(n) = mu_{|n|}(n) / q_n`` on states with at least two blocks,
    where ``mu`` is the hitting law of the level of n and ``q_n`` the holding rate.
    """

    values: dict[Key, float]
    top: int
    """Highest level covered."""

    def __getitem__(self, key: Key) -> float:
        return self.values.get(key, 0.0)

    def support(self, level: int) -> list[Key]:
        """States of ``level`` with positive h, lexicographic."""
        return sorted(key for key, v in self.values.items() if sum(key) == level and v > 0)


def _rates(C: RateMatrix, keys: list[Key]) -> tuple[np.ndarray, np.ndarray]:
    d = C.victim_rates(np.array(keys, dtype=np.float64))
    return d, np.sum(d, axis=1)


def h_from_law(laws: dict[int, LevelDistribution], C: RateMatrix) -> HFunction:
    """
    Build h from hitting laws of consecutive levels.
    States with zero probability get h = 0 and are left out of the dual chain.
    """
    values: dict[Key, float] = {}
    for level, law in laws.items():
        if level < 2:
            continue
        keys = list(law.probs)
        _, q = _rates(C, keys)
        for key, qn in zip(keys, q):
            values[key] = law[key] / float(qn)
    return HFunction(values, max(laws))


@json_encodable
@dataclass(frozen=True)
class HConsistencyReport:
    """
    Largest relative residual of ``h(n) = sum_{n'} h(n') q_{n',n} / q_n`` over the checked states.
    """

    max_residual: float
    n_states: int
    levels: tuple[int, int]

    @property
    def passed(self) -> bool:
        return self.max_residual < Q_IDENTITY_TOL


def _parents(key: Key) -> list[tuple[int, Key]]:
    # states one level up that reach key by losing a type-j block
    return [(j, key[:j] + (key[j] + 1,) + key[j + 1 :]) for j in range(len(key))]


def _inflow(h: HFunction, C: RateMatrix, key: Key) -> float:
    total = 0.0
    for j, parent in _parents(key):
        hp = h[parent]
        if hp > 0:
            total += hp * float(C.victim_rates(np.array(parent, dtype=np.float64))[j])
    return total


def check_h_consistency(h: HFunction, C: RateMatrix, lowest: int) -> HConsistencyReport:
    """
    Evaluate the h consistency relation on levels from ``max(lowest, 2)`` to ``h.top - 1``.
    """
    lo, hi = max(lowest, 2), h.top - 1
    worst = 0.0
    n = 0
    for level in range(lo, hi + 1):
        keys = h.support(level)
        if not keys:
            continue
        _, q = _rates(C, keys)
        for key, qn in zip(keys, q):
            rhs = _inflow(h, C, key) / float(qn)
            worst = max(worst, abs(h[key] - rhs) / h[key])
            n += 1
    return HConsistencyReport(worst, n, (lo, hi))


def dual_rates(h: HFunction, C: RateMatrix) -> dict[tuple[Key, Key], float]:
    """
    Rates of the time-reversed chain, ``q^_{n,n'} = h(n') / h(n) * q_{n',n}`` for ``n'`` one level above ``n``.

    Only states with positive h on both ends carry a rate.
    """
    out: dict[tuple[Key, Key], float] = {}
    for key, hn in sorted(h.values.items()):
        if hn <= 0:
            continue
        for j, parent in _parents(key):
            hp = h[parent]
            if hp > 0:
                q_down = float(C.victim_rates(np.array(parent, dtype=np.float64))[j])
                out[(key, parent)] = hp / hn * q_down
    return out


@json_encodable
@dataclass(frozen=True)
class QIdentityReport:
    """
    Comparison of holding rates ``q_n`` with dual holding rates ``q^_n = sum_{n'} q^_{n,n'}``.
    """

    max_rel_error: float
    n_states: int
    levels: tuple[int, int]
    eta: tuple[int, ...]
    m: int

    @property
    def passed(self) -> bool:
        return self.max_rel_error < Q_IDENTITY_TOL


def verify_q_identity(C: RateMatrix, eta: BlockState, m: int, *, budget: int = DEFAULT_LEVEL_BUDGET) -> QIdentityReport:
    """
    Compute exact hitting laws from ``eta`` down to ``m`` and compare ``q_n`` with ``q^_n`` on every
    state with positive probability on levels ``max(m, 2)`` to ``sigma(eta) - 1``.

    Raises:
        BudgetExceededError: a level would exceed ``budget`` states.
    """
    laws = exact_hitting_laws(C, eta, m, budget=budget)
    h = h_from_law(laws, C)
    rates = dual_rates(h, C)
    q_hat: dict[Key, float] = {}
    for (lower, _), rate in rates.items():
        q_hat[lower] = q_hat.get(lower, 0.0) + rate

    lo, hi = max(m, 2), eta.sigma - 1
    worst = 0.0
    n = 0
    for level in range(lo, hi + 1):
        keys = h.support(level)
        if not keys:
            continue
        _, q = _rates(C, keys)
        for key, qn in zip(keys, q):
            worst = max(worst, abs(float(qn) - q_hat.get(key, 0.0)) / float(qn))
            n += 1
    return QIdentityReport(worst, n, (lo, hi), eta.key, m)
