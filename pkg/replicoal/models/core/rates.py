from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from replicoal.models.core.state import ATOL, BlockState, MergeChannel

type Matrix = np.ndarray[tuple[int, int], np.dtype[np.float64]]
"""Real k*k matrix."""


def _as_square(entries: Iterable[Iterable[float]] | np.ndarray, what: str) -> Matrix:
    m = np.array(entries, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"{what} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{what} has non-finite entries")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """
    Merger-rate matrix C.

    ``entries[i, j]`` is the rate at which a given type-i block absorbs a given type-j block.
    Two specific type-i blocks merge at rate ``entries[i, i]``.
    """

    entries: Matrix

    def __post_init__(self):
        m = _as_square(self.entries, "rate matrix")
        if np.any(m <= 0):
            raise ValueError("rate matrix entries must be strictly positive")
        object.__setattr__(self, "entries", m)

    @classmethod
    def uniform(cls, k: int, c=1.0) -> "RateMatrix":
        """Rate matrix with every entry equal to ``c``."""
        return cls(np.full((k, k), c, dtype=np.float64))

    @classmethod
    def circulant(cls, row: Iterable[float]) -> "RateMatrix":
        """
        Circulant rate matrix: ``entries[i, (i + d) % k] = row[d]``.
        """
        row = np.array(list(row), dtype=np.float64)
        k = row.size
        return cls(np.array([np.roll(row, i) for i in range(k)]))

    @property
    def k(self) -> int:
        """Number of types."""
        return self.entries.shape[0]

    @property
    def c_min(self) -> float:
        """Smallest entry."""
        return float(np.min(self.entries))

    @property
    def c_diag_max(self) -> float:
        """Largest diagonal entry."""
        return float(np.max(np.diag(self.entries)))

    @property
    def c_max(self) -> float:
        """Largest entry."""
        return float(np.max(self.entries))

    def channel_rates(self, n: BlockState | np.ndarray) -> Matrix:
        """
        Rate of every merger channel, survivor-major.

        Returns:
            Matrix whose ``[i, j]`` element is the rate of channel ``(i, j)``.
        """
        counts = _counts(n, self.k)
        rates = self.entries * np.outer(counts, counts)
        np.fill_diagonal(rates, np.diag(self.entries) * counts * (counts - 1) / 2)
        return rates

    def victim_rates(self, n: BlockState | np.ndarray) -> np.ndarray:
        """
        Total rate at which a block of each type disappears.

        Element j sums the rates of all channels whose victim is type j.
        Accepts a single state or states stacked along the first axis, shape (M, k).
        """
        if isinstance(n, BlockState) or np.ndim(n) == 1:
            return np.sum(self.channel_rates(n), axis=0)
        counts = np.asarray(n, dtype=np.float64)
        if counts.shape[-1] != self.k:
            raise ValueError(f"states have {counts.shape[-1]} types, rate matrix has {self.k}")
        diag = np.diag(self.entries)
        # column sums of the channel matrix, without forming it per state
        return counts * (counts @ self.entries) - diag * counts * (counts + 1) / 2

    def total_rate(self, n: BlockState | np.ndarray) -> float:
        """Total merger rate."""
        return float(np.sum(self.channel_rates(n)))


def _counts(n: BlockState | np.ndarray, k: int) -> np.ndarray:
    counts = n.counts if isinstance(n, BlockState) else n
    if counts.shape != (k,):
        raise ValueError(f"state has {counts.shape} types, rate matrix has {k}")
    # float64 keeps products finite for huge block counts
    return counts.astype(np.float64)


@dataclass(frozen=True, eq=False)
class PayoffMatrix:
    """
    Payoff matrix A of the replicator equation.
    """

    entries: Matrix
    derived: bool = True
    """
    Whether A was derived from a rate matrix.
    Direct matrices skip the sign check and turn ESS interior checks into warnings.
    """

    def __post_init__(self):
        m = _as_square(self.entries, "payoff matrix")
        if self.derived:
            assert np.all(m < 0), "payoff matrix derived from rates must be strictly negative"
        object.__setattr__(self, "entries", m)

    @classmethod
    def direct(cls, entries: Iterable[Iterable[float]] | np.ndarray) -> "PayoffMatrix":
        """Payoff matrix supplied directly rather than derived from rates."""
        return cls(np.array(entries, dtype=np.float64), derived=False)

    @property
    def k(self) -> int:
        """Number of types."""
        return self.entries.shape[0]


def payoff_from_rates(C: RateMatrix) -> PayoffMatrix:
    """
    Derive the payoff matrix from merger rates.

    ``A[i, j] = -C[j, i]`` off the diagonal and ``A[i, i] = -C[i, i] / 2``.
    """
    a = -C.entries.T.copy()
    np.fill_diagonal(a, -np.diag(C.entries) / 2)
    return PayoffMatrix(a)


def channel_rate(C: RateMatrix, n: BlockState, ch: MergeChannel) -> float:
    """
    Rate of a single merger channel.

    Raises:
        IndexError: type index out of range.
    """
    i, j = ch
    if not (0 <= i < C.k and 0 <= j < C.k):
        raise IndexError(f"channel {ch} out of range for k={C.k}")
    ni, nj = float(n.counts[i]), float(n.counts[j])
    if i == j:
        return float(C.entries[i, i]) * ni * (ni - 1) / 2
    return float(C.entries[i, j]) * ni * nj


def channel_rates(C: RateMatrix, n: BlockState) -> Matrix:
    """Rate of every merger channel, see :meth:`RateMatrix.channel_rates`."""
    return C.channel_rates(n)


def victim_rates(C: RateMatrix, n: BlockState) -> np.ndarray:
    """Per-type removal rates, see :meth:`RateMatrix.victim_rates`."""
    return C.victim_rates(n)


def total_rate(n: BlockState, C: RateMatrix) -> float:
    """
    Total merger rate in state ``n``; zero exactly when a single block remains.
    """
    return C.total_rate(n)


def total_rate_payoff_form(n: BlockState | np.ndarray, A: PayoffMatrix) -> float:
    """
    Total merger rate expressed through a derived payoff matrix:
    ``sum_i n_i A[i, i] - n_i (A n)_i``.
    """
    counts = (n.counts if isinstance(n, BlockState) else n).astype(np.float64)
    a = A.entries
    return float(np.dot(counts, np.diag(a)) - counts @ a @ counts)


def rate_bounds[T: (float, np.ndarray)](C: RateMatrix, sigma: T) -> tuple[T, T]:
    """
    Kingman-type comparison bounds on the total rate at block count ``sigma``.

    Returns:
        * lower: ``c_min * binom(sigma, 2) - (c_diag_max - c_min) / 2 * sigma``.
        * upper: ``2 * c_max * binom(sigma, 2)``; each unordered cross-type pair merges through two channels.
    """
    pairs = sigma * (sigma - 1) / 2
    lower = C.c_min * pairs - (C.c_diag_max - C.c_min) / 2 * sigma
    upper = 2 * C.c_max * pairs
    return lower, upper


def check_rate_bounds(C: RateMatrix, n: BlockState | np.ndarray) -> float:
    """
    Assert that the total rate in ``n`` lies within :func:`rate_bounds`.

    Returns: Total rate.
    """
    counts = n.counts if isinstance(n, BlockState) else n
    lam = C.total_rate(counts)
    lower, upper = rate_bounds(C, float(np.sum(counts)))
    tol = ATOL * max(1.0, upper)
    assert lower - tol <= lam <= upper + tol, f"total rate {lam} outside [{lower}, {upper}]"
    return lam
