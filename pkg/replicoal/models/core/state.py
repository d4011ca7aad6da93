from collections.abc import Iterable
from dataclasses import dataclass
from typing import NamedTuple, override

import numpy as np

ATOL = 1e-9
"""Default absolute tolerance for floating point comparisons."""

SIMPLEX_ATOL = 1e-12
"""Tolerance on the coordinate sum of a simplex point."""

type Counts = np.ndarray[tuple[int], np.dtype[np.int64]]
"""Type-count vector, shape is (k,)."""

type SimplexPoint = np.ndarray[tuple[int], np.dtype[np.float64]]
"""Probability vector over k types, shape is (k,)."""


def check_simplex(x: np.ndarray, k: int | None = None, *, interior=False, atol=SIMPLEX_ATOL) -> SimplexPoint:
    """
    Validate that ``x`` is a point of the probability simplex.

    Args:
        x: NDArray.
        k: expected number of types, or None to accept any.
        interior: if True, every coordinate must be strictly positive.
        atol: tolerance on the coordinate sum.

    Raises:
        AssertionError: ``x`` has wrong shape, a negative coordinate, or does not sum to 1.

    Returns: Validated input.
    """
    assert x.ndim == 1
    assert k is None or x.shape == (k,)
    assert abs(float(np.sum(x)) - 1.0) <= atol, f"simplex point sums to {np.sum(x)}"
    if interior:
        assert np.all(x > 0), "simplex point is not interior"
    else:
        assert np.all(x >= 0), "simplex point has a negative coordinate"
    return x


def build_simplex_point(input: Iterable[float], k: int | None = None, *, interior=False) -> SimplexPoint:
    """
    Build a simplex point from nonnegative weights.

    Args:
        input: k nonnegative weights, normalized to sum 1.
        k: expected number of types.
        interior: if True, every coordinate must be strictly positive.

    Raises:
        ValueError: weights are negative or all zero.
    """
    x = np.array(list(input), dtype=np.float64)
    if x.ndim != 1 or x.size == 0 or np.any(x < 0) or not np.any(x > 0):
        raise ValueError(f"invalid simplex weights {x}")
    x /= np.sum(x)
    return check_simplex(x, k, interior=interior)


def vertex(k: int, i: int) -> SimplexPoint:
    """Return the simplex vertex e_i."""
    x = np.zeros(k, dtype=np.float64)
    x[i] = 1.0
    return x


class MergeChannel(NamedTuple):
    """
    Merger of a ``victim`` block into a ``survivor`` block.

    Type indices are 0-based. ``survivor == victim`` is a within-type merger.
    """

    survivor: int
    victim: int


@dataclass(frozen=True, eq=False)
class BlockState:
    """
    Number of blocks of each type.
    """

    counts: Counts
    """Nonnegative integer count per type; the array is read-only."""

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size == 0:
            raise ValueError(f"block counts must be a non-empty vector, got shape {counts.shape}")
        if np.any(counts < 0):
            raise ValueError(f"block counts must be nonnegative, got {counts}")
        if int(np.sum(counts)) < 1:
            raise ValueError("block state must contain at least one block")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def of(cls, *counts: int) -> "BlockState":
        """Shorthand constructor, ``BlockState.of(2, 1)``."""
        return cls(np.array(counts, dtype=np.int64))

    @property
    def k(self) -> int:
        """Number of types."""
        return self.counts.size

    @property
    def sigma(self) -> int:
        """Total number of blocks."""
        return int(np.sum(self.counts))

    @property
    def r(self) -> SimplexPoint:
        """Type frequencies ``n / sigma``."""
        return self.counts / self.sigma

    @property
    def key(self) -> tuple[int, ...]:
        """Counts as a tuple, usable as a mapping key."""
        return tuple(int(v) for v in self.counts)

    @override
    def __eq__(self, other: object) -> bool:
        return isinstance(other, BlockState) and self.key == other.key

    @override
    def __hash__(self) -> int:
        return hash(self.key)

    @override
    def __repr__(self) -> str:
        return f"BlockState{self.key}"


def largest_remainder_round(sigma: int, r: np.ndarray) -> Counts:
    """
    Round ``sigma * r`` to nonnegative integers summing to exactly ``sigma``.

    Each type gets the floor of its share; the remaining blocks go to the largest
    fractional parts, ties broken by the lowest type index.

    Args:
        sigma: total block count, at least 1.
        r: simplex point.
    """
    if sigma < 1:
        raise ValueError(f"sigma must be at least 1, got {sigma}")
    r = np.clip(np.asarray(r, dtype=np.float64), 0.0, None)
    r /= np.sum(r)
    share = r * sigma
    base = np.floor(share).astype(np.int64)
    remaining = sigma - int(np.sum(base))
    if remaining > 0:
        frac = share - base
        # stable sort on negated fractions keeps lower indices first among ties
        order = np.argsort(-frac, kind="stable")
        base[order[:remaining]] += 1
    elif remaining < 0:  # floating point overshoot on huge sigma
        order = np.argsort(-base, kind="stable")
        base[order[:-remaining]] -= 1
    assert int(np.sum(base)) == sigma
    return base


def apply_channel(n: BlockState, ch: MergeChannel) -> BlockState:
    """
    Perform one merger.

    The victim block disappears, so the count of the victim type drops by one.

    Raises:
        IndexError: type index out of range.
        ValueError: required blocks are absent.
    """
    i, j = ch
    if not (0 <= i < n.k and 0 <= j < n.k):
        raise IndexError(f"channel {ch} out of range for k={n.k}")
    needed = 2 if i == j else 1
    if n.counts[j] < needed or n.counts[i] < 1:
        raise ValueError(f"channel {ch} infeasible in {n}")
    counts = n.counts.copy()
    counts[j] -= 1
    return BlockState(counts)
