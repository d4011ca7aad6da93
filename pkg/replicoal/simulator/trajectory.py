from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from replicoal.models.core import BlockState, MergeChannel, SimplexPoint, check_simplex
from replicoal.utils import json_encodable

type StopKind = Literal["hit_sigma", "max_time", "absorb"]

type StopReason = Literal["hit_sigma", "max_time", "absorbed", "unreachable", "degenerate"]
"""
Why a simulation ended.

* "hit_sigma" - block count reached the target level.
* "max_time" - time horizon reached.
* "absorbed" - a single block remains.
* "unreachable" - target level above the starting block count.
* "degenerate" - the continuum relaxation reached a block count below 2.
"""


@json_encodable
@dataclass(frozen=True)
class StopCriterion:
    """
    When a simulation stops.
    """

    kind: StopKind
    value: float = 0.0
    """Target block count for "hit_sigma", horizon for "max_time"."""

    def __post_init__(self):
        match self.kind:
            case "hit_sigma":
                if self.value < 1 or self.value != int(self.value):
                    raise ValueError(f"hit_sigma target must be an integer >= 1, got {self.value}")
            case "max_time":
                if not self.value >= 0:
                    raise ValueError(f"max_time horizon must be nonnegative, got {self.value}")
            case "absorb":
                pass
            case _:
                raise ValueError(f"unknown stop criterion {self.kind}")

    @classmethod
    def hit_sigma(cls, m: int) -> "StopCriterion":
        """Stop at the first time the block count equals ``m``."""
        return cls("hit_sigma", m)

    @classmethod
    def max_time(cls, t: float) -> "StopCriterion":
        """Stop at time ``t``."""
        return cls("max_time", t)

    @classmethod
    def absorb(cls) -> "StopCriterion":
        """Stop when a single block remains."""
        return cls("absorb")

    @property
    def sigma_target(self) -> int:
        """Block count at which the run stops, 1 unless ``kind`` is "hit_sigma"."""
        return int(self.value) if self.kind == "hit_sigma" else 1

    @property
    def time_limit(self) -> float:
        """Time at which the run stops, infinity unless ``kind`` is "max_time"."""
        return self.value if self.kind == "max_time" else np.inf


@dataclass(frozen=True)
class FluidState:
    """
    Continuum relaxation of a block state.
    """

    sigma: float
    """Continuum block count."""
    r: SimplexPoint

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        r = check_simplex(np.asarray(self.r, dtype=np.float64), atol=1e-9)
        object.__setattr__(self, "r", r / np.sum(r))

    @classmethod
    def of(cls, n: BlockState) -> "FluidState":
        return cls(float(n.sigma), n.r)


@json_encodable
@dataclass(frozen=True)
class FluidPath:
    """
    Deterministic continuum path, one row per integration step.
    """

    t: np.ndarray
    """Real time, shape (N,)."""
    tau: np.ndarray
    """Clock ``int_0^t sigma(u) du``, shape (N,)."""
    sigma: np.ndarray
    """Continuum block count, shape (N,)."""
    r: np.ndarray
    """Type frequencies, shape (N, k)."""
    alpha: np.ndarray
    """Integrated compensator of ``(r, 1/sigma)``, shape (N, k+1)."""
    stop_reason: StopReason

    @property
    def final(self) -> FluidState:
        return FluidState(float(self.sigma[-1]), self.r[-1])

    @property
    def end_time(self) -> float:
        return float(self.t[-1])

    def time_at_sigma(self, m: float) -> float | None:
        """
        Time at which the continuum block count equals ``m``, interpolated linearly in ``log(sigma)``.
        """
        if m > self.sigma[0] or m < self.sigma[-1]:
            return None
        # sigma is decreasing, np.interp wants increasing abscissae
        return float(np.interp(-np.log(m), -np.log(self.sigma), self.t))

    def r_at_sigma(self, m: float) -> SimplexPoint | None:
        """Type frequencies at block count ``m``."""
        if m > self.sigma[0] or m < self.sigma[-1]:
            return None
        ls = -np.log(self.sigma)
        r = np.array([np.interp(-np.log(m), ls, self.r[:, i]) for i in range(self.r.shape[1])])
        return r / np.sum(r)

    def _interp(self, t: float, column: np.ndarray) -> np.ndarray:
        if column.ndim == 1:
            return np.asarray(np.interp(t, self.t, column))
        return np.array([np.interp(t, self.t, column[:, i]) for i in range(column.shape[1])])


LEAP = -1
"""Channel marker for records that aggregate several mergers."""


@dataclass(frozen=True)
class Trajectory:
    """
    Piecewise-constant, right-continuous path of block states.

    Record ``i`` holds the state ``counts[i]`` entered at ``times[i]``.
    ``channels[i]`` is the merger that led from record ``i`` to record ``i+1``,
    or ``(LEAP, LEAP)`` when that step aggregates several mergers (tau-leaping or thinning).
    When ``fluid`` is present, it covers ``[0, times[0]]`` and the records start where it ends.
    """

    initial: BlockState
    times: np.ndarray
    """Record times, shape (N,), strictly increasing."""
    counts: np.ndarray
    """Block counts per record, shape (N, k)."""
    channels: np.ndarray
    """Merger per transition, shape (N-1, 2)."""
    end_time: float
    stop_reason: StopReason
    fluid: FluidPath | None = None
    thinned: bool = False
    """Whether records above some block count were thinned to snapshots."""
    sigmas: np.ndarray = field(init=False, repr=False)
    """Block count per record, shape (N,)."""

    def __post_init__(self):
        assert self.times.ndim == 1 and self.counts.shape == (self.times.size, self.initial.k)
        assert self.channels.shape == (max(self.times.size - 1, 0), 2)
        object.__setattr__(self, "sigmas", np.sum(self.counts, axis=1))

    @property
    def k(self) -> int:
        return self.initial.k

    @property
    def start_time(self) -> float:
        """Time of the first discrete record."""
        return float(self.times[0])

    @property
    def final(self) -> BlockState:
        return BlockState(self.counts[-1])

    @property
    def n_events(self) -> int:
        """Number of mergers over the whole run, including the continuum prefix."""
        return self.initial.sigma - int(self.sigmas[-1])

    @property
    def is_exact(self) -> bool:
        """Whether every transition is a single recorded merger and there is no continuum prefix."""
        return self.fluid is None and not np.any(self.channels == LEAP)

    @property
    def events(self) -> list[tuple[float, MergeChannel]]:
        """Individually recorded mergers as ``(time, channel)``."""
        mask = self.channels[:, 0] != LEAP
        return [
            (float(t), MergeChannel(int(i), int(j)))
            for t, (i, j) in zip(self.times[1:][mask], self.channels[mask])
        ]

    def _index_at(self, t: float) -> int:
        if t < self.times[0] or t > self.end_time:
            raise ValueError(f"time {t} outside the discrete part [{self.times[0]}, {self.end_time}]")
        return int(np.searchsorted(self.times, t, side="right")) - 1

    def state_at(self, t: float) -> BlockState:
        """
        Block state at time ``t`` in the discrete part of the trajectory.

        Raises:
            ValueError: ``t`` falls outside the discrete part.
        """
        return BlockState(self.counts[self._index_at(t)])

    def sigma_at(self, t: float) -> float:
        """Block count at time ``t``, continuum values in the fluid prefix."""
        if self.fluid is not None and t < self.times[0]:
            return float(np.exp(self.fluid._interp(t, np.log(self.fluid.sigma))))
        return float(self.sigmas[self._index_at(t)])

    def r_at(self, t: float) -> SimplexPoint:
        """Type frequencies at time ``t``."""
        if self.fluid is not None and t < self.times[0]:
            r = self.fluid._interp(t, self.fluid.r)
            return r / np.sum(r)
        i = self._index_at(t)
        return self.counts[i] / self.sigmas[i]


class Recorder:
    """
    Accumulates trajectory records, thinning them above ``record_sigma``.

    Above ``record_sigma`` only every ``snapshot_every``-th merger is recorded.
    """

    def __init__(self, counts: np.ndarray, t: float, *, record_sigma: int | None, snapshot_every: int):
        assert snapshot_every >= 1
        self.times: list[float] = [t]
        self.counts: list[np.ndarray] = [counts.copy()]
        self.channels: list[tuple[int, int]] = []
        self.record_sigma = record_sigma
        self.snapshot_every = snapshot_every
        self.thinned = False
        self._pending = 0
        self._pending_t = t
        self._pending_ch = (LEAP, LEAP)

    def event(self, t: float, counts: np.ndarray, i: int, j: int, sigma: int) -> None:
        """Record a single merger into state ``counts`` with block count ``sigma``, subject to thinning."""
        self._pending += 1
        self._pending_t = t
        self._pending_ch = (i, j)
        if self.record_sigma is not None and sigma > self.record_sigma and self._pending < self.snapshot_every:
            return
        self.flush(counts)

    def leap(self, t: float, counts: np.ndarray) -> None:
        """Record a state reached through several mergers."""
        self.flush(counts)
        self._append(t, counts, LEAP, LEAP)

    def flush(self, counts: np.ndarray) -> None:
        """Record mergers still held back by thinning; ``counts`` is the current state."""
        if self._pending == 0:
            return
        if self._pending > 1:
            self.thinned = True
            self._pending_ch = (LEAP, LEAP)
        self._append(self._pending_t, counts, *self._pending_ch)
        self._pending = 0

    def _append(self, t: float, counts: np.ndarray, i: int, j: int) -> None:
        self.times.append(t)
        self.counts.append(counts.copy())
        self.channels.append((i, j))

    def build(
        self, initial: BlockState, end_time: float, stop_reason: StopReason, fluid: FluidPath | None = None
    ) -> Trajectory:
        return Trajectory(
            initial=initial,
            times=np.array(self.times, dtype=np.float64),
            counts=np.array(self.counts, dtype=np.int64).reshape(len(self.counts), -1),
            channels=np.array(self.channels, dtype=np.int64).reshape(-1, 2),
            end_time=end_time,
            stop_reason=stop_reason,
            fluid=fluid,
            thinned=self.thinned,
        )
