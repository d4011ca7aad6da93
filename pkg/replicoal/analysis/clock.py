from dataclasses import dataclass

import numpy as np

from replicoal.simulator import Trajectory
from replicoal.utils import json_encodable


@json_encodable
@dataclass(frozen=True)
class ClockFunction:
    """
    Clock ``t -> int_0^t sigma(u) du`` of a trajectory, continuous and piecewise linear.

    The right inverse of the clock is the time change: clock time ``s`` maps to the real time
    at which the accumulated block count first exceeds ``s``.
    """

    breakpoints: np.ndarray
    """Real times where the slope changes, shape (M+1,)."""
    values: np.ndarray
    """Clock at each breakpoint, shape (M+1,)."""
    slopes: np.ndarray
    """Block count held on each segment, shape (M,)."""
    absorbed: bool
    """Whether a single block remains after the last breakpoint, so the clock continues with slope 1."""

    @property
    def total(self) -> float:
        """Clock mass accumulated up to the end of the trajectory."""
        return float(self.values[-1])

    @property
    def end(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        """
        Evaluate the clock at real time(s) ``t``.
        Times after the end are NaN unless the trajectory was absorbed.
        """
        t = np.asarray(t, dtype=np.float64)
        out = np.interp(t, self.breakpoints, self.values)
        after = t > self.end
        out = np.where(after, self.total + (t - self.end) if self.absorbed else np.nan, out)
        return np.where(t < 0, np.nan, out)

    def inverse(self, s: np.ndarray | float) -> np.ndarray:
        """
        Time change: real time at which the clock reaches ``s``.
        Clock times beyond the total mass are NaN unless the trajectory was absorbed.
        """
        s = np.asarray(s, dtype=np.float64)
        out = np.interp(s, self.values, self.breakpoints)
        after = s > self.total
        out = np.where(after, self.end + (s - self.total) if self.absorbed else np.nan, out)
        return np.where(s < 0, np.nan, out)


def clock(traj: Trajectory) -> ClockFunction:
    """
    Build the clock of ``traj`` by accumulating the block count over holding intervals.

    Within a continuum prefix, the clock integrated alongside the path is used.
    """
    bounds = np.append(traj.times, traj.end_time)
    lengths = np.diff(bounds)
    keep = lengths > 0
    slopes = traj.sigmas[keep].astype(np.float64)
    starts = traj.times[keep]
    increments = slopes * lengths[keep]

    if traj.fluid is not None:
        f = traj.fluid
        fb = f.t
        fv = f.tau
        fs = np.diff(fv) / np.where(np.diff(fb) > 0, np.diff(fb), 1.0)
        offset = float(fv[-1])
    else:
        fb = np.array([traj.times[0]])
        fv = np.array([0.0])
        fs = np.empty(0)
        offset = 0.0

    values = offset + np.cumsum(increments)
    breakpoints = np.concatenate([fb, starts[1:] if starts.size else starts, [traj.end_time] if starts.size else []])
    values = np.concatenate([fv, values])
    slopes = np.concatenate([fs, slopes])
    assert breakpoints.size == values.size == slopes.size + 1
    return ClockFunction(
        breakpoints=breakpoints,
        values=values,
        slopes=slopes,
        absorbed=traj.stop_reason == "absorbed",
    )


@json_encodable
@dataclass(frozen=True)
class TimeChangedPath:
    """
    Type frequencies read through the time change, ``R(s) = r(tau(s))``.
    """

    grid: np.ndarray
    """Clock times, shape (G,)."""
    tau: np.ndarray
    """Real time for each clock time, shape (G,), NaN out of range."""
    R: np.ndarray
    """Type frequencies, shape (G, k), NaN out of range."""
    in_range: np.ndarray
    """Whether each clock time lies below the total clock mass, shape (G,)."""


def frequencies_at(traj: Trajectory, t: np.ndarray) -> np.ndarray:
    """
    Type frequencies at real times ``t`` (right-continuous), shape (len(t), k).
    Times outside ``[0, end_time]`` give NaN.
    """
    t = np.asarray(t, dtype=np.float64)
    out = np.full((t.size, traj.k), np.nan)
    valid = (t >= 0) & (t <= traj.end_time)
    discrete = valid & (t >= traj.times[0])
    if np.any(discrete):
        idx = np.searchsorted(traj.times, t[discrete], side="right") - 1
        out[discrete] = traj.counts[idx] / traj.sigmas[idx, None]
    continuum = valid & ~discrete
    if traj.fluid is not None and np.any(continuum):
        f = traj.fluid
        r = np.stack([np.interp(t[continuum], f.t, f.r[:, i]) for i in range(traj.k)], axis=1)
        out[continuum] = r / np.sum(r, axis=1, keepdims=True)
    return out


def time_change(traj: Trajectory, grid: np.ndarray) -> TimeChangedPath:
    """
    Evaluate ``R(s) = r(tau(s))`` on clock times ``grid``.

    Clock times at or beyond the total clock mass are flagged out of range, not extrapolated.
    """
    grid = np.asarray(grid, dtype=np.float64)
    c = clock(traj)
    in_range = (grid >= 0) & (grid < c.total)
    tau = np.where(in_range, c.inverse(np.where(in_range, grid, 0.0)), np.nan)
    R = np.full((grid.size, traj.k), np.nan)
    if np.any(in_range):
        R[in_range] = frequencies_at(traj, tau[in_range])
    return TimeChangedPath(grid=grid, tau=tau, R=R, in_range=in_range)
