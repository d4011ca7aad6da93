import numpy as np

from replicoal.models.core import BlockState, SimplexPoint
from replicoal.simulator.trajectory import Trajectory


def _record_at(traj: Trajectory, m: int) -> int | None:
    if m > traj.sigmas[0]:
        return None
    # exact records step down by one, so the first record at or below m is the hit;
    # leap and thinned records may step over m, the first record below it stands in.
    idx = int(np.argmax(traj.sigmas <= m))
    if traj.sigmas[idx] > m:
        return None
    return idx


def hitting_time(traj: Trajectory, m: int) -> float | None:
    """
    First time the block count equals ``m``.

    Returns:
        * Hitting time, interpolated in ``log(sigma)`` within a continuum prefix.
        * None if the trajectory never reached ``m``: it started below or stopped above.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    if traj.fluid is not None and m > traj.sigmas[0]:
        return traj.fluid.time_at_sigma(m)
    idx = _record_at(traj, m)
    return None if idx is None else float(traj.times[idx])


def state_at_hitting(traj: Trajectory, m: int) -> SimplexPoint | None:
    """
    Type frequencies at the first time the block count equals ``m``, None if never reached.
    """
    if traj.fluid is not None and m > traj.sigmas[0]:
        return traj.fluid.r_at_sigma(m)
    idx = _record_at(traj, m)
    return None if idx is None else traj.counts[idx] / traj.sigmas[idx]


def block_state_at_hitting(traj: Trajectory, m: int) -> BlockState | None:
    """
    Integer state at the first time the block count equals ``m``, None if never reached
    or if ``m`` lies in the continuum prefix.
    """
    idx = _record_at(traj, m)
    return None if idx is None else BlockState(traj.counts[idx])
