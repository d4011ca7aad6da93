import numpy as np
import pytest

from replicoal.models.core import BlockState, MergeChannel, RateMatrix
from replicoal.simulator import (
    LEAP,
    StopCriterion,
    Trajectory,
    block_state_at_hitting,
    hitting_time,
    simulate_hybrid,
    state_at_hitting,
)


def build_trajectory(times: list[float], counts: list[list[int]], channels: list[list[int]], end_time: float) -> Trajectory:
    return Trajectory(
        initial=BlockState(np.array(counts[0])),
        times=np.array(times),
        counts=np.array(counts),
        channels=np.array(channels).reshape(-1, 2),
        end_time=end_time,
        stop_reason="absorbed",
    )


def test_hitting_exact():
    traj = build_trajectory([0.0, 1.0, 2.5, 4.0], [[2, 2], [2, 1], [1, 1], [1, 0]], [[0, 1], [1, 0], [0, 1]], 4.0)
    assert traj.is_exact
    assert traj.events == [(1.0, MergeChannel(0, 1)), (2.5, MergeChannel(1, 0)), (4.0, MergeChannel(0, 1))]

    assert hitting_time(traj, 4) == 0.0
    assert hitting_time(traj, 3) == 1.0
    assert hitting_time(traj, 2) == 2.5
    assert hitting_time(traj, 1) == 4.0
    assert hitting_time(traj, 5) is None
    with pytest.raises(ValueError):
        hitting_time(traj, 0)

    assert state_at_hitting(traj, 3) == pytest.approx([2 / 3, 1 / 3])
    assert block_state_at_hitting(traj, 2) == BlockState.of(1, 1)
    assert state_at_hitting(traj, 9) is None

    assert traj.state_at(1.5) == BlockState.of(2, 1)
    assert traj.state_at(2.5) == BlockState.of(1, 1)
    assert traj.sigma_at(0.5) == 4
    assert traj.r_at(3.0) == pytest.approx([0.5, 0.5])
    with pytest.raises(ValueError):
        traj.state_at(5.0)


def test_hitting_leaps():
    traj = build_trajectory([0.0, 1.0, 2.0], [[5, 5], [3, 2], [1, 1]], [[LEAP, LEAP], [LEAP, LEAP]], 2.0)
    assert not traj.is_exact
    assert traj.events == []
    assert hitting_time(traj, 7) == 1.0
    assert hitting_time(traj, 4) == 2.0
    assert block_state_at_hitting(traj, 4) == BlockState.of(1, 1)
    assert hitting_time(traj, 1) is None


def test_hitting_fluid_prefix(circulant3: RateMatrix):
    start = BlockState.of(50000, 30000, 20000)
    traj = simulate_hybrid(circulant3, start, StopCriterion.hit_sigma(100), seed=15, switch_sigma=1000)
    switch_time = traj.times[0]

    t_high = hitting_time(traj, 20000)
    t_low = hitting_time(traj, 5000)
    assert t_high is not None and t_low is not None
    assert 0 < t_high < t_low < switch_time
    assert hitting_time(traj, 1000) == switch_time

    r = state_at_hitting(traj, 5000)
    assert r is not None
    assert float(np.sum(r)) == pytest.approx(1.0)
    assert block_state_at_hitting(traj, 5000) is None
    assert block_state_at_hitting(traj, 500).sigma == 500
