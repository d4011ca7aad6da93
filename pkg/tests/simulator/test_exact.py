import numpy as np
import pytest

from replicoal.models.core import BlockState, MergeChannel, RateMatrix, apply_channel
from replicoal.simulator import LEAP, StopCriterion, simulate_exact


def check_exact_records(traj):
    assert np.all(np.diff(traj.times) > 0)
    assert np.all(np.diff(traj.sigmas) == -1)
    for a, b, (i, j) in zip(traj.counts[:-1], traj.counts[1:], traj.channels):
        assert apply_channel(BlockState(a), MergeChannel(int(i), int(j))) == BlockState(b)


def test_stop_criterion():
    assert StopCriterion.hit_sigma(5).sigma_target == 5
    assert StopCriterion.hit_sigma(5).time_limit == np.inf
    assert StopCriterion.max_time(2.5).time_limit == 2.5
    assert StopCriterion.absorb().sigma_target == 1

    with pytest.raises(ValueError):
        StopCriterion.hit_sigma(0)
    with pytest.raises(ValueError):
        StopCriterion("hit_sigma", 2.5)
    with pytest.raises(ValueError):
        StopCriterion.max_time(-1.0)
    with pytest.raises(ValueError):
        StopCriterion("forever")  # type: ignore[arg-type]


def test_exact_absorb(circulant3: RateMatrix):
    n0 = BlockState.of(20, 15, 10)
    traj = simulate_exact(circulant3, n0, StopCriterion.absorb(), seed=1)
    assert traj.stop_reason == "absorbed"
    assert traj.final.sigma == 1
    assert traj.end_time == traj.times[-1]
    assert traj.n_events == 44
    assert traj.is_exact
    assert not traj.thinned
    assert len(traj.events) == 44
    check_exact_records(traj)

    again = simulate_exact(circulant3, n0, StopCriterion.absorb(), seed=1)
    assert np.array_equal(again.times, traj.times)
    assert np.array_equal(again.counts, traj.counts)


def test_exact_stops(circulant3: RateMatrix):
    n0 = BlockState.of(20, 15, 10)
    traj = simulate_exact(circulant3, n0, StopCriterion.hit_sigma(7), seed=2)
    assert traj.stop_reason == "hit_sigma"
    assert traj.final.sigma == 7
    assert traj.end_time == traj.times[-1]

    traj = simulate_exact(circulant3, n0, StopCriterion.max_time(0.01), seed=3)
    assert traj.stop_reason == "max_time"
    assert traj.end_time == 0.01
    assert traj.times[-1] < 0.01
    assert traj.state_at(0.01) == traj.final

    traj = simulate_exact(circulant3, n0, StopCriterion.hit_sigma(46), seed=4)
    assert traj.stop_reason == "unreachable"
    assert traj.times.tolist() == [0.0]

    traj = simulate_exact(circulant3, n0, StopCriterion.hit_sigma(45), seed=4)
    assert traj.stop_reason == "hit_sigma"
    assert traj.end_time == 0.0

    single = simulate_exact(circulant3, BlockState.of(0, 1, 0), StopCriterion.absorb(), seed=5)
    assert single.stop_reason == "absorbed"
    assert single.end_time == 0.0

    with pytest.raises(ValueError):
        simulate_exact(circulant3, BlockState.of(2, 2), StopCriterion.absorb())


def test_exact_first_jump():
    C = RateMatrix.uniform(2)
    n0 = BlockState.of(2, 1)
    gen = np.random.default_rng(17)
    n_runs = 10000
    to_11 = 0
    holding = np.empty(n_runs)
    for i in range(n_runs):
        traj = simulate_exact(C, n0, StopCriterion.hit_sigma(2), seed=gen)
        holding[i] = traj.end_time
        to_11 += traj.final == BlockState.of(1, 1)
    assert to_11 / n_runs == pytest.approx(0.6, abs=0.02)
    assert np.mean(holding) == pytest.approx(0.2, abs=0.01)


def test_exact_kingman_hitting_time():
    # one type: the block count is Kingman's coalescent
    C = RateMatrix.uniform(1)
    gen = np.random.default_rng(23)
    times = [simulate_exact(C, BlockState.of(100), StopCriterion.hit_sigma(10), seed=gen).end_time for _ in range(1000)]
    assert np.mean(times) == pytest.approx(2 * (1 / 10 - 1 / 100), abs=0.006)


def test_exact_thinning():
    C = RateMatrix.uniform(2)
    traj = simulate_exact(C, BlockState.of(300, 300), StopCriterion.absorb(), seed=6, record_sigma=100, snapshot_every=10)
    assert traj.thinned
    assert not traj.is_exact
    assert traj.n_events == 599
    steps = np.diff(traj.sigmas)
    upper = traj.sigmas[:-1] > 100
    assert np.all(steps[upper] == -10)
    assert np.all(steps[~upper] == -1)
    assert np.all(traj.channels[upper] == LEAP)
    assert np.all(traj.channels[~upper] != LEAP)
    assert 100 in traj.sigmas.tolist()
