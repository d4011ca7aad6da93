import numpy as np
import pytest

from replicoal.models.core import BlockState, RateMatrix
from replicoal.simulator import LEAP, FluidState, StopCriterion, fluid_prefix, simulate_hybrid, to_block_state


def test_to_block_state():
    n = to_block_state(FluidState(1234.4, np.array([0.5, 0.25, 0.25])))
    assert n.sigma == 1234
    assert n.key == (617, 309, 308)
    assert to_block_state(n) is n


def test_hybrid_fluid(circulant3: RateMatrix):
    start = BlockState.of(50000, 30000, 20000)
    traj = simulate_hybrid(circulant3, start, StopCriterion.hit_sigma(100), seed=11, switch_sigma=1000)
    assert traj.fluid is not None
    assert traj.fluid.stop_reason == "hit_sigma"
    assert traj.times[0] == traj.fluid.end_time
    assert traj.sigmas[0] == 1000
    assert traj.stop_reason == "hit_sigma"
    assert traj.final.sigma == 100
    assert traj.n_events == 100_000 - 100
    assert not traj.is_exact
    assert np.all(np.diff(traj.sigmas) == -1)

    t_mid = traj.fluid.end_time / 2
    assert 1000 < traj.sigma_at(t_mid) < 100_000
    assert float(np.sum(traj.r_at(t_mid))) == pytest.approx(1.0)


def test_hybrid_prefix_reuse(circulant3: RateMatrix):
    start = FluidState(1e5, np.array([0.5, 0.3, 0.2]))
    stop = StopCriterion.hit_sigma(500)
    prefix = fluid_prefix(circulant3, start, stop, switch_sigma=1000)
    a = simulate_hybrid(circulant3, start, stop, seed=12, switch_sigma=1000, prefix=prefix)
    b = simulate_hybrid(circulant3, start, stop, seed=12, switch_sigma=1000)
    assert a.fluid is prefix
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.times, b.times)


def test_hybrid_stops(circulant3: RateMatrix):
    start = BlockState.of(50000, 30000, 20000)

    traj = simulate_hybrid(circulant3, start, StopCriterion.max_time(1e-7), seed=13, switch_sigma=1000)
    assert traj.stop_reason == "max_time"
    assert traj.end_time == 1e-7
    assert traj.times.size == 1

    traj = simulate_hybrid(circulant3, start, StopCriterion.hit_sigma(5000), seed=13, switch_sigma=1000)
    assert traj.stop_reason == "hit_sigma"
    assert traj.final.sigma == 5000
    assert traj.times[-1] == traj.fluid.end_time

    small = BlockState.of(50, 30, 20)
    traj = simulate_hybrid(circulant3, small, StopCriterion.absorb(), seed=13, switch_sigma=1000)
    assert traj.fluid is None
    assert traj.is_exact
    assert traj.stop_reason == "absorbed"

    with pytest.raises(ValueError):
        simulate_hybrid(circulant3, small, StopCriterion.absorb(), switch_sigma=1)


def test_hybrid_tau_leap(circulant3: RateMatrix):
    start = BlockState.of(50000, 30000, 20000)
    traj = simulate_hybrid(circulant3, start, StopCriterion.hit_sigma(100), seed=14, switch_sigma=1000, upper="tau_leap")
    assert traj.fluid is None
    assert np.any(traj.channels[:, 0] == LEAP)
    assert traj.final.sigma == 100

    with pytest.raises(ValueError):
        simulate_hybrid(circulant3, start, StopCriterion.absorb(), upper="magic")  # type: ignore[arg-type]


def _hybrid_at_100(circulant3: RateMatrix, frequencies_at_level, n0: BlockState, n_runs: int, seed: int):
    stop = StopCriterion.hit_sigma(100)
    return frequencies_at_level(
        lambda gen: simulate_hybrid(circulant3, n0, stop, gen, switch_sigma=1000), 100, n_runs, seed
    )


def test_hybrid_matches_exact(circulant3: RateMatrix, frequencies_at_level, exact_at_100):
    n0, exact = exact_at_100
    hybrid = _hybrid_at_100(circulant3, frequencies_at_level, n0, 200, 21)
    tol = 4 * np.hypot(exact.stderr, hybrid.stderr)
    assert np.all(np.abs(hybrid.mean - exact.mean) <= tol)


@pytest.mark.slow
def test_hybrid_matches_exact_large(circulant3: RateMatrix, frequencies_at_level, exact_at_100_large):
    n0, exact = exact_at_100_large
    hybrid = _hybrid_at_100(circulant3, frequencies_at_level, n0, 500, 22)
    tol = 3 * np.hypot(exact.stderr, hybrid.stderr)
    assert np.all(np.abs(hybrid.mean - exact.mean) <= tol)


EDGE_STARTS = [
    [0.8, 0.1, 0.1],
    [0.1, 0.8, 0.1],
    [0.1, 0.1, 0.8],
    [0.45, 0.45, 0.1],
    [0.1, 0.45, 0.45],
    [0.45, 0.1, 0.45],
]


def test_hybrid_from_huge_start(circulant3: RateMatrix):
    star = np.full(3, 1 / 3)
    for i, r0 in enumerate(EDGE_STARTS):
        start = FluidState(1e15, np.array(r0))
        traj = simulate_hybrid(circulant3, start, StopCriterion.hit_sigma(2000), seed=i, switch_sigma=2000)
        assert traj.fluid is not None
        assert traj.final.sigma == 2000

        fluid = traj.fluid
        above = fluid.sigma >= 1000
        closest = float(np.min(np.sum(np.abs(fluid.r[above] - star), axis=1)))
        assert closest < 0.05, f"start {r0} stayed {closest:.3g} from the interior fixed point"
