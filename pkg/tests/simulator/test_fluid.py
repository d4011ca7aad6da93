import math

import numpy as np
import pytest

from replicoal.models.core import PayoffMatrix, RateMatrix, payoff_from_rates
from replicoal.models.replicator import integrate
from replicoal.simulator import FluidState, StopCriterion, integrate_fluid, simulate_fluid
from replicoal.simulator.fluid import fluid_payoff


def test_fluid_state():
    f = FluidState(1234.5, np.array([0.25, 0.75]))
    assert f.sigma == 1234.5
    with pytest.raises(ValueError):
        FluidState(0.0, np.array([1.0]))
    with pytest.raises(AssertionError):
        FluidState(10.0, np.array([0.5, 0.6]))


def test_fluid_kingman():
    # one type: d sigma / dt = -sigma (sigma - 1) / 2
    path = simulate_fluid(RateMatrix.uniform(1), FluidState(1e5, np.array([1.0])), StopCriterion.hit_sigma(1000))
    assert path.stop_reason == "hit_sigma"
    assert path.sigma[-1] == pytest.approx(1000, rel=1e-12)
    expected = 2 * (math.log(1 - 1 / 1e5) - math.log(1 - 1 / 1000))
    assert path.end_time == pytest.approx(expected, rel=1e-6)

    assert np.all(np.diff(path.sigma) < 0)
    assert np.all(np.diff(path.t) > 0)
    assert np.all(np.diff(path.tau) > 0)
    assert path.alpha.shape == (path.t.size, 2)
    assert path.alpha[0].tolist() == [0.0, 0.0]

    assert path.time_at_sigma(path.sigma[0]) == 0.0
    assert 0 < path.time_at_sigma(1001) < path.end_time
    assert path.time_at_sigma(500) is None
    assert path.time_at_sigma(2e5) is None
    assert path.r_at_sigma(5000).tolist() == [1.0]


def test_fluid_follows_replicator(circulant3: RateMatrix):
    r0 = np.array([0.6, 0.3, 0.1])
    path = simulate_fluid(circulant3, FluidState(1e7, r0), StopCriterion.hit_sigma(100_000))
    assert np.sum(path.r, axis=1) == pytest.approx(np.ones(path.t.size))
    assert np.all(path.r >= 0)

    ode = integrate(payoff_from_rates(circulant3), r0, float(path.tau[-1]), 0.01)
    assert float(np.sum(np.abs(path.r[-1] - ode.final))) < 1e-3


@pytest.mark.parametrize("r0", [[0.8, 0.1, 0.1], [0.1, 0.1, 0.8], [0.45, 0.45, 0.1], [0.2, 0.5, 0.3]])
def test_fluid_follows_replicator_from_huge_start(circulant3: RateMatrix, r0: list[float]):
    x0 = np.array(r0)
    path = simulate_fluid(circulant3, FluidState(1e15, x0), StopCriterion.hit_sigma(10**6))
    assert path.stop_reason == "hit_sigma"
    assert path.sigma[-1] == pytest.approx(1e6)

    ode = integrate(payoff_from_rates(circulant3), x0, float(path.tau[-1]), 0.01)
    gap = np.sum(np.abs(path.r - ode.at(path.tau)), axis=1)
    assert float(np.max(gap)) < 1e-2


def test_fluid_stops(circulant3: RateMatrix):
    r0 = np.array([0.6, 0.3, 0.1])
    path = simulate_fluid(circulant3, FluidState(1e5, r0), StopCriterion.max_time(1e-4))
    assert path.stop_reason == "max_time"
    assert path.end_time == 1e-4
    assert path.sigma[-1] < 1e5

    path = simulate_fluid(RateMatrix.uniform(1), FluidState(1e4, np.array([1.0])), StopCriterion.absorb())
    assert path.stop_reason == "degenerate"
    assert path.sigma[-1] == pytest.approx(2.0)

    path = simulate_fluid(circulant3, FluidState(1000.0, r0), StopCriterion.hit_sigma(2000))
    assert path.stop_reason == "unreachable"
    assert path.t.tolist() == [0.0]

    path = integrate_fluid(circulant3, FluidState(1e5, r0), sigma_stop=100, horizon=0.0)
    assert path.stop_reason == "max_time"
    assert path.end_time == 0.0

    with pytest.raises(ValueError):
        integrate_fluid(circulant3, FluidState(1e5, r0), sigma_stop=100, step=0.0)
    with pytest.raises(ValueError):
        integrate_fluid(circulant3, FluidState(1e5, np.array([0.5, 0.5])), sigma_stop=100)


def test_fluid_payoff():
    C = RateMatrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert fluid_payoff(C).tolist() == [[-0.5, -3.0], [-2.0, -2.0]]

    shifted = fluid_payoff(PayoffMatrix.direct([[1.0, 2.0], [3.0, 4.0]]))
    assert shifted.tolist() == [[-4.0, -3.0], [-2.0, -1.0]]

    negative = PayoffMatrix.direct([[-1.0, -2.0], [-2.0, -1.0]])
    assert fluid_payoff(negative).tolist() == negative.entries.tolist()

    path = simulate_fluid(negative, FluidState(1e5, np.array([0.5, 0.5])), StopCriterion.hit_sigma(100))
    assert path.stop_reason == "hit_sigma"
