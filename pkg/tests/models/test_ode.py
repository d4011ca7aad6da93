import numpy as np
import pytest

from replicoal.models.core import PayoffMatrix, RateMatrix, payoff_from_rates, vertex
from replicoal.models.replicator import converge_to_ess, ess_fixed_point, integrate, mild_residual, replicator_rhs


def test_replicator_rhs(circulant3: RateMatrix):
    A = payoff_from_rates(circulant3)
    x = np.array([0.5, 0.3, 0.2])
    dx = replicator_rhs(A, x)
    assert float(np.sum(dx)) == pytest.approx(0.0, abs=1e-15)
    ax = A.entries @ x
    assert dx == pytest.approx(x * (ax - x @ ax))

    assert replicator_rhs(A, vertex(3, 0)) == pytest.approx(np.zeros(3))
    assert replicator_rhs(A, np.full(3, 1 / 3)) == pytest.approx(np.zeros(3), abs=1e-15)
    with pytest.raises(ValueError):
        replicator_rhs(A, np.array([0.5, 0.5]))


def test_integrate_grid(circulant3: RateMatrix):
    A = payoff_from_rates(circulant3)
    x0 = np.array([0.6, 0.3, 0.1])
    path = integrate(A, x0, 1.0, 0.3)
    assert path.grid == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])
    assert path.grid[-1] == 1.0
    assert path.points[0] == pytest.approx(x0)
    assert np.sum(path.points, axis=1) == pytest.approx(np.ones(5))

    thinned = integrate(A, x0, 1.0, 0.3, record_every=2)
    assert thinned.grid == pytest.approx([0.0, 0.6, 1.0])
    assert thinned.final == pytest.approx(path.final)

    assert path.at(0.3) == pytest.approx(path.points[1])
    assert path.at(np.array([0.0, 1.0])).shape == (2, 3)

    empty = integrate(A, x0, 0.0, 0.1)
    assert empty.grid.tolist() == [0.0]

    with pytest.raises(ValueError):
        integrate(A, x0, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(A, x0, -1.0, 0.1)
    with pytest.raises(ValueError):
        integrate(A, x0, 1.0, 0.1, record_every=0)


def test_integrate_step_halving(circulant3: RateMatrix):
    A = payoff_from_rates(circulant3)
    x0 = np.array([0.7, 0.2, 0.1])
    coarse = integrate(A, x0, 5.0, 0.01)
    fine = integrate(A, x0, 5.0, 0.005)
    assert float(np.max(np.abs(coarse.final - fine.final))) < 1e-8


def test_mild_residual(circulant3: RateMatrix):
    A = payoff_from_rates(circulant3)
    path = integrate(A, np.array([0.2, 0.2, 0.6]), 5.0, 1e-3)
    assert mild_residual(A, path) < 1e-6


@pytest.mark.parametrize("k", [2, 3, 4])
def test_converge_to_ess(k: int, strongly_diagonal):
    gen = np.random.default_rng(100 + k)
    for _ in range(4):
        A = payoff_from_rates(strongly_diagonal(k, gen))
        x_star = ess_fixed_point(A).x_star
        x0 = gen.dirichlet(np.ones(k))
        conv = converge_to_ess(A, x0, x_star, step=0.05)
        assert conv.converged
        assert conv.distance < 1e-6
        assert conv.x_final == pytest.approx(x_star, abs=1e-6)


def test_converge_gives_up():
    # rock-paper-scissors cycles never approach the center
    A = PayoffMatrix.direct([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
    conv = converge_to_ess(A, np.array([0.5, 0.3, 0.2]), np.full(3, 1 / 3), step=0.05, t_start=5.0, t_max=40.0)
    assert not conv.converged
    assert conv.horizon == 40.0
    assert conv.distance > 1e-3
