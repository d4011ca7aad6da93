import numpy as np
import pytest

from replicoal.models.core import (
    BlockState,
    MergeChannel,
    PayoffMatrix,
    RateMatrix,
    apply_channel,
    channel_rate,
    check_rate_bounds,
    payoff_from_rates,
    rate_bounds,
    total_rate,
    total_rate_payoff_form,
    victim_rates,
)


def test_rate_matrix():
    C = RateMatrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert C.k == 2
    assert C.c_min == 1.0
    assert C.c_max == 4.0
    assert C.c_diag_max == 4.0
    with pytest.raises(ValueError):
        C.entries[0, 0] = 5.0

    assert RateMatrix.circulant([3.0, 1.0, 2.0]).entries.tolist() == [[3, 1, 2], [2, 3, 1], [1, 2, 3]]
    assert RateMatrix.uniform(2, 0.5).entries.tolist() == [[0.5, 0.5], [0.5, 0.5]]


@pytest.mark.parametrize(
    "entries",
    [
        [[1.0, 0.0], [1.0, 1.0]],
        [[1.0, -1.0], [1.0, 1.0]],
        [[1.0, 1.0]],
        [[1.0, np.nan], [1.0, 1.0]],
        [],
    ],
)
def test_rate_matrix_invalid(entries):
    with pytest.raises(ValueError):
        RateMatrix(np.array(entries))


def test_payoff_from_rates():
    A = payoff_from_rates(RateMatrix(np.array([[1.0, 2.0], [3.0, 4.0]])))
    assert A.derived
    assert A.entries.tolist() == [[-0.5, -3.0], [-2.0, -2.0]]

    with pytest.raises(AssertionError):
        PayoffMatrix(np.array([[-1.0, 0.0], [-1.0, -1.0]]))
    direct = PayoffMatrix.direct([[1.0, 0.0], [0.0, 1.0]])
    assert not direct.derived


def test_channel_rates():
    C = RateMatrix.uniform(2)
    n = BlockState.of(2, 1)
    assert channel_rate(C, n, MergeChannel(0, 0)) == 1.0
    assert channel_rate(C, n, MergeChannel(0, 1)) == 2.0
    assert channel_rate(C, n, MergeChannel(1, 0)) == 2.0
    assert channel_rate(C, n, MergeChannel(1, 1)) == 0.0
    with pytest.raises(IndexError):
        channel_rate(C, n, MergeChannel(2, 0))

    assert victim_rates(C, n).tolist() == [3.0, 2.0]
    lam = total_rate(n, C)
    assert lam == 5.0

    # removing a type-0 block leads to (1, 1), removing a type-1 block leads to (2, 0)
    d = victim_rates(C, n)
    assert d[0] / lam == pytest.approx(3 / 5)
    assert d[1] / lam == pytest.approx(2 / 5)
    assert apply_channel(n, MergeChannel(1, 0)) == BlockState.of(1, 1)
    assert apply_channel(n, MergeChannel(0, 1)) == BlockState.of(2, 0)

    assert total_rate(BlockState.of(0, 1), C) == 0.0
    assert rate_bounds(C, 3.0) == (3.0, 6.0)


def test_victim_rates_stacked():
    gen = np.random.default_rng(3)
    C = RateMatrix(gen.uniform(0.1, 5.0, (3, 3)))
    states = gen.integers(0, 20, (50, 3))
    states[:, 0] += 1
    stacked = C.victim_rates(states)
    for n, d in zip(states, stacked):
        assert d == pytest.approx(C.victim_rates(BlockState(n)))


def test_rate_identity():
    gen = np.random.default_rng(7)
    for _ in range(1000):
        k = int(gen.integers(1, 7))
        C = RateMatrix(gen.uniform(0.01, 10.0, (k, k)))
        sigma = int(gen.integers(1, 10_001))
        n = BlockState(gen.multinomial(sigma, gen.dirichlet(np.ones(k))))

        lam = total_rate(n, C)
        direct = sum(channel_rate(C, n, MergeChannel(i, j)) for i in range(k) for j in range(k))
        assert lam == pytest.approx(direct, rel=1e-9, abs=1e-12)
        assert total_rate_payoff_form(n, payoff_from_rates(C)) == pytest.approx(lam, rel=1e-9, abs=1e-9)
        assert float(np.sum(victim_rates(C, n))) == pytest.approx(lam, rel=1e-9, abs=1e-12)
        check_rate_bounds(C, n)


def test_rate_bounds_vectorized():
    C = RateMatrix(np.array([[1.0, 2.0], [0.5, 3.0]]))
    sigma = np.array([2.0, 10.0, 100.0])
    lower, upper = rate_bounds(C, sigma)
    assert lower.shape == upper.shape == (3,)
    assert np.all(lower <= upper)
    assert upper.tolist() == pytest.approx((2 * 3.0 * sigma * (sigma - 1) / 2).tolist())
