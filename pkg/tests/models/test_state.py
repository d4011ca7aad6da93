import numpy as np
import pytest

from replicoal.models.core import (
    BlockState,
    MergeChannel,
    apply_channel,
    build_simplex_point,
    check_simplex,
    largest_remainder_round,
    vertex,
)


def test_block_state():
    n = BlockState.of(2, 1)
    assert n.k == 2
    assert n.sigma == 3
    assert n.r == pytest.approx([2 / 3, 1 / 3])
    assert n.key == (2, 1)
    assert n == BlockState(np.array([2, 1]))
    assert hash(n) == hash(BlockState.of(2, 1))
    assert n != BlockState.of(1, 2)
    assert repr(n) == "BlockState(2, 1)"

    with pytest.raises(ValueError):
        n.counts[0] = 5


@pytest.mark.parametrize("counts", [[], [-1, 2], [0, 0], [[1, 2]]])
def test_block_state_invalid(counts):
    with pytest.raises(ValueError):
        BlockState(np.array(counts, dtype=np.int64))


def test_simplex_helpers():
    assert check_simplex(np.array([0.25, 0.75]), 2) is not None
    with pytest.raises(AssertionError):
        check_simplex(np.array([0.5, 0.6]))
    with pytest.raises(AssertionError):
        check_simplex(np.array([0.0, 1.0]), interior=True)

    assert build_simplex_point([1, 3]) == pytest.approx([0.25, 0.75])
    with pytest.raises(ValueError):
        build_simplex_point([1, -1])
    with pytest.raises(ValueError):
        build_simplex_point([0, 0])

    assert vertex(3, 1).tolist() == [0.0, 1.0, 0.0]


def test_largest_remainder_round():
    assert largest_remainder_round(10, np.array([1 / 3, 1 / 3, 1 / 3])).tolist() == [4, 3, 3]
    assert largest_remainder_round(5, np.array([0.5, 0.5])).tolist() == [3, 2]
    assert largest_remainder_round(7, np.array([0.0, 1.0])).tolist() == [0, 7]
    assert largest_remainder_round(10, np.array([0.1, 0.45, 0.45])).tolist() == [1, 5, 4]

    gen = np.random.default_rng(11)
    for _ in range(200):
        k = int(gen.integers(1, 7))
        sigma = int(gen.integers(1, 10**6))
        r = gen.dirichlet(np.ones(k))
        n = largest_remainder_round(sigma, r)
        assert int(np.sum(n)) == sigma
        assert np.all(np.abs(n - sigma * r) < 1)

    huge = largest_remainder_round(10**15, np.array([0.2, 0.3, 0.5]))
    assert int(np.sum(huge)) == 10**15

    with pytest.raises(ValueError):
        largest_remainder_round(0, np.array([1.0]))


def test_apply_channel():
    n = BlockState.of(2, 1)
    assert apply_channel(n, MergeChannel(0, 1)) == BlockState.of(2, 0)
    assert apply_channel(n, MergeChannel(1, 0)) == BlockState.of(1, 1)
    assert apply_channel(n, MergeChannel(0, 0)) == BlockState.of(1, 1)
    assert n == BlockState.of(2, 1)

    with pytest.raises(ValueError):
        apply_channel(n, MergeChannel(1, 1))
    with pytest.raises(IndexError):
        apply_channel(n, MergeChannel(0, 2))
