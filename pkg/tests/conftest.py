from collections.abc import Callable

import numpy as np
import pytest

from replicoal.analysis import RunningMoments
from replicoal.models.core import BlockState, RateMatrix
from replicoal.simulator import StopCriterion, Trajectory, run_ensemble, simulate_exact, state_at_hitting

type RateFactory = Callable[[int, np.random.Generator], RateMatrix]
type Simulation = Callable[[np.random.Generator], Trajectory]
type LevelSampler = Callable[[Simulation, int, int, int], RunningMoments]

CIRCULANT_ROW = [4.0, 0.2, 0.1]


def _strongly_diagonal(k: int, gen: np.random.Generator) -> RateMatrix:
    # symmetric part of the payoff matrix is negative definite, so the interior fixed point is stable
    c = gen.uniform(0.1, 1.0, (k, k))
    np.fill_diagonal(c, gen.uniform(2 * k, 3 * k, k))
    return RateMatrix(c)


def _frequencies_at_level(simulate: Simulation, m: int, n_runs: int, seed: int) -> RunningMoments:
    def one(i: int, gen: np.random.Generator) -> np.ndarray:
        r = state_at_hitting(simulate(gen), m)
        assert r is not None, f"run {i} never reached {m} blocks"
        return r

    return RunningMoments.of(np.array(run_ensemble(one, n_runs, seed)))


@pytest.fixture
def strongly_diagonal() -> RateFactory:
    """Random rate matrices with diagonal in [2k, 3k] and off-diagonal entries in [0.1, 1]."""
    return _strongly_diagonal


@pytest.fixture
def circulant3() -> RateMatrix:
    """Three types, stable interior fixed point at the barycenter."""
    return RateMatrix.circulant(CIRCULANT_ROW)


@pytest.fixture
def ones2() -> RateMatrix:
    return RateMatrix.uniform(2)


@pytest.fixture
def frequencies_at_level() -> LevelSampler:
    """Moments of the frequencies at the first visit to level ``m``, over seeded runs of a simulation."""
    return _frequencies_at_level


def _exact_reference(n0: BlockState, n_runs: int, seed: int) -> tuple[BlockState, RunningMoments]:
    C = RateMatrix.circulant(CIRCULANT_ROW)
    stop = StopCriterion.hit_sigma(100)
    return n0, _frequencies_at_level(lambda gen: simulate_exact(C, n0, stop, gen), 100, n_runs, seed)


@pytest.fixture(scope="session")
def exact_at_100() -> tuple[BlockState, RunningMoments]:
    """Start (1500, 900, 600) and frequencies at 100 blocks over 200 exact runs, ``circulant3`` rates."""
    return _exact_reference(BlockState.of(1500, 900, 600), 200, 2024)


@pytest.fixture(scope="session")
def exact_at_100_large() -> tuple[BlockState, RunningMoments]:
    """Start (5000, 3000, 2000) and frequencies at 100 blocks over 500 exact runs, ``circulant3`` rates."""
    return _exact_reference(BlockState.of(5000, 3000, 2000), 500, 2025)
