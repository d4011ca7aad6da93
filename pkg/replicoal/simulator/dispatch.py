from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np

from replicoal.models.core import BlockState, PayoffMatrix, RateMatrix, largest_remainder_round
from replicoal.simulator.exact import DEFAULT_RECORD_SIGMA, DEFAULT_SNAPSHOT_EVERY, simulate_exact
from replicoal.simulator.fluid import DEFAULT_FLUID_STEP, simulate_fluid
from replicoal.simulator.hybrid import (
    DEFAULT_SWITCH_SIGMA,
    UPPER_METHODS,
    UpperMethod,
    fluid_prefix,
    simulate_hybrid,
    to_block_state,
)
from replicoal.simulator.tau_leap import simulate_tau_leap
from replicoal.simulator.trajectory import FluidPath, FluidState, Recorder, StopCriterion, Trajectory

type Method = Literal["exact", "tau_leap", "fluid", "hybrid"]
"""Simulation method."""

METHODS: tuple[Method, ...] = ("exact", "tau_leap", "fluid", "hybrid")


def fluid_trajectory(initial: BlockState, path: FluidPath) -> Trajectory:
    """Wrap a continuum path as a trajectory whose single record is the rounded end state."""
    end = BlockState(largest_remainder_round(max(1, round(path.sigma[-1])), path.r[-1]))
    rec = Recorder(end.counts, path.end_time, record_sigma=None, snapshot_every=1)
    return rec.build(initial, path.end_time, path.stop_reason, path)


@dataclass(frozen=True)
class SimulationPlan:
    """
    Simulation method and its tuning parameters.
    """

    model: RateMatrix | PayoffMatrix
    """Merger rates; a payoff matrix supplied directly is accepted by the "fluid" method only."""
    method: Method = "exact"
    switch_sigma: int = DEFAULT_SWITCH_SIGMA
    """Hybrid switch level; also the tau-leap floor."""
    upper: UpperMethod = "fluid"
    """How the hybrid method handles block counts above the switch."""
    eps: float = 0.03
    step: float = DEFAULT_FLUID_STEP
    record_sigma: int | None = DEFAULT_RECORD_SIGMA
    snapshot_every: int = DEFAULT_SNAPSHOT_EVERY

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method}")
        if self.upper not in UPPER_METHODS:
            raise ValueError(f"unknown upper method {self.upper}")
        if self.method != "fluid" and not isinstance(self.model, RateMatrix):
            raise ValueError(f"method {self.method} needs a rate matrix")

    def prepare(self, start: BlockState | FluidState, stop: StopCriterion) -> Callable[[np.random.Generator], Trajectory]:
        """
        Bind start state and stop criterion, doing deterministic work once.

        Returns:
            Function mapping a generator to a trajectory.
        """
        initial = to_block_state(start)
        match self.method:
            case "exact":
                C = self._rates()
                return lambda gen: simulate_exact(
                    C, initial, stop, gen, record_sigma=self.record_sigma, snapshot_every=self.snapshot_every
                )
            case "tau_leap":
                C = self._rates()
                return lambda gen: simulate_tau_leap(
                    C,
                    initial,
                    stop,
                    gen,
                    eps=self.eps,
                    sigma_floor=self.switch_sigma,
                    record_sigma=self.record_sigma,
                    snapshot_every=self.snapshot_every,
                )
            case "fluid":
                f0 = start if isinstance(start, FluidState) else FluidState.of(start)
                traj = fluid_trajectory(initial, simulate_fluid(self.model, f0, stop, self.step))
                return lambda gen: traj
            case "hybrid":
                C = self._rates()
                prefix = None
                if self.upper == "fluid" and initial.sigma > self.switch_sigma:
                    prefix = fluid_prefix(C, start, stop, switch_sigma=self.switch_sigma, step=self.step)
                return lambda gen: simulate_hybrid(
                    C,
                    start,
                    stop,
                    gen,
                    switch_sigma=self.switch_sigma,
                    upper=self.upper,
                    step=self.step,
                    eps=self.eps,
                    record_sigma=self.record_sigma,
                    snapshot_every=self.snapshot_every,
                    prefix=prefix,
                )

    def _rates(self) -> RateMatrix:
        assert isinstance(self.model, RateMatrix)
        return self.model
