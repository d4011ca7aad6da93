from replicoal.simulator.dispatch import METHODS, Method, SimulationPlan, fluid_trajectory
from replicoal.simulator.ensemble import resolve_threads, run_ensemble
from replicoal.simulator.exact import DEFAULT_RECORD_SIGMA, DEFAULT_SNAPSHOT_EVERY, simulate_exact
from replicoal.simulator.fluid import DEFAULT_FLUID_STEP, integrate_fluid, simulate_fluid
from replicoal.simulator.hitting import block_state_at_hitting, hitting_time, state_at_hitting
from replicoal.simulator.hybrid import (
    DEFAULT_SWITCH_SIGMA,
    UPPER_METHODS,
    UpperMethod,
    fluid_prefix,
    simulate_hybrid,
    to_block_state,
)
from replicoal.simulator.tau_leap import leap_means, leap_step, simulate_tau_leap
from replicoal.simulator.trajectory import LEAP, FluidPath, FluidState, StopCriterion, StopKind, StopReason, Trajectory

__all__ = [
    "block_state_at_hitting",
    "DEFAULT_FLUID_STEP",
    "DEFAULT_RECORD_SIGMA",
    "DEFAULT_SNAPSHOT_EVERY",
    "DEFAULT_SWITCH_SIGMA",
    "fluid_prefix",
    "fluid_trajectory",
    "FluidPath",
    "FluidState",
    "hitting_time",
    "integrate_fluid",
    "LEAP",
    "Method",
    "METHODS",
    "leap_means",
    "leap_step",
    "resolve_threads",
    "run_ensemble",
    "SimulationPlan",
    "simulate_exact",
    "simulate_fluid",
    "simulate_hybrid",
    "simulate_tau_leap",
    "state_at_hitting",
    "StopCriterion",
    "StopKind",
    "StopReason",
    "to_block_state",
    "Trajectory",
    "UPPER_METHODS",
    "UpperMethod",
]

for name in ("FluidPath", "FluidState", "SimulationPlan", "StopCriterion", "Trajectory"):
    globals()[name].__module__ = __name__
