from typing import Literal

from replicoal.models.core import BlockState, RateMatrix, largest_remainder_round
from replicoal.simulator.exact import DEFAULT_RECORD_SIGMA, DEFAULT_SNAPSHOT_EVERY, exact_loop, simulate_exact
from replicoal.simulator.fluid import DEFAULT_FLUID_STEP, integrate_fluid
from replicoal.simulator.tau_leap import simulate_tau_leap
from replicoal.simulator.trajectory import FluidPath, FluidState, Recorder, StopCriterion, Trajectory
from replicoal.utils import SeedLike, as_generator, log

type UpperMethod = Literal["fluid", "tau_leap"]
"""How the hybrid simulator handles block counts above the switch."""

UPPER_METHODS: tuple[UpperMethod, ...] = ("fluid", "tau_leap")

DEFAULT_SWITCH_SIGMA = 10_000


def to_block_state(start: BlockState | FluidState) -> BlockState:
    """Integer state nearest to ``start`` with the same total, by largest-remainder rounding."""
    if isinstance(start, BlockState):
        return start
    return BlockState(largest_remainder_round(round(start.sigma), start.r))


def fluid_prefix(
    C: RateMatrix,
    start: BlockState | FluidState,
    stop: StopCriterion,
    *,
    switch_sigma: int = DEFAULT_SWITCH_SIGMA,
    step: float = DEFAULT_FLUID_STEP,
) -> FluidPath:
    """
    Continuum part of a hybrid run, from ``start`` down to the switch.
    It is deterministic, so ensembles compute it once and pass it to every run.
    """
    f0 = start if isinstance(start, FluidState) else FluidState.of(start)
    return integrate_fluid(C, f0, sigma_stop=max(switch_sigma, stop.sigma_target), horizon=stop.time_limit, step=step)


def simulate_hybrid(
    C: RateMatrix,
    start: BlockState | FluidState,
    stop: StopCriterion,
    seed: SeedLike = None,
    *,
    switch_sigma: int = DEFAULT_SWITCH_SIGMA,
    upper: UpperMethod = "fluid",
    step: float = DEFAULT_FLUID_STEP,
    eps: float = 0.03,
    record_sigma: int | None = DEFAULT_RECORD_SIGMA,
    snapshot_every: int = DEFAULT_SNAPSHOT_EVERY,
    prefix: FluidPath | None = None,
) -> Trajectory:
    """
    Simulate from a huge block count: continuum relaxation or tau-leaping above ``switch_sigma``,
    exact simulation below.

    At the switch, the continuum state is rounded to the nearest integer state with the same total
    block count (largest remainder, ties to the lowest type index). Exact simulation continues
    from the continuum end time.

    Args:
        C: merger rates.
        start: initial state, integer or continuum.
        stop: stop criterion.
        seed: random seed or generator.
        switch_sigma: block count at which exact simulation takes over, at least 2.
        upper: "fluid" or "tau_leap" above the switch.
        step: continuum step in clock units.
        eps: tau-leap error control parameter.
        record_sigma: see :func:`simulate_exact`.
        snapshot_every: see :func:`simulate_exact`.
        prefix: precomputed result of :func:`fluid_prefix` for the same arguments.
    """
    if switch_sigma < 2:
        raise ValueError(f"switch_sigma must be at least 2, got {switch_sigma}")
    if upper not in UPPER_METHODS:
        raise ValueError(f"unknown upper method {upper}")
    initial = to_block_state(start)
    if initial.sigma <= switch_sigma:
        return simulate_exact(C, initial, stop, seed, record_sigma=record_sigma, snapshot_every=snapshot_every)

    if upper == "tau_leap":
        return simulate_tau_leap(
            C,
            initial,
            stop,
            seed,
            eps=eps,
            sigma_floor=switch_sigma,
            record_sigma=record_sigma,
            snapshot_every=snapshot_every,
        )

    fluid = prefix if prefix is not None else fluid_prefix(C, start, stop, switch_sigma=switch_sigma, step=step)
    switched = BlockState(largest_remainder_round(round(fluid.sigma[-1]), fluid.r[-1]))
    counts = switched.counts.copy()
    t0 = fluid.end_time
    rec = Recorder(counts, t0, record_sigma=record_sigma, snapshot_every=snapshot_every)
    if fluid.stop_reason == "max_time":
        return rec.build(initial, t0, "max_time", fluid)
    if fluid.stop_reason == "unreachable":
        return rec.build(initial, 0.0, "unreachable", fluid)

    end_time, reason = exact_loop(C, counts, t0, stop, as_generator(seed), rec)
    rec.flush(counts)
    log.debug(f"simulate_hybrid: switched at {switched} t={t0:.6g}, ended at t={end_time:.6g} ({reason})")
    return rec.build(initial, end_time, reason, fluid)
