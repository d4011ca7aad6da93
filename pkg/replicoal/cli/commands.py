import os
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

from replicoal.analysis import bottleneck_curve, ensemble_vs_ode
from replicoal.cli.config import (
    RunConfig,
    build_model,
    build_plan,
    build_rates,
    build_stop,
    level_budget_of,
    n_runs_of,
    require,
    seed_of,
    sigma_cutoff_of,
    start_states,
)
from replicoal.cli.plot import plot_simplex
from replicoal.cli.tables import (
    bottleneck_table,
    coming_down_table,
    ensemble_table,
    kingman_beta_table,
    ode_table,
    trajectory_table,
    write_csv,
)
from replicoal.dual import (
    check_h_consistency,
    empirical_hitting_law,
    exact_hitting_laws,
    h_from_law,
    total_variation,
    verify_q_identity,
)
from replicoal.kingman import KingmanChain, coming_down_constant, expected_beta, laplace_hitting, simulate_kingman
from replicoal.models.core import BlockState, PayoffMatrix, RateMatrix, largest_remainder_round, payoff_from_rates
from replicoal.models.replicator import ess_fixed_point, ess_tangent_curvature, integrate, verify_ess
from replicoal.simulator import StopCriterion, Trajectory, hitting_time, run_ensemble, simulate_exact
from replicoal.utils import ConfigError, as_generator, log, make_rng

type CommandName = Literal["ess", "ode", "simulate", "ensemble", "bottleneck", "kingman-check", "dual-check", "plot"]

BOTTLENECK_L1_TOL = 0.05
"""Trajectories in ``plot`` count as converged once within this L1 distance of the stable state."""

PLOT_SIGMA_FLOOR = 1000
"""Convergence in ``plot`` is judged on records at or above this block count."""


@dataclass(frozen=True)
class CommandContext:
    out_dir: str
    threads: int | None
    stem: str


type Summary = dict[str, Any]
type Command = Callable[[RunConfig, CommandContext], Summary]


def _payoff(cfg: RunConfig) -> PayoffMatrix:
    model = build_model(cfg)
    return payoff_from_rates(model) if isinstance(model, RateMatrix) else model


def _single_start(cfg: RunConfig) -> None:
    run = cfg.get("run", {})
    if len(run.get("r0s", [None])) != 1:
        raise ConfigError("run.r0s", "this command takes a single starting state, use run.r0")


def _r0s(cfg: RunConfig) -> list[np.ndarray]:
    run = cfg.get("run", {})
    if "r0s" in run:
        return [np.array(r, dtype=np.float64) for r in run["r0s"]]
    return [np.array(require(run, "run", "r0"), dtype=np.float64)]


def cmd_ess(cfg: RunConfig, ctx: CommandContext) -> Summary:
    """Fixed point of the replicator equation, with a sampled stability check."""
    A = _payoff(cfg)
    result = ess_fixed_point(A)
    curvature = ess_tangent_curvature(A)
    log.info(f"x* = {np.array2string(result.x_star, precision=17)}, c = {result.c:.17g}")
    report = None
    if np.any(result.x_star < 0):
        log.warning("fixed point lies outside the simplex, stability check skipped")
    else:
        report = verify_ess(A, result.x_star, radius=1e-2, samples=10_000, seed=seed_of(cfg))
        if not report.passed:
            log.warning(f"stability inequality fails at distance {report.worst_eps:.3g} (min value {report.min_value:.3g})")
    return {
        "x_star": result.x_star,
        "c": result.c,
        "residual": result.residual,
        "ess": report,
        "tangent_curvature": curvature,
    }


def cmd_ode(cfg: RunConfig, ctx: CommandContext) -> Summary:
    """Replicator path from ``ode.x0`` (or ``run.r0``)."""
    A = _payoff(cfg)
    ode = cfg.get("ode", {})
    x0 = ode.get("x0") or require(cfg.get("run", {}), "run", "r0")
    path = integrate(
        A,
        np.array(x0, dtype=np.float64),
        float(require(ode, "ode", "horizon")),
        float(ode.get("step", 0.01)),
        record_every=int(ode.get("record_every", 1)),
    )
    csv = write_csv(ode_table(path), ctx.out_dir, ctx.stem)
    return {"csv": csv, "rows": path.grid.size, "x_final": path.final}


def _trajectories(cfg: RunConfig, n: int) -> list[Trajectory]:
    model = build_model(cfg)
    plan = build_plan(cfg, model)
    stop = build_stop(cfg)
    seed = seed_of(cfg)
    starts = start_states(cfg)
    sims = [plan.prepare(start, stop) for start in starts]
    if seed is None:
        gen = as_generator(None)
        return [sims[i % len(sims)](gen) for i in range(n)]
    return [sims[i % len(sims)](make_rng(seed, i)) for i in range(n)]


def cmd_simulate(cfg: RunConfig, ctx: CommandContext) -> Summary:
    """One trajectory; with ``run.n_runs`` above 1, one CSV per run."""
    n = n_runs_of(cfg)
    _single_start(cfg)
    trajs = _trajectories(cfg, n)
    files = []
    for i, traj in enumerate(trajs):
        name = ctx.stem if n == 1 else f"{ctx.stem}_{i:04d}"
        files.append(write_csv(trajectory_table(traj), ctx.out_dir, name))
        log.debug(f"run {i}: {traj.stop_reason} at t={traj.end_time:.6g}, {traj.n_events} mergers")
    last = trajs[-1]
    return {
        "csv": files,
        "stop_reason": last.stop_reason,
        "end_time": last.end_time,
        "final": last.final.counts,
        "thinned": last.thinned,
    }


def cmd_ensemble(cfg: RunConfig, ctx: CommandContext) -> Summary:
    """Time-changed frequencies against the replicator equation, averaged over ``run.n_runs`` runs."""
    C = build_rates(cfg, "ensemble")
    run = cfg.get("run", {})
    grid = np.array(require(cfg.get("ensemble", {}), "ensemble", "grid"), dtype=np.float64)
    _single_start(cfg)
    r0 = _r0s(cfg)[0]
    summary = ensemble_vs_ode(
        C,
        int(require(run, "run", "sigma0")),
        r0,
        n_runs_of(cfg, 100),
        grid,
        seed_of(cfg),
        method=run.get("method", "hybrid"),
        switch_sigma=build_plan(cfg, C).switch_sigma,
        upper=run.get("upper", "fluid"),
        sigma_cutoff=sigma_cutoff_of(cfg),
        ode_step=float(cfg.get("ode", {}).get("step", 0.01)),
        threads=ctx.threads,
    )
    csv = write_csv(ensemble_table(summary), ctx.out_dir, ctx.stem)
    return {"csv": csv, "sup_error": summary.sup_error, "n_runs": summary.n_runs, "n_excluded": summary.n_excluded}


def cmd_bottleneck(cfg: RunConfig, ctx: CommandContext) -> Summary:
    """Distance from the stable state at the first visit to each level, for every starting frequency."""
    C = build_rates(cfg, "bottleneck")
    run = cfg.get("run", {})
    sigma0 = int(require(run, "run", "sigma0"))
    ms = [int(m) for m in require(cfg.get("bottleneck", {}), "bottleneck", "ms")]
    seed = seed_of(cfg)
    r0s = _r0s(cfg)
    curves = []
    for i, r0 in enumerate(r0s):
        with log.labelled(f"start {i}"):
            log.info(f"r0 = {r0}")
            curves.append(
                bottleneck_curve(
                    C,
                    sigma0,
                    r0,
                    ms,
                    n_runs_of(cfg, 100),
                    None if seed is None else seed + i,
                    method=run.get("method", "hybrid"),
                    switch_sigma=build_plan(cfg, C).switch_sigma,
                    upper=run.get("upper", "fluid"),
                    threads=ctx.threads,
                )
            )
    csv = write_csv(bottleneck_table(r0s, curves), ctx.out_dir, ctx.stem)
    return {"csv": csv, "l1": [[stat.l1 for stat in curve] for curve in curves], "ms": ms}


def _multitype_hitting_times(
    cfg: RunConfig, n0: int, ms: list[int], n_runs: int, seed: int | None, ctx: CommandContext
) -> list[np.ndarray]:
    """Exact hitting times of the levels ``ms`` from ``n0`` blocks split as ``run.r0``, evenly by default."""
    C = build_rates(cfg, "kingman-check")
    r0 = np.array(cfg.get("run", {}).get("r0", np.full(C.k, 1.0 / C.k)), dtype=np.float64)
    start = BlockState(largest_remainder_round(n0, r0))
    stop = StopCriterion.hit_sigma(min(ms))

    def one(i: int, gen: np.random.Generator) -> list[float | None]:
        traj = simulate_exact(C, start, stop, gen, record_sigma=None)
        return [hitting_time(traj, m) for m in ms]

    times = np.array(run_ensemble(one, n_runs, seed, ctx.threads), dtype=np.float64).reshape(n_runs, len(ms))
    return [times[:, i] for i in range(len(ms))]


def _laplace_rows(ms: list[int], theta: float, betas: list[np.ndarray], gammas: list[np.ndarray]) -> list[Summary]:
    rows = []
    for m, beta, gamma in zip(ms, betas, gammas):
        b, b_se = laplace_hitting(beta, theta)
        g, g_se = laplace_hitting(gamma, theta)
        rows.append({"m": m, "theta": theta, "beta": b, "beta_stderr": b_se, "gamma": g, "gamma_stderr": g_se})
    return rows


def cmd_kingman_check(cfg: RunConfig, ctx: CommandContext) -> Summary:
    """
    Death-chain hitting times against their closed form, and the small-time block count.
    With ``kingman.theta``, Laplace transforms of the multi-type hitting times are reported next to the chain's.
    """
    kingman = cfg.get("kingman", {})
    if "c" in kingman:
        c = float(kingman["c"])
    else:
        c = build_rates(cfg, "kingman-check").c_min
    n0 = int(kingman.get("n0", 1000))
    n_runs = int(kingman.get("n_runs", n_runs_of(cfg, 1000)))
    seed = seed_of(cfg)
    chain = KingmanChain(c, n0)
    summary: Summary = {"c": c, "n0": n0}

    ms = [int(m) for m in kingman.get("ms", [])]
    if ms:
        stop = StopCriterion.hit_sigma(min(ms))
        paths = run_ensemble(lambda i, gen: simulate_kingman(chain, stop, gen), n_runs, seed, ctx.threads)
        samples = [np.array([p.hitting_time(m) for p in paths], dtype=np.float64) for m in ms]
        table = kingman_beta_table(ms, [expected_beta(chain, m) for m in ms], samples)
        summary["beta_csv"] = write_csv(table, ctx.out_dir, f"{ctx.stem}_beta")
        z = np.abs(table["mean"] - table["expected"]) / table["stderr"].where(table["stderr"] > 0)
        summary["beta_max_z"] = float(z.max())
        if "theta" in kingman:
            gammas = _multitype_hitting_times(cfg, int(chain.n0), ms, n_runs, None if seed is None else seed + 2, ctx)
            summary["laplace"] = _laplace_rows(ms, float(kingman["theta"]), samples, gammas)

    eps = [float(e) for e in kingman.get("eps", [])]
    if eps:
        estimates = coming_down_constant(chain, eps, n_runs, None if seed is None else seed + 1, threads=ctx.threads)
        summary["coming_down_csv"] = write_csv(coming_down_table(estimates), ctx.out_dir, f"{ctx.stem}_coming_down")
        summary["coming_down_max_relative_error"] = max(e.relative_error for e in estimates)
    if not ms and not eps:
        raise ConfigError("kingman", "nothing to check, give kingman.ms or kingman.eps")
    return summary


def cmd_dual_check(cfg: RunConfig, ctx: CommandContext) -> Summary:
    """Holding-rate identity of the time-reversed chain, on exact hitting laws."""
    C = build_rates(cfg, "dual-check")
    dual = cfg.get("dual", {})
    eta = BlockState(np.array(require(dual, "dual", "eta"), dtype=np.int64))
    m = int(dual.get("m", 2))
    if not 1 <= m < eta.sigma:
        raise ConfigError("dual.m", f"must be in [1, {eta.sigma})")
    budget = level_budget_of(cfg)
    report = verify_q_identity(C, eta, m, budget=budget)
    laws = exact_hitting_laws(C, eta, m, budget=budget)
    consistency = check_h_consistency(h_from_law(laws, C), C, m)
    log.info(f"q identity: max relative error {report.max_rel_error:.3g} over {report.n_states} states")
    summary: Summary = {"q_identity": report, "h_consistency": consistency, "hitting_law": laws[m]}

    run = cfg.get("run", {})
    if "n_runs" in run:
        empirical = empirical_hitting_law(C, eta, m, n_runs_of(cfg), seed_of(cfg), threads=ctx.threads)
        summary["total_variation"] = total_variation(laws[m], empirical)
        summary["n_runs"] = n_runs_of(cfg)
    return summary


def _closest_approach(sigma: np.ndarray, r: np.ndarray, x_star: np.ndarray) -> float:
    keep = sigma >= PLOT_SIGMA_FLOOR
    if not np.any(keep):
        return float("nan")
    return float(np.min(np.sum(np.abs(r[keep] - x_star), axis=1)))


def cmd_plot(cfg: RunConfig, ctx: CommandContext) -> Summary:
    """Frequency paths on the ternary simplex, coloured by block count."""
    A = _payoff(cfg)
    if A.k != 3:
        raise ConfigError("model", f"plot needs three types, got {A.k}")
    n = int(cfg.get("output", {}).get("paths", 6))
    x_star = ess_fixed_point(A).x_star
    paths = []
    for traj in _trajectories(cfg, n):
        table = trajectory_table(traj)
        paths.append((table["sigma"].to_numpy(), table[["r_1", "r_2", "r_3"]].to_numpy()))
    svg = os.path.join(ctx.out_dir, f"{ctx.stem}.svg")
    plot_simplex(paths, x_star, svg)
    log.info(f"wrote {svg}")
    closest = [_closest_approach(sigma, r, x_star) for sigma, r in paths]
    return {
        "svg": svg,
        "x_star": x_star,
        "closest_l1": closest,
        "converged": bool(all(d <= BOTTLENECK_L1_TOL for d in closest)),
    }


COMMANDS: dict[CommandName, Command] = {
    "ess": cmd_ess,
    "ode": cmd_ode,
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "bottleneck": cmd_bottleneck,
    "kingman-check": cmd_kingman_check,
    "dual-check": cmd_dual_check,
    "plot": cmd_plot,
}
