import json
import math
from typing import Any, Literal, NotRequired, TypedDict, cast

import numpy as np

from replicoal.analysis import DEFAULT_SIGMA_CUTOFF
from replicoal.dual import DEFAULT_LEVEL_BUDGET
from replicoal.models.core import BlockState, PayoffMatrix, RateMatrix, largest_remainder_round
from replicoal.simulator import (
    DEFAULT_RECORD_SIGMA,
    DEFAULT_SWITCH_SIGMA,
    METHODS,
    UPPER_METHODS,
    FluidState,
    Method,
    SimulationPlan,
    StopCriterion,
    StopKind,
    UpperMethod,
)
from replicoal.utils import ConfigError

SIMPLEX_TOL = 1e-9
"""Tolerance on the coordinate sum of configured frequency vectors."""


class ModelConfig(TypedDict, total=False):
    C: list[list[float]]
    """Merger rates, row-major, every entry positive."""
    A: list[list[float]]
    """Payoff matrix supplied directly; only the "fluid" method and the deterministic commands accept it."""


class StopConfig(TypedDict):
    kind: StopKind
    value: NotRequired[float]
    """Target block count for "hit_sigma", horizon for "max_time"."""


class RunSection(TypedDict, total=False):
    method: Method
    """Simulation method, defaults to "exact"."""
    sigma0: int
    """Initial block count, used with ``r0`` or ``r0s``."""
    r0: list[float]
    """Initial type frequencies."""
    r0s: list[list[float]]
    """Several initial frequency vectors, for ``bottleneck`` and ``plot``."""
    n0: list[int]
    """Initial type counts, alternative to ``sigma0`` and ``r0``."""
    stop: StopConfig
    """Stop criterion, defaults to absorption."""
    seed: int
    n_runs: int
    switch_sigma: int
    """Hybrid switch level and tau-leap floor, defaults to 10000."""
    upper: UpperMethod
    """Hybrid handling above the switch, "fluid" (default) or "tau_leap"."""
    eps: float
    """Tau-leap accuracy, defaults to 0.03."""
    step: float
    """Continuum relaxation step in clock units, defaults to 0.01."""
    record_sigma: int | None
    """Exact events are stored individually below this block count; null stores every event."""


class OdeSection(TypedDict, total=False):
    x0: list[float]
    """Initial point, defaults to ``run.r0``."""
    horizon: float
    step: float
    record_every: int


class EnsembleSection(TypedDict, total=False):
    grid: list[float]
    """Clock-time grid for the ``ensemble`` comparison."""
    sigma_cutoff: int


class BottleneckSection(TypedDict, total=False):
    ms: list[int]
    """Block-count levels at which frequencies are read."""


class KingmanSection(TypedDict, total=False):
    c: float
    """Rate constant, defaults to the smallest merger rate."""
    n0: int
    ms: list[int]
    eps: list[float]
    """Times at which ``eps * N(eps)`` is estimated."""
    n_runs: int
    theta: float
    """Laplace argument at which multi-type hitting times are compared with the death chain."""


class DualSection(TypedDict, total=False):
    eta: list[int]
    """Start state of the exact hitting-law recursion."""
    m: int
    budget: int


class OutputSection(TypedDict, total=False):
    stem: str
    """File name stem, defaults to the command name."""
    paths: int
    """Number of trajectories to draw in ``plot``, defaults to 6."""


class RunConfig(TypedDict, total=False):
    """
    Experiment configuration, one JSON document.
    """

    model: ModelConfig
    run: RunSection
    ode: OdeSection
    ensemble: EnsembleSection
    bottleneck: BottleneckSection
    kingman: KingmanSection
    dual: DualSection
    output: OutputSection


type Section = Literal["model", "run", "ode", "ensemble", "bottleneck", "kingman", "dual", "output"]

SECTION_TYPES: dict[Section, type] = {
    "model": ModelConfig,
    "run": RunSection,
    "ode": OdeSection,
    "ensemble": EnsembleSection,
    "bottleneck": BottleneckSection,
    "kingman": KingmanSection,
    "dual": DualSection,
    "output": OutputSection,
}
"""Schema of each section; keys outside a section's TypedDict are rejected."""

SECTIONS: tuple[Section, ...] = tuple(SECTION_TYPES)


def load_config(path: str) -> RunConfig:
    """
    Read and validate a configuration file.

    Raises:
        ConfigError: file is unreadable, is not JSON, or fails validation.
    """
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ConfigError("<file>", f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"invalid JSON at line {e.lineno}: {e.msg}") from e
    return check_config(raw)


def _table(raw: Any, key: str) -> dict[str, Any]:
    if not isinstance(raw, dict):
        raise ConfigError(key, "must be an object")
    return cast(dict[str, Any], raw)


def _number(raw: Any, key: str, *, integer=False, positive=False, minimum: float | None = None) -> float:
    if isinstance(raw, bool) or not isinstance(raw, int | float):
        raise ConfigError(key, "must be a number")
    if integer and raw != int(raw):
        raise ConfigError(key, "must be an integer")
    if not math.isfinite(raw) or (positive and raw <= 0):
        raise ConfigError(key, "must be positive and finite" if positive else "must be finite")
    if minimum is not None and raw < minimum:
        raise ConfigError(key, f"must be at least {minimum:g}")
    return raw


def _vector(raw: Any, key: str, *, integer=False) -> list[float]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(key, "must be a nonempty list")
    return [_number(v, f"{key}[{i}]", integer=integer, minimum=0) for i, v in enumerate(raw)]


def _simplex(raw: Any, key: str, k: int) -> list[float]:
    x = _vector(raw, key)
    if len(x) != k:
        raise ConfigError(key, f"must have {k} entries")
    if abs(math.fsum(x) - 1) > SIMPLEX_TOL:
        raise ConfigError(key, f"must sum to 1, sums to {math.fsum(x):.17g}")
    return x


def _matrix(raw: Any, key: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw or not all(isinstance(row, list) for row in raw):
        raise ConfigError(key, "must be a nonempty list of rows")
    k = len(raw)
    rows = []
    for i, row in enumerate(raw):
        if len(row) != k:
            raise ConfigError(f"{key}[{i}]", f"must have {k} entries")
        rows.append([_number(v, f"{key}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows, dtype=np.float64)


def _check_model(raw: Any) -> int:
    model = _table(raw, "model")
    has_c, has_a = "C" in model, "A" in model
    if has_c == has_a:
        raise ConfigError("model", "exactly one of C and A must be supplied")
    if has_c:
        c = _matrix(model["C"], "model.C")
        if np.any(c <= 0):
            raise ConfigError("model.C", "entries must be positive")
        return c.shape[0]
    return _matrix(model["A"], "model.A").shape[0]


def _check_run(raw: Any, k: int, direct: bool) -> None:
    run = _table(raw, "run")
    method = run.get("method", "exact")
    if method not in METHODS:
        raise ConfigError("run.method", f"must be one of {', '.join(METHODS)}")
    if direct and method != "fluid" and ("sigma0" in run or "n0" in run):
        raise ConfigError("run.method", "a payoff matrix supplied directly needs the fluid method")
    if run.get("upper", "fluid") not in UPPER_METHODS:
        raise ConfigError("run.upper", f"must be one of {', '.join(UPPER_METHODS)}")
    if "n0" in run:
        if "sigma0" in run or "r0" in run:
            raise ConfigError("run.n0", "cannot be combined with sigma0 and r0")
        n0 = _vector(run["n0"], "run.n0", integer=True)
        if len(n0) != k:
            raise ConfigError("run.n0", f"must have {k} entries")
        if sum(n0) < 1:
            raise ConfigError("run.n0", "must contain at least one block")
    if "sigma0" in run:
        _number(run["sigma0"], "run.sigma0", integer=True, minimum=1)
    if "r0" in run:
        _simplex(run["r0"], "run.r0", k)
    if "r0s" in run:
        if not isinstance(run["r0s"], list) or not run["r0s"]:
            raise ConfigError("run.r0s", "must be a nonempty list")
        for i, r0 in enumerate(run["r0s"]):
            _simplex(r0, f"run.r0s[{i}]", k)
    if "stop" in run:
        stop = _table(run["stop"], "run.stop")
        try:
            StopCriterion(stop.get("kind", ""), _number(stop.get("value", 0.0), "run.stop.value"))
        except ValueError as e:
            raise ConfigError("run.stop", str(e)) from e
    if "seed" in run:
        _number(run["seed"], "run.seed", integer=True, minimum=0)
    if "n_runs" in run:
        _number(run["n_runs"], "run.n_runs", integer=True, minimum=1)
    if "switch_sigma" in run:
        _number(run["switch_sigma"], "run.switch_sigma", integer=True, minimum=2)
    if "eps" in run:
        eps = _number(run["eps"], "run.eps", positive=True)
        if eps > 0.1:
            raise ConfigError("run.eps", "must not exceed 0.1")
    if "step" in run:
        _number(run["step"], "run.step", positive=True)
    if run.get("record_sigma") is not None:
        _number(run["record_sigma"], "run.record_sigma", integer=True, minimum=1)


def check_config(raw: Any) -> RunConfig:
    """
    Validate a parsed configuration document.

    Raises:
        ConfigError: a key is unknown, missing, or holds an invalid value; ``key`` names it.
    """
    cfg = _table(raw, "<root>")
    for key in cfg:
        if key not in SECTIONS:
            raise ConfigError(key, "unknown section")
        for name in _table(cfg[key], key):
            if name not in SECTION_TYPES[key].__annotations__:
                raise ConfigError(f"{key}.{name}", "unknown key")
    if "model" not in cfg:
        raise ConfigError("model", "missing")
    k = _check_model(cfg["model"])
    _check_run(cfg.get("run", {}), k, "A" in cfg["model"])

    ode = cfg.get("ode", {})
    if "x0" in ode:
        _simplex(ode["x0"], "ode.x0", k)
    for key in ("horizon", "step"):
        if key in ode:
            _number(ode[key], f"ode.{key}", positive=True)
    if "record_every" in ode:
        _number(ode["record_every"], "ode.record_every", integer=True, minimum=1)

    ensemble = cfg.get("ensemble", {})
    if "grid" in ensemble:
        _vector(ensemble["grid"], "ensemble.grid")
    if "sigma_cutoff" in ensemble:
        _number(ensemble["sigma_cutoff"], "ensemble.sigma_cutoff", integer=True, minimum=2)

    bottleneck = cfg.get("bottleneck", {})
    if "ms" in bottleneck:
        _vector(bottleneck["ms"], "bottleneck.ms", integer=True)

    kingman = cfg.get("kingman", {})
    if "c" in kingman:
        _number(kingman["c"], "kingman.c", positive=True)
    if "n0" in kingman:
        _number(kingman["n0"], "kingman.n0", integer=True, minimum=2)
    if "ms" in kingman:
        _vector(kingman["ms"], "kingman.ms", integer=True)
    if "eps" in kingman:
        for i, v in enumerate(_vector(kingman["eps"], "kingman.eps")):
            if v <= 0:
                raise ConfigError(f"kingman.eps[{i}]", "must be positive")
    if "n_runs" in kingman:
        _number(kingman["n_runs"], "kingman.n_runs", integer=True, minimum=1)
    if "theta" in kingman:
        _number(kingman["theta"], "kingman.theta", positive=True)
        if "ms" not in kingman:
            raise ConfigError("kingman.theta", "needs kingman.ms")

    dual = cfg.get("dual", {})
    if "eta" in dual:
        if len(_vector(dual["eta"], "dual.eta", integer=True)) != k:
            raise ConfigError("dual.eta", f"must have {k} entries")
    if "m" in dual:
        _number(dual["m"], "dual.m", integer=True, minimum=1)
    if "budget" in dual:
        _number(dual["budget"], "dual.budget", integer=True, minimum=1)

    output = cfg.get("output", {})
    if "stem" in output and (not isinstance(output["stem"], str) or not output["stem"]):
        raise ConfigError("output.stem", "must be a nonempty string")
    if "paths" in output:
        _number(output["paths"], "output.paths", integer=True, minimum=1)
    return cast(RunConfig, cfg)


def require[T](section: dict[str, Any], name: str, key: str) -> T:
    """Fetch a key that the running command needs."""
    if key not in section:
        raise ConfigError(f"{name}.{key}", "missing")
    return section[key]


def build_model(cfg: RunConfig) -> RateMatrix | PayoffMatrix:
    model = cfg["model"]
    if "C" in model:
        return RateMatrix(np.array(model["C"], dtype=np.float64))
    return PayoffMatrix.direct(np.array(model["A"], dtype=np.float64))


def build_rates(cfg: RunConfig, command: str) -> RateMatrix:
    model = build_model(cfg)
    if not isinstance(model, RateMatrix):
        raise ConfigError("model.C", f"command {command} needs merger rates")
    return model


def build_stop(cfg: RunConfig) -> StopCriterion:
    stop = cfg.get("run", {}).get("stop")
    if stop is None:
        return StopCriterion.absorb()
    return StopCriterion(stop["kind"], stop.get("value", 0.0))


def build_plan(cfg: RunConfig, model: RateMatrix | PayoffMatrix | None = None) -> SimulationPlan:
    run = cfg.get("run", {})
    record_sigma = run.get("record_sigma", DEFAULT_RECORD_SIGMA)
    return SimulationPlan(
        model if model is not None else build_model(cfg),
        run.get("method", "exact"),
        switch_sigma=int(run.get("switch_sigma", DEFAULT_SWITCH_SIGMA)),
        upper=run.get("upper", "fluid"),
        eps=float(run.get("eps", 0.03)),
        step=float(run.get("step", 0.01)),
        record_sigma=None if record_sigma is None else int(record_sigma),
    )


def start_states(cfg: RunConfig) -> list[BlockState | FluidState]:
    """
    Starting states named by the run section: ``n0``, or ``sigma0`` with each of ``r0``/``r0s``.

    Starts above the switch level of a hybrid with a continuum upper stage stay continuous,
    as does every start of the "fluid" method.
    """
    run = cfg.get("run", {})
    if "n0" in run:
        return [BlockState(np.array(run["n0"], dtype=np.int64))]
    sigma0 = int(require(run, "run", "sigma0"))
    if "r0s" in run:
        r0s = run["r0s"]
    else:
        r0s = [require(run, "run", "r0")]
    method = run.get("method", "exact")
    switch = int(run.get("switch_sigma", DEFAULT_SWITCH_SIGMA))
    upper = run.get("upper", "fluid")
    out: list[BlockState | FluidState] = []
    for r0 in r0s:
        r = np.array(r0, dtype=np.float64)
        r /= np.sum(r)
        if method == "fluid" or (method == "hybrid" and upper == "fluid" and sigma0 > switch):
            out.append(FluidState(float(sigma0), r))
        else:
            out.append(BlockState(largest_remainder_round(sigma0, r)))
    return out


def seed_of(cfg: RunConfig) -> int | None:
    seed = cfg.get("run", {}).get("seed")
    return None if seed is None else int(seed)


def n_runs_of(cfg: RunConfig, default: int = 1) -> int:
    return int(cfg.get("run", {}).get("n_runs", default))


def sigma_cutoff_of(cfg: RunConfig) -> int:
    return int(cfg.get("ensemble", {}).get("sigma_cutoff", DEFAULT_SIGMA_CUTOFF))


def level_budget_of(cfg: RunConfig) -> int:
    return int(cfg.get("dual", {}).get("budget", DEFAULT_LEVEL_BUDGET))


def with_seed(cfg: RunConfig, seed: int | None) -> RunConfig:
    """Copy of ``cfg`` with ``run.seed`` replaced when ``seed`` is given."""
    if seed is None:
        return cfg
    if seed < 0:
        raise ConfigError("run.seed", "must be nonnegative")
    out = cast(RunConfig, dict(cfg))
    out["run"] = cast(RunSection, {**cfg.get("run", {}), "seed": seed})
    return out
