import json
from typing import Any

import numpy as np
import pytest

from replicoal.cli import check_config, load_config, with_seed
from replicoal.cli.config import build_plan, build_stop, start_states
from replicoal.models.core import BlockState
from replicoal.simulator import FluidState
from replicoal.utils import ConfigError

C2 = [[1.0, 2.0], [0.5, 1.5]]


def with_run(**run: Any) -> dict[str, Any]:
    return {"model": {"C": C2}, "run": run}


def test_check_config_valid():
    cfg = check_config({"model": {"C": C2}})
    assert cfg["model"]["C"] == C2
    check_config(with_run(sigma0=100, r0=[0.5, 0.5], stop={"kind": "hit_sigma", "value": 10}, seed=3, record_sigma=None))
    check_config({"model": {"A": [[1.0, 2.0], [3.0, 4.0]]}, "run": {"method": "fluid", "sigma0": 10**6, "r0": [0.5, 0.5]}})


@pytest.mark.parametrize(
    ("raw", "key"),
    [
        ([], "<root>"),
        ({"run": {}}, "model"),
        ({"model": {"C": C2}, "extra": {}}, "extra"),
        ({"model": {"C": C2}, "run": []}, "run"),
        ({"model": {"C": C2, "A": C2}}, "model"),
        ({"model": {"B": C2}}, "model.B"),
        ({"model": {"C": [[1.0, -2.0], [0.5, 1.5]]}}, "model.C"),
        ({"model": {"C": [[1.0, 2.0], [0.5]]}}, "model.C[1]"),
        ({"model": {"C": [[1.0, "x"], [0.5, 1.5]]}}, "model.C[0][1]"),
        (with_run(bogus=1), "run.bogus"),
        (with_run(method="magic"), "run.method"),
        (with_run(sigma0=True), "run.sigma0"),
        (with_run(sigma0=10.5), "run.sigma0"),
        (with_run(r0=[0.5, 0.6]), "run.r0"),
        (with_run(r0=[1.0]), "run.r0"),
        (with_run(r0s=[[0.5, 0.5], [0.2]]), "run.r0s[1]"),
        (with_run(n0=[3, 4], sigma0=7), "run.n0"),
        (with_run(n0=[0, 0]), "run.n0"),
        (with_run(stop={"kind": "forever"}), "run.stop"),
        (with_run(stop={"kind": "hit_sigma", "value": 0}), "run.stop"),
        (with_run(seed=-1), "run.seed"),
        (with_run(eps=0.5), "run.eps"),
        (with_run(switch_sigma=1), "run.switch_sigma"),
        (with_run(upper="fluid_then_magic"), "run.upper"),
        ({"model": {"A": C2}, "run": {"sigma0": 10, "r0": [0.5, 0.5]}}, "run.method"),
        ({"model": {"C": C2}, "ode": {"horizon": -1}}, "ode.horizon"),
        ({"model": {"C": C2}, "kingman": {"eps": [0.1, 0.0]}}, "kingman.eps[1]"),
        ({"model": {"C": C2}, "kingman": {"theta": 1.0}}, "kingman.theta"),
        ({"model": {"C": C2}, "kingman": {"ms": [2], "theta": 0.0}}, "kingman.theta"),
        ({"model": {"C": C2}, "dual": {"eta": [1, 2, 3]}}, "dual.eta"),
        ({"model": {"C": C2}, "output": {"stem": ""}}, "output.stem"),
    ],
)
def test_check_config_invalid(raw: Any, key: str):
    with pytest.raises(ConfigError) as e:
        check_config(raw)
    assert e.value.key == key
    assert str(e.value).startswith(f"{key}: ")


def test_load_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"model": {"C": C2}}))
    assert load_config(str(path))["model"]["C"] == C2

    with pytest.raises(ConfigError) as e:
        load_config(str(tmp_path / "missing.json"))
    assert e.value.key == "<file>"

    path.write_text("{not json")
    with pytest.raises(ConfigError) as e:
        load_config(str(path))
    assert e.value.key == "<file>"


def test_with_seed():
    cfg = check_config(with_run(seed=1))
    assert with_seed(cfg, None) is cfg
    out = with_seed(cfg, 9)
    assert out["run"]["seed"] == 9
    assert cfg["run"]["seed"] == 1
    with pytest.raises(ConfigError):
        with_seed(cfg, -2)


def test_start_states():
    (n,) = start_states(check_config(with_run(sigma0=8, r0=[0.25, 0.75])))
    assert isinstance(n, BlockState)
    assert n.key == (2, 6)

    (n,) = start_states(check_config(with_run(n0=[4, 1])))
    assert n == BlockState.of(4, 1)

    hybrid = with_run(method="hybrid", sigma0=10**6, switch_sigma=1000, r0s=[[0.5, 0.5], [0.1, 0.9]])
    starts = start_states(check_config(hybrid))
    assert len(starts) == 2
    assert all(isinstance(s, FluidState) for s in starts)
    assert starts[1].r == pytest.approx([0.1, 0.9])

    leaping = start_states(
        check_config(with_run(method="hybrid", upper="tau_leap", sigma0=10**6, switch_sigma=1000, r0=[0.5, 0.5]))
    )
    assert leaping == [BlockState.of(500_000, 500_000)]

    with pytest.raises(ConfigError) as e:
        start_states(check_config(with_run(sigma0=10)))
    assert e.value.key == "run.r0"


def test_build_plan_and_stop():
    cfg = check_config(with_run(method="tau_leap", switch_sigma=500, eps=0.05, record_sigma=None))
    plan = build_plan(cfg)
    assert plan.method == "tau_leap"
    assert plan.switch_sigma == 500
    assert plan.eps == 0.05
    assert plan.record_sigma is None
    assert build_stop(cfg).kind == "absorb"

    cfg = check_config(with_run(stop={"kind": "max_time", "value": 2.5}))
    assert build_stop(cfg).time_limit == 2.5
    assert build_plan(cfg).record_sigma == 10_000
    assert np.isinf(build_stop(check_config(with_run())).time_limit)

    assert build_plan(check_config(with_run())).upper == "fluid"
    plan = build_plan(check_config(with_run(method="hybrid", upper="tau_leap", eps=0.02)))
    assert plan.upper == "tau_leap"
    assert plan.eps == 0.02
