import numpy as np
import pytest

from replicoal.simulator import resolve_threads, run_ensemble


def draw(i: int, gen: np.random.Generator) -> tuple[int, float]:
    return i, float(gen.random())


def test_run_ensemble():
    serial = run_ensemble(draw, 20, seed=42, threads=1)
    parallel = run_ensemble(draw, 20, seed=42, threads=4)
    assert serial == parallel
    assert [i for i, _ in serial] == list(range(20))
    assert len({x for _, x in serial}) == 20

    other = run_ensemble(draw, 20, seed=43, threads=1)
    assert other != serial

    assert run_ensemble(draw, 0, seed=1) == []
    with pytest.raises(ValueError):
        run_ensemble(draw, -1, seed=1)


def test_resolve_threads(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.delenv("REPLICOAL_THREADS", raising=False)
    assert resolve_threads(None) == 1
    assert resolve_threads(3) == 3
    with pytest.raises(ValueError):
        resolve_threads(0)

    monkeypatch.setenv("REPLICOAL_THREADS", "6")
    assert resolve_threads(None) == 6
    assert resolve_threads(2) == 2

    monkeypatch.setenv("REPLICOAL_THREADS", "many")
    assert resolve_threads(None) == 1
