import os

import numpy as np
import pandas as pd

from replicoal.analysis import BottleneckStat, EnsembleSummary
from replicoal.kingman import ComingDownEstimate
from replicoal.models.replicator import OdePath
from replicoal.simulator import Trajectory
from replicoal.utils import log

FLOAT_FORMAT = "%.17g"
"""Lossless rendering of doubles."""


def _typed(prefix: str, k: int) -> list[str]:
    return [f"{prefix}_{i + 1}" for i in range(k)]


def ode_table(path: OdePath) -> pd.DataFrame:
    """Columns ``t, x_1..x_k``."""
    k = path.points.shape[1]
    df = pd.DataFrame(path.points, columns=_typed("x", k))
    df.insert(0, "t", path.grid)
    return df


def trajectory_table(traj: Trajectory) -> pd.DataFrame:
    """
    Columns ``t, sigma, r_1..r_k``, one row per record.

    A continuum prefix contributes its integration steps first, with non-integer ``sigma``;
    its last step coincides with the first discrete record and is dropped.
    """
    parts: list[pd.DataFrame] = []
    cols = ["t", "sigma", *_typed("r", traj.k)]
    if traj.fluid is not None:
        f = traj.fluid
        parts.append(pd.DataFrame(np.column_stack([f.t[:-1], f.sigma[:-1], f.r[:-1]]), columns=cols))
    sigmas = traj.sigmas.astype(np.float64)
    r = traj.counts / sigmas[:, None]
    parts.append(pd.DataFrame(np.column_stack([traj.times, sigmas, r]), columns=cols))
    return pd.concat(parts, ignore_index=True)


def ensemble_table(summary: EnsembleSummary) -> pd.DataFrame:
    """Columns ``t_tau, mean_abs_err_1..k, stderr_1..k, n_runs``."""
    k = summary.mean_abs_err.shape[1]
    df = pd.DataFrame(
        np.column_stack([summary.grid, summary.mean_abs_err, summary.stderr]),
        columns=["t_tau", *_typed("mean_abs_err", k), *_typed("stderr", k)],
    )
    df["n_runs"] = summary.n_runs
    return df


def bottleneck_table(r0s: list[np.ndarray], curves: list[list[BottleneckStat]]) -> pd.DataFrame:
    """Columns ``start, r0_1..k, m, mean_abs_err_1..k, stderr_1..k, l1, n_runs``, one row per start and level."""
    k = r0s[0].size
    rows = []
    for i, (r0, curve) in enumerate(zip(r0s, curves)):
        for stat in curve:
            rows.append([i, *r0, stat.m, *stat.mean, *stat.stderr, stat.l1, stat.n_runs])
    df = pd.DataFrame(
        rows,
        columns=["start", *_typed("r0", k), "m", *_typed("mean_abs_err", k), *_typed("stderr", k), "l1", "n_runs"],
    )
    return df.astype({"start": "int64", "m": "int64", "n_runs": "int64"})


def kingman_beta_table(ms: list[int], expected: list[float], samples: list[np.ndarray]) -> pd.DataFrame:
    """Columns ``m, expected, mean, stderr, n_runs``."""
    n = np.array([s.size for s in samples])
    mean = np.array([np.mean(s) for s in samples])
    stderr = np.array([np.std(s, ddof=1) / np.sqrt(s.size) if s.size > 1 else 0.0 for s in samples])
    return pd.DataFrame({"m": ms, "expected": expected, "mean": mean, "stderr": stderr, "n_runs": n})


def coming_down_table(estimates: list[ComingDownEstimate]) -> pd.DataFrame:
    """Columns ``eps, eps_n_eps, stderr, limit, relative_error, n_runs``."""
    return pd.DataFrame(
        {
            "eps": [e.eps for e in estimates],
            "eps_n_eps": [e.mean for e in estimates],
            "stderr": [e.stderr for e in estimates],
            "limit": [e.limit for e in estimates],
            "relative_error": [e.relative_error for e in estimates],
            "n_runs": [e.n_runs for e in estimates],
        }
    )


def write_csv(df: pd.DataFrame, out_dir: str, name: str) -> str:
    """Write ``df`` as ``<out_dir>/<name>.csv`` and return the path."""
    path = os.path.join(out_dir, f"{name}.csv")
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    log.info(f"wrote {path} ({len(df)} rows)")
    return path
