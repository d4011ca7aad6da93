from replicoal.cli.app import Args, main, run
from replicoal.cli.commands import COMMANDS, CommandContext
from replicoal.cli.config import RunConfig, check_config, load_config, with_seed
from replicoal.cli.plot import plot_simplex, project_simplex
from replicoal.cli.tables import (
    bottleneck_table,
    ensemble_table,
    ode_table,
    trajectory_table,
    write_csv,
)

__all__ = [
    "Args",
    "bottleneck_table",
    "check_config",
    "CommandContext",
    "COMMANDS",
    "ensemble_table",
    "load_config",
    "main",
    "ode_table",
    "plot_simplex",
    "project_simplex",
    "run",
    "RunConfig",
    "trajectory_table",
    "with_seed",
    "write_csv",
]
