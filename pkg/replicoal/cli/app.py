import json
import os
import sys

from tap import Tap

from replicoal.cli.commands import COMMANDS, CommandContext
from replicoal.cli.config import RunConfig, load_config, with_seed
from replicoal.simulator import resolve_threads
from replicoal.utils import ConfigError, NumericalError, json_default, log

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class Args(Tap):
    command: str  # sub-command to run
    config: str  # experiment configuration, JSON
    seed: int | None = None  # master seed, overrides run.seed
    out: str = "./out"  # output directory
    threads: int | None = None  # worker threads, defaults to REPLICOAL_THREADS or 1
    quiet: bool = False  # log warnings and errors only

    def configure(self):
        self.add_argument("command", choices=list(COMMANDS))


def write_effective_config(cfg: RunConfig, out_dir: str) -> str:
    """Write the configuration actually used, so that re-running with it reproduces the outputs."""
    path = os.path.join(out_dir, "effective_config.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(cfg, f, indent=2, sort_keys=True, default=json_default)
        f.write("\n")
    return path


def run(args: Args) -> int:
    """
    Run one sub-command and print its one-line JSON summary.

    Returns: process exit code, 0 on success, 2 for configuration errors, 3 for numerical failures.
    """
    with log.labelled(args.command):
        try:
            cfg = with_seed(load_config(args.config), args.seed)
            threads = resolve_threads(args.threads)
            os.makedirs(args.out, exist_ok=True)
            stem = cfg.get("output", {}).get("stem", args.command.replace("-", "_"))
            write_effective_config(cfg, args.out)
            log.info(f"starting, outputs in {args.out}")
            summary = COMMANDS[args.command](cfg, CommandContext(args.out, threads, stem))
        except ConfigError as e:
            log.error(f"configuration error at {e.key}: {e}")
            return EXIT_CONFIG
        except NumericalError as e:
            log.error(f"numerical failure: {e}")
            return EXIT_NUMERICAL
        except ValueError as e:
            log.error(f"invalid configuration: {e}")
            return EXIT_CONFIG

    print(json.dumps({"command": args.command, **summary}, default=json_default))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = Args().parse_args(argv)
    if args.quiet:
        log.setLevel("WARNING")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
