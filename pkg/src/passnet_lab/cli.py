"""Command-line entry point.

``passnet-lab <subcommand> --config <path> [--seed N] [--mode ...]
[--granularity ...] [--with-draws]``. Exit codes: 0 ok, 2 config error,
3 data error, 4 numeric failure. Errors print a single machine-parsable
``<ErrorClass>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, PassnetLabError
from .pipeline import STAGE_FUNCTIONS

LOCK_NAME = ".passnet-lab.lock"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passnet-lab",
        description="Passing-network analytics and match-outcome prediction pipeline.",
    )
    parser.add_argument("subcommand", choices=sorted(STAGE_FUNCTIONS))
    parser.add_argument("--config", "-c", required=True, help="path to the key=value config file")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--mode", choices=["nets", "stats", "mixed"], help="feature mode override")
    parser.add_argument(
        "--granularity", choices=["full", "halves"], help="network granularity override"
    )
    parser.add_argument(
        "--with-draws",
        action="store_true",
        help="keep drawn matches (ternary win/draw/loss target)",
    )
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.mode:
        overrides["mode"] = args.mode
    if args.granularity:
        overrides["granularity"] = args.granularity
    if args.with_draws:
        overrides["target_kind"] = "ternary"
    return overrides


class _PipelineLock:
    """One invocation per pipeline directory; stale locks must be removed by hand."""

    def __init__(self, directory: Path):
        self.path = directory / LOCK_NAME

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            self.path.open("x").close()
        except FileExistsError:
            raise ConfigError(
                f"pipeline directory is locked by another invocation ({self.path})"
            ) from None
        return self

    def __exit__(self, *exc_info):
        self.path.unlink(missing_ok=True)
        return False


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(Path(args.config), _overrides(args))
        if args.subcommand != "synth":
            for path in (config.events_path, config.matches_path):
                if not path.exists():
                    raise ConfigError(f"configured input path does not exist: {path}")
        with _PipelineLock(config.output_dir):
            ran = STAGE_FUNCTIONS[args.subcommand](config)
        if ran:
            print(f"{args.subcommand}: done", file=sys.stderr)
        return 0
    except PassnetLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
