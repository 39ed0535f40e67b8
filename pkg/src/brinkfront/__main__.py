"""CLI entry point: `python -m brinkfront <command> [options]`."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, load
from .diagnostics import FitUnreliable, NotDetected
from .freeboundary import NoAnsatzSolution
from .runner import run
from .schemes import CFLViolation
from .specfun import BesselDomainError, BesselOverflowError

# ANSI colour codes, disabled when not a TTY or when NO_COLOR is set
_USE_COLOR = sys.stderr.isatty() and "NO_COLOR" not in os.environ

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2

# ValueError covers invalid values met inside a run, e.g. a degenerate geometry
_SOLVER_ERRORS = (
    NoAnsatzSolution,
    CFLViolation,
    NotDetected,
    FitUnreliable,
    BesselDomainError,
    BesselOverflowError,
    ValueError,
)

_DIMS = {"1d": 1, "2d": 2, "3d": 3}


def _c(code: str, text: str) -> str:
    """Wrap *text* in an ANSI colour escape, if colours are enabled."""
    return f"\033[{code}m{text}\033[0m" if _USE_COLOR else text


def _build_parser() -> argparse.ArgumentParser:
    from . import __version__

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="configuration file (.cfg or .json)")
    common.add_argument(
        "--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides",
        help="override a configuration key (repeatable)",
    )
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="parallel sweep entries")
    common.add_argument("--seed", type=int, default=None, help="reserved; runs are deterministic")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")

    ap = argparse.ArgumentParser(
        prog="brinkfront",
        description="Tumor fronts under the Brinkman cell density model",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, text in (
        ("analytic", "integrate the front DAE, write front.csv"),
        ("profile", "sample the three-zone solution, write profile.csv"),
        ("relation", "tabulate R1 against R, write relation.csv"),
    ):
        cmd = sub.add_parser(name, parents=[common], help=text)
        cmd.add_argument("dim", choices=sorted(_DIMS))
    sub.add_parser("sim1d", parents=[common], help="1D PDE run")
    sub.add_parser("simradial", parents=[common], help="radially symmetric 2D PDE run")
    cmp = sub.add_parser("compare", parents=[common], help="PDE against front DAE")
    cmp.add_argument("geometry", choices=["1d", "radial"])
    sub.add_parser("sweep", parents=[common], help="parameter sweep, write summary.csv")
    return ap


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv if argv is not None else sys.argv[1:])
    _configure_logging(args)

    overrides = list(args.overrides)
    if getattr(args, "dim", None) is not None:
        overrides.append(f"geometry.dim={_DIMS[args.dim]}")
    if args.jobs < 1:
        print(_c("31", "Configuration error: --jobs must be >= 1"), file=sys.stderr)
        return EXIT_CONFIG

    try:
        cfg = load(args.command, args.config, overrides, args.out, args.seed)
    except ConfigError as exc:
        print(_c("33", f"Configuration error: {exc}"), file=sys.stderr)
        return EXIT_CONFIG

    try:
        summary = run(cfg, jobs=args.jobs, variant=getattr(args, "geometry", None))
    except _SOLVER_ERRORS as exc:
        detail = ""
        if isinstance(exc, NoAnsatzSolution):
            detail = f" [dim={exc.dim}, {exc.params}]"
        print(_c("31", f"Solver error: {exc}{detail}"), file=sys.stderr)
        return EXIT_SOLVER
    except ConfigError as exc:
        print(_c("33", f"Configuration error: {exc}"), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(_c("33", f"Output error: {exc}"), file=sys.stderr)
        return EXIT_CONFIG

    for path in summary.files:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
