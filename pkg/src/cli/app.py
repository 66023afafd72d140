"""
Argument parsing and dispatch for the oamlab command line.

Exit codes: 0 success, 1 other library error, 2 netlist syntax error,
3 semantic or topology error, 4 builder error, 5 configuration error.
"""

from pathlib import Path
from typing import Optional, Sequence
import argparse
import logging
import sys

from dotenv import load_dotenv
import jsonschema

from src.core.config import DEFAULT_ALPHA, LOG_KEEP_RECENT
from src.core.errors import OamlabError
from src.core.utils import setup_logging
from src.models.protocol import EveKind, SiftingRule
from src.models.report import validate_report
from src.cli.commands import cmd_build, cmd_qkd, cmd_simulate, cmd_walk

# Project root (parent of src/cli/)
PROJECT_ROOT = Path(__file__).parent.parent.parent

COMMANDS = {
    "simulate": cmd_simulate,
    "build": cmd_build,
    "qkd": cmd_qkd,
    "walk": cmd_walk,
}


def _add_format(parser: argparse.ArgumentParser, default: str = "text") -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--json", dest="format", action="store_const", const="json", help="Print the JSON report")
    group.add_argument("--csv", dest="format", action="store_const", const="csv", help="Print plot-ready CSV")
    parser.set_defaults(format=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oamlab", description="OAM interferometry simulator")
    parser.add_argument("--quiet", action="store_true", help="Console warnings only, no log file")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="Detector distribution of a netlist")
    simulate.add_argument("netlist", type=str, help="Path to a .onl netlist")
    simulate.add_argument("--input", required=True, help='Input state, e.g. "S:7", "F:5" or "3=1,5=-1"')
    simulate.add_argument("--source", help="Source port receiving the input (default: the only source)")
    simulate.add_argument("--seq", help='Sequence kind or JSON spec (default: fibonacci)')
    simulate.add_argument("--samples", type=int, default=0, help="Also draw this many trials")
    simulate.add_argument("--seed", type=int, help="Seed for --samples (default: OAMLAB_SEED)")
    _add_format(simulate)

    build = sub.add_parser("build", help="Build and verify an apparatus ('list' to show all)")
    build.add_argument("apparatus", type=str)
    build.add_argument("--out", help="Netlist path; companion circuits go to <stem>.<key>.onl")
    build.add_argument("--param", action="append", metavar="KEY=VALUE", help="Builder parameter (repeatable)")
    build.add_argument("--values", help="Comma-separated OAM values")
    build.add_argument("--coeffs", help='Comma-separated complex coefficients, e.g. "1,-0.5,1j"')
    build.add_argument("--cells", type=int, help="RSG cell count")
    build.add_argument("--order", type=int, help="N-bonacci order")
    build.add_argument("--parity", help="Chain parity: odd, even or both")
    build.add_argument("--stride", type=int, help="Jump tree stride (1 or 2)")
    build.add_argument("--anchor", type=int, help="Sequence index anchoring a superposition")
    build.add_argument("--indices", help="Comma-separated sequence indices")
    build.add_argument("--seq", help="Sequence kind or JSON spec")
    _add_format(build)

    qkd = sub.add_parser("qkd", help="Run the key distribution protocol")
    qkd.add_argument("config", nargs="?", help="ProtocolConfig JSON file or inline JSON")
    qkd.add_argument("--seed", type=int)
    qkd.add_argument("--trials", type=int)
    qkd.add_argument("--m0", type=int)
    qkd.add_argument("--window", type=int, help="Window size N")
    qkd.add_argument("--seq", help="Sequence kind or JSON spec")
    qkd.add_argument("--eve", choices=[k.value for k in EveKind])
    qkd.add_argument("--eve-probability", type=float, default=1.0)
    qkd.add_argument("--alpha", type=float, help=f"Significance level (default {DEFAULT_ALPHA})")
    qkd.add_argument("--basis-probability", type=float)
    qkd.add_argument("--symbol-error-rate", type=float)
    qkd.add_argument("--sifting", choices=[r.value for r in SiftingRule])
    qkd.add_argument("--workers", type=int)
    qkd.add_argument("--transcript", help="Transcript path (JSON lines)")
    _add_format(qkd)

    walk = sub.add_parser("walk", help="Quantum walk on the Fibonacci chains")
    walk.add_argument("config", nargs="?", help="WalkConfig JSON file or inline JSON")
    walk.add_argument("--steps", type=int)
    walk.add_argument("--sites", type=int)
    walk.add_argument("--parity", type=int, choices=[0, 1])
    walk.add_argument("--start-site", type=int)
    walk.add_argument("--start-coin", choices=["c", "d"])
    mode = walk.add_mutually_exclusive_group()
    mode.add_argument("--coherent", dest="coherent", action="store_const", const=True)
    mode.add_argument("--measured", dest="coherent", action="store_const", const=False)
    walk.add_argument("--two-photon", action="store_true", help="Walk an entangled pair")
    walk.add_argument("--trajectories", type=int)
    walk.add_argument("--seed", type=int)
    _add_format(walk, default="csv")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.

    Returns:
        Process exit code
    """
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    setup_logging(PROJECT_ROOT, keep_recent=LOG_KEEP_RECENT, to_file=not args.quiet)
    logger = logging.getLogger(__name__)

    try:
        report, text = COMMANDS[args.command](args, argv)
        if args.format == "json":
            validate_report(report)
    except OamlabError as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except jsonschema.ValidationError as e:
        print(f"error: report does not match its schema: {e.message}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    sys.stdout.write(text)
    return 0
