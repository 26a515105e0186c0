import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import symkernel

from .cli import run
from .config import KERNELS, build_config
from .errors import SymkernelError, UsageError

# Flag to track if logging has been configured
_logging_configured = False

CONFIG_ERRORS = ("usage", "catalog", "domain", "model", "hypothesis")


def setup_logging(debug: bool = False, log_file: Optional[str] = None) -> logging.Logger:
    """Configure the package logger once: stderr plus an optional log file"""
    global _logging_configured

    logger = logging.getLogger("SYMKERNEL")
    level = logging.DEBUG if debug else logging.INFO
    if _logging_configured:
        logger.setLevel(level)
        for handler in logger.handlers:
            handler.setLevel(level)
        return logger

    if logger.handlers:
        logger.handlers = []
    logger.setLevel(level)
    logger.propagate = False

    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    _logging_configured = True
    return logger


class _Parser(argparse.ArgumentParser):
    """Argument errors become UsageError so they share the JSON error record"""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="Catalog label, e.g. H3R, H2C, SL3R")
    common.add_argument("--config", type=Path, help="JSON experiment config")
    common.add_argument("--seed", type=int, help="Seed for Monte Carlo streams")
    common.add_argument("--threads", type=int, help="Worker threads")
    common.add_argument("--out", help="Output directory for reports")
    common.add_argument("--r", type=float, nargs="+", help="Distance grid")
    common.add_argument("--t", type=float, nargs="+", help="Time grid")
    common.add_argument("--s", type=float, nargs="+", help="Spectral parameter grid")
    common.add_argument("--epsilon", type=float, nargs="+", help="Ball radius grid")
    common.add_argument("--budget", type=int, help="Monte Carlo samples per point")
    common.add_argument("--quad-budget", type=int, help="Quadrature subintervals")
    common.add_argument("--alpha0", type=float, help="Bottom of the spectrum of L")
    common.add_argument(
        "--allow-outside",
        action="store_true",
        default=None,
        help="Evaluate envelopes below d = 2 with a warning instead of failing",
    )
    common.add_argument("--baseline-db", help="sqlite file recording validation baselines")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="symkernel",
        description="Kernel envelopes, volumes and critical exponents on symmetric spaces",
    )
    parser.add_argument(
        "--version", action="version", version=f"symkernel {symkernel.__version__}"
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--log-file", help="Also write the log to this file")

    common = _common_options()
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("spaces", parents=[common], help="List the catalog")
    envelope = commands.add_parser("envelope", parents=[common], help="Evaluate an envelope")
    envelope.add_argument("kernel", choices=KERNELS)
    commands.add_parser("volume", parents=[common], help="Volume envelope vs Monte Carlo")
    commands.add_parser("validate", parents=[common], help="Run the acceptance suite")
    lattice = commands.add_parser("lattice", parents=[common], help="Critical exponents")
    lattice.add_argument("--lattice", help="JSON lattice spec {model, generators, name}")
    lattice.add_argument("--depth", type=int, help="Maximum word length")
    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    return build_parser().parse_args(argv)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"command", "config", "debug", "log_file"}
    return {key: value for key, value in vars(args).items() if key not in skip}


def _error_record(error: SymkernelError) -> int:
    category = error.category
    sys.stderr.write(json.dumps({"error": category, "message": str(error)}) + "\n")
    return 2 if category in CONFIG_ERRORS else 3


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point: parse, configure logging, run, map errors to exit codes"""
    try:
        args = parse_args(argv)
    except UsageError as e:
        return _error_record(e)

    logger = setup_logging(args.debug, args.log_file)
    logger.debug(f"symkernel {symkernel.__version__}, Python {sys.version.split()[0]}")

    try:
        config = build_config(args.command, args.config, _overrides(args))
        result = run(config)
    except SymkernelError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        return _error_record(e)
    except (OSError, MemoryError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        sys.stderr.write(json.dumps({"error": "computation", "message": str(e)}) + "\n")
        return 3

    for path in result.paths:
        logger.info(f"Report: {path}")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
