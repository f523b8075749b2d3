"""Command-line entry point.

Exit codes: 0 success, 1 usage or validation error, 2 I/O error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from ..core.config import Config
from ..core.exceptions import UnclabError
from .commands import COMMANDS, RunConfig

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_IO = 2


class UsageError(UnclabError):
    """Bad command-line syntax."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed", type=int, help="RNG seed (default: $UNCLAB_SEED or 0)"
    )
    parser.add_argument("--output", "-o", help="output file (default: stdout)")
    parser.add_argument("--format", choices=Config.OUTPUT_FORMATS, help="csv or json")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )


def _add_noise(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--phi",
        help=f"detuning grid START:STOP:COUNT in degrees ({Config.DEFAULT_PHI_GRID})",
    )
    parser.add_argument("--counts", type=int, help="counts per prepared state")
    parser.add_argument("--contrast", type=float, help="analyzer contrast in (0, 1]")
    parser.add_argument(
        "--misalign-deg", type=float, help="coherent misalignment angle"
    )
    parser.add_argument(
        "--poisson", action="store_true", default=None, help="Poisson counts per cell"
    )


def _add_estimation(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bootstrap", type=int, help="bootstrap resamples")
    parser.add_argument(
        "--systematic-deg", type=float, help="misalignment for the systematic term"
    )


def create_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="unclab",
        description="Error-disturbance relations for successive spin measurements.",
    )
    parser.add_argument(
        "--version", action="version", version=f"{Config.APP_NAME} {Config.APP_VERSION}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    sweep = subparsers.add_parser("sweep", help="eps, eta and relations over a grid")
    _add_noise(sweep)
    sweep.add_argument(
        "--analytic", action="store_true", default=None, help="use the closed forms"
    )
    sweep.add_argument("--workers", type=int, help="threads for simulated points")
    _add_estimation(sweep)
    _add_common(sweep)

    simulate = subparsers.add_parser("simulate", help="simulated count tables")
    _add_noise(simulate)
    _add_common(simulate)

    estimate = subparsers.add_parser("estimate", help="estimate from a count file")
    estimate.add_argument("input", help="CSV in the simulate schema")
    estimate.add_argument(
        "--contrast", type=float, help="divide analyzer signals by this contrast"
    )
    _add_estimation(estimate)
    _add_common(estimate)

    audit = subparsers.add_parser("audit", help="randomized relation audits")
    audit.add_argument("--draws", type=int, help="projective draws")
    audit.add_argument("--indirect-draws", type=int, help="indirect-model draws")
    audit.add_argument("--shards", type=int, help="parallel audit shards")
    _add_common(audit)
    return parser


def configure_logging(verbosity: int = 0) -> None:
    if verbosity >= 2:
        level = "DEBUG"
    elif verbosity == 1:
        level = "INFO"
    else:
        level = Config.log_level()
    logging.basicConfig(
        stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    logging.getLogger().setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code."""
    try:
        args = create_parser().parse_args(argv)
    except UsageError as exc:
        print(f"unclab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    options = vars(args)
    configure_logging(options.pop("verbose"))
    try:
        config = RunConfig(**{k: v for k, v in options.items() if v is not None})
        logger.info("Running %s with seed %d", config.command, config.seed)
        return COMMANDS[config.command](config)
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO
    except (UnclabError, ValidationError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
