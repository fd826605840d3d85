#!/usr/bin/env python3
"""
Main application entry point for ``symplectic-ext``.

Reads a system spec file, runs one subcommand and writes a deterministic
report to stdout. Exit codes: 0 ok, 1 negative verdict, 2 input error,
3 numerical failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

# Add src to Python path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.base import (  # noqa: E402
    AtkinsonFailureError,
    BaseClass,
    Config,
    ConfigurationError,
    ConvergenceError,
    DegenerateRelationError,
    PreconditionError,
    SpecFileError,
    SymplecticError,
)
from src.base.logger import add_global_file, set_global_level  # noqa: E402
from src.cli import (  # noqa: E402
    COMMANDS,
    CommandOutcome,
    SpecFileProcessor,
    error_report,
)
from src.symplectic.spectral import METHODS  # noqa: E402

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (
    AtkinsonFailureError,
    DegenerateRelationError,
    ConvergenceError,
    PreconditionError,
    np.linalg.LinAlgError,
)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", help="JSON configuration file (environment overrides it)"
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="-v for info, -vv for debug logging",
    )
    common.add_argument(
        "--format", choices=("json", "csv"), default="json", help="report format"
    )
    common.add_argument(
        "-o", "--output", help="write the report to a file instead of stdout"
    )

    parser = argparse.ArgumentParser(
        prog="symplectic-ext",
        description="Self-adjoint extensions of discrete symplectic systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_spec(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("spec", help="system spec file (or a report embedding one)")
        p.add_argument(
            "--truncation", type=int, help="truncation index for unbounded intervals"
        )
        return p

    with_spec("check", "validate the structural hypotheses of a system")

    solve = with_spec("solve", "solve the recursion from the spec's initial condition")
    solve.add_argument(
        "--lambda", dest="lam", help="spectral parameter, e.g. 0.5 or 1+2j"
    )

    classify = with_spec("classify", "limit point / limit circle classification")
    classify.add_argument(
        "--h-sequence", help="const:c, power:a, or a comma separated list"
    )
    classify.add_argument(
        "--T", type=float, default=0.0, help="lower bound for the h sequence"
    )

    extension = with_spec(
        "extension", "validate boundary data as a self-adjoint extension"
    )
    extension.add_argument(
        "--canonicalize",
        action="store_true",
        help="report the separated/coupled form",
    )
    extension.add_argument(
        "--krein",
        action="store_true",
        help="report the Krein-von Neumann extension",
    )
    extension.add_argument(
        "--compare", help="file with a second boundary pair to test for equivalence"
    )

    eig = with_spec("eigenvalues", "eigenvalues of a finite boundary value problem")
    eig.add_argument(
        "--require-self-adjoint",
        action="store_true",
        help="exit 1 if the pair is not self-adjoint",
    )
    eig.add_argument(
        "--method",
        choices=METHODS,
        default="auto",
        help="root finder: block pencil (auto), companion or chebyshev",
    )

    bracket = sub.add_parser(
        "bracket", parents=[common], help="boundary bracket of two trajectories"
    )
    bracket.add_argument("first", help="trajectory file (or a solve report)")
    bracket.add_argument("second", help="trajectory file (or a solve report)")
    bracket.add_argument("--left", type=int, help="left index (default: common start)")
    bracket.add_argument("--right", type=int, help="right index (default: common stop)")
    return parser


class SymplecticApp(BaseClass):
    """
    Command line application: owns the configuration, the spec processor
    and the mapping from outcomes and exceptions to exit codes.
    """

    def __init__(self, config_file: Optional[str] = None, verbosity: int = 0):
        if config_file and not Path(config_file).exists():
            raise ConfigurationError(f"Config file {config_file} does not exist")
        super().__init__(config=Config(config_file), name="SymplecticApp")
        self.verbosity = verbosity
        self.processor = SpecFileProcessor(config=self.config)

    def initialize(self) -> bool:
        level_name = str(self.get_config("log_level", "WARNING")).upper()
        level = logging.getLevelName(level_name)
        if not isinstance(level, int):
            raise ConfigurationError(f"Unknown log level {level_name!r}")
        if self.verbosity:
            level = logging.INFO if self.verbosity == 1 else logging.DEBUG
        set_global_level(level)
        log_file = self.get_config("log_file")
        if log_file:
            add_global_file(str(log_file))
        self.log_debug(f"tolerance {self.tolerance:.3e}")
        return self.processor.initialize()

    def cleanup(self) -> None:
        self.processor.cleanup()

    def render(self, outcome: CommandOutcome, fmt: str) -> str:
        if fmt == "csv":
            if outcome.rows is not None:
                return self.processor.dumps_csv(outcome.rows)
            self.log_warning("this command has no tabular output; writing JSON")
        return self.processor.dumps_json(outcome.report)

    def emit(self, text: str, output: Optional[str]) -> None:
        if output:
            self.processor.write_text(text, output)
        else:
            sys.stdout.write(text)

    def run(self, args: argparse.Namespace) -> int:
        """Run one command and return its exit code."""
        try:
            outcome = COMMANDS[args.command](self.processor, args, self.tolerance)
        except (SpecFileError, ConfigurationError, FileNotFoundError) as exc:
            return self._fail(args, exc, EXIT_INPUT)
        except NUMERICAL_ERRORS as exc:
            return self._fail(args, exc, EXIT_NUMERICAL)
        except SymplecticError as exc:
            return self._fail(args, exc, EXIT_INPUT)
        self.emit(self.render(outcome, args.format), args.output)
        return EXIT_NEGATIVE if outcome.negative else EXIT_OK

    def _fail(self, args: argparse.Namespace, exc: Exception, code: int) -> int:
        self.log_error(f"{args.command}: {exc}")
        report = error_report(args.command, type(exc).__name__, str(exc))
        self.emit(self.processor.dumps_json(report), args.output)
        return code


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the command and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT

    try:
        app = SymplecticApp(args.config, args.verbose)
        app.initialize()
    except ConfigurationError as exc:
        sys.stderr.write(f"symplectic-ext: {exc}\n")
        return EXIT_INPUT

    try:
        return app.run(args)
    finally:
        app.cleanup()


if __name__ == "__main__":
    sys.exit(main())
