"""
Command implementations behind the ``symplectic-ext`` subcommands.

Each command takes the parsed arguments, the spec processor and the
effective tolerance and returns a :class:`CommandOutcome`; mapping
outcomes and exceptions to exit codes is the application's job.
"""

import argparse
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

from ..base.exceptions import SpecFileError
from ..symplectic.classify import (
    LIMIT_CIRCLE,
    LIMIT_POINT,
    UNDETERMINED,
    classify_system,
    find_atkinson_interval,
)
from ..symplectic.core import boundary_bracket
from ..symplectic.extensions import (
    FINITE_CASE,
    LIMIT_CIRCLE_CASE,
    LIMIT_POINT_CASE,
    canonicalize_scalar,
    equivalent,
    krein_von_neumann,
    validate_extension,
)
from ..symplectic.solver import recursion_residual, solve_ivp
from ..symplectic.spectral import eigenvalues
from ..symplectic.system import validate_hypothesis
from .reports import build_report, check_rows, trajectory_rows
from .spec_file import SpecFileProcessor, SystemSpec

DEFAULT_CHECK_TRUNCATION = 256
DEFAULT_CLASSIFY_TRUNCATION = 4096


@dataclass
class CommandOutcome:
    """Report document, whether its verdict is negative, and optional CSV rows."""

    report: Dict[str, Any]
    negative: bool = False
    rows: Optional[List[Dict[str, Any]]] = None


def parse_h_sequence(text: str) -> Callable[[int], float]:
    """
    ``const:c`` for h_k = c, ``power:a`` for h_k = (k+1)^a, or a comma list of values.
    """
    kind, _, value = text.partition(":")
    try:
        if kind == "const" and value:
            constant = float(value)
            return lambda k: constant
        if kind == "power" and value:
            exponent = float(value)
            return lambda k: float(k + 1) ** exponent
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise SpecFileError(
            f"cannot read h sequence {text!r}", field="--h-sequence"
        ) from exc

    def lookup(k: int) -> float:
        return values[k] if k < len(values) else values[-1]

    return lookup


def _load(processor: SpecFileProcessor, args: argparse.Namespace) -> SystemSpec:
    return processor.load(args.spec)


def _truncation(
    spec: SystemSpec, args: argparse.Namespace, default: int
) -> Optional[int]:
    if spec.system.is_finite:
        return None
    return args.truncation if args.truncation is not None else default


def cmd_check(
    processor: SpecFileProcessor, args: argparse.Namespace, tol: float
) -> CommandOutcome:
    spec = _load(processor, args)
    truncation = _truncation(spec, args, DEFAULT_CHECK_TRUNCATION)
    report = validate_hypothesis(spec.system, truncation, tol)
    atkinson = find_atkinson_interval(spec.system, tol=tol)
    result = {
        "passed": report.passed,
        "truncation": truncation,
        "checks": check_rows(report),
        "atkinson": None if atkinson is None else atkinson.to_dict(),
    }
    negative = not report.passed
    return CommandOutcome(
        build_report("check", negative, result, spec.canonical), negative
    )


def cmd_solve(
    processor: SpecFileProcessor, args: argparse.Namespace, tol: float
) -> CommandOutcome:
    spec = _load(processor, args)
    if not spec.solve:
        raise SpecFileError("required by the solve command", field="solve")
    lam = complex(args.lam) if args.lam is not None else spec.solve["lambda"]
    truncation = _truncation(spec, args, DEFAULT_CHECK_TRUNCATION)
    traj = solve_ivp(
        spec.system, lam, spec.solve["k0"], spec.solve["z0"], truncation=truncation
    )
    values = traj.values[:, :, 0]
    result = {
        "lambda": lam,
        "k0": spec.solve["k0"],
        "recursion_residual": recursion_residual(spec.system, lam, traj),
        "trajectory": {"offset": traj.offset, "values": values},
    }
    rows = trajectory_rows(values, traj.offset)
    report = build_report("solve", False, result, spec.canonical)
    return CommandOutcome(report, False, rows)


def cmd_classify(
    processor: SpecFileProcessor, args: argparse.Namespace, tol: float
) -> CommandOutcome:
    spec = _load(processor, args)
    h = parse_h_sequence(args.h_sequence) if args.h_sequence else None
    truncation = _truncation(spec, args, DEFAULT_CLASSIFY_TRUNCATION)
    report = classify_system(spec.system, truncation, h=h, T=args.T, tol=tol)
    negative = report.verdict == UNDETERMINED
    return CommandOutcome(
        build_report("classify", negative, report.to_dict(), spec.canonical), negative
    )


def _extension_case(spec: SystemSpec, args: argparse.Namespace, tol: float) -> str:
    if spec.system.is_finite:
        return FINITE_CASE
    truncation = _truncation(spec, args, DEFAULT_CLASSIFY_TRUNCATION)
    verdict = classify_system(spec.system, truncation, tol=tol).verdict
    if verdict == LIMIT_POINT:
        return LIMIT_POINT_CASE
    if verdict == LIMIT_CIRCLE:
        return LIMIT_CIRCLE_CASE
    raise SpecFileError(
        f"classification is {verdict!r}; use a finite interval or a longer truncation",
        field="N",
    )


def cmd_extension(
    processor: SpecFileProcessor, args: argparse.Namespace, tol: float
) -> CommandOutcome:
    spec = _load(processor, args)
    if spec.boundary is None and not args.krein:
        raise SpecFileError("required unless --krein is given", field="boundary")
    result: Dict[str, Any] = {}
    negative = False
    if spec.boundary is not None:
        case = _extension_case(spec, args, tol)
        validation = validate_extension(spec.system, spec.boundary, case=case, tol=tol)
        result["boundary_form"] = spec.boundary_form
        result["validation"] = validation.to_dict()
        negative = not validation.self_adjoint
        scalar_finite = spec.system.n == 1 and spec.system.is_finite
        if args.canonicalize and validation.self_adjoint and scalar_finite:
            form = canonicalize_scalar(spec.boundary, tol)
            result["canonical_form"] = form.to_dict()
        compare = spec.compare
        if args.compare:
            data = processor.read_json(args.compare)
            value = data.get("boundary", data) if isinstance(data, dict) else data
            compare, _ = processor.parse_boundary(value, spec.system.n, "compare")
        if compare is not None:
            result["equivalence"] = equivalent(spec.boundary, compare).to_dict()
    if args.krein:
        result["krein"] = krein_von_neumann(spec.system, tol=tol).to_dict()
    report = build_report("extension", negative, result, spec.canonical)
    return CommandOutcome(report, negative)


def cmd_eigenvalues(
    processor: SpecFileProcessor, args: argparse.Namespace, tol: float
) -> CommandOutcome:
    spec = _load(processor, args)
    if spec.boundary is None:
        raise SpecFileError("required by the eigenvalues command", field="boundary")
    spectrum = eigenvalues(spec.system, spec.boundary, method=args.method, tol=tol)
    negative = bool(args.require_self_adjoint and not spectrum.self_adjoint)
    report = build_report("eigenvalues", negative, spectrum.to_dict(), spec.canonical)
    return CommandOutcome(report, negative, spectrum.to_rows())


def cmd_bracket(
    processor: SpecFileProcessor, args: argparse.Namespace, tol: float
) -> CommandOutcome:
    z = processor.load_trajectory(args.first)
    w = processor.load_trajectory(args.second)
    value = boundary_bracket(z, w, args.left, args.right)
    left = max(z.start, w.start) if args.left is None else args.left
    right = min(z.stop, w.stop) if args.right is None else args.right
    result = {
        "bracket": value,
        "left": left,
        "right": right,
        "vanishes": bool(abs(value) <= tol),
    }
    canonical = {
        "first": {"offset": z.offset, "values": z.values[:, :, 0]},
        "second": {"offset": w.offset, "values": w.values[:, :, 0]},
    }
    return CommandOutcome(build_report("bracket", False, result, canonical))


COMMANDS = {
    "check": cmd_check,
    "solve": cmd_solve,
    "classify": cmd_classify,
    "extension": cmd_extension,
    "eigenvalues": cmd_eigenvalues,
    "bracket": cmd_bracket,
}

