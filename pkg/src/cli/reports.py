"""
Report documents written by the command line.

Every report carries the command, a status, the result body and the
canonical input, so that a report can be fed back as a spec file.
"""

from typing import Any, Dict, List, Optional

from ..symplectic.core import ValidationReport

STATUS_OK = "ok"
STATUS_NEGATIVE = "negative"

# Label and identity of each structural check.
CHECK_CONDITIONS = {
    "symplectic": ("symplectic identity", "S_k* J S_k = J"),
    "psi_hermitian": ("Hermitian weight", "Psi_k = Psi_k*"),
    "psi_isotropic": ("isotropic weight", "Psi_k* J Psi_k = 0"),
    "psi_semidefinite": ("semidefinite weight", "Psi_k >= 0"),
    "v_pairing_hermitian": ("symplectic-type pairing", "V_k* J S_k Hermitian"),
    "v_isotropic": ("isotropic slope", "V_k* J V_k = 0"),
    "psi_reconstruction": ("weight reconstruction", "Psi_k = J S_k J V_k* J"),
}


def check_rows(report: ValidationReport) -> List[Dict[str, Any]]:
    """One row per structural check with its label and the identity it tests."""
    rows = []
    for check in report.checks:
        row = check.to_dict()
        label, condition = CHECK_CONDITIONS.get(check.name, (check.name, check.name))
        row["label"] = label
        row["condition"] = condition
        rows.append(row)
    return rows


def build_report(
    command: str,
    negative: bool,
    result: Dict[str, Any],
    canonical: Optional[Dict[str, Any]],
) -> dict:
    report: Dict[str, Any] = {
        "command": command,
        "status": STATUS_NEGATIVE if negative else STATUS_OK,
        "result": result,
    }
    if canonical is not None:
        report["input"] = canonical
    return report


def error_report(command: str, kind: str, message: str) -> dict:
    return {
        "command": command,
        "status": "error",
        "error": {"type": kind, "message": message},
    }


def trajectory_rows(values, offset: int) -> List[Dict[str, Any]]:
    """Flat rows (k, component, re, im) of a single-column trajectory."""
    rows = []
    for i, vec in enumerate(values):
        for j, entry in enumerate(vec.ravel()):
            rows.append(
                {
                    "k": offset + i,
                    "component": j,
                    "real": float(entry.real),
                    "imag": float(entry.imag),
                }
            )
    return rows
