"""
End-to-end tests for the ``symplectic-ext`` command line.
"""

import json
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from main import EXIT_INPUT, EXIT_NEGATIVE, EXIT_NUMERICAL, EXIT_OK, main  # noqa: E402

UNIT_SL = {
    "kind": "sturm_liouville",
    "N": 3,
    "p": [-1.0] * 5,
    "q": [0.0] * 4,
    "w": [1.0] * 4,
}
UNBOUNDED_UNIT = {
    "kind": "sturm_liouville",
    "N": "infinite",
    "generator": {"name": "sl_unit"},
}


def write_spec(tmp_path, data, name="spec.json"):
    path = tmp_path / name
    text = data if isinstance(data, str) else json.dumps(data)
    path.write_text(text, encoding="utf-8")
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


class TestCheckCommand:
    """Test cases for ``check``."""

    def test_valid_system(self, tmp_path, capsys):
        code, report = run(capsys, ["check", write_spec(tmp_path, UNIT_SL)])
        assert code == EXIT_OK
        assert report["status"] == "ok"
        assert report["result"]["passed"]
        assert report["result"]["checks"][0]["condition"] == "S_k* J S_k = J"
        labels = [check["label"] for check in report["result"]["checks"]]
        assert labels[0] == "symplectic identity"
        assert "weight reconstruction" in labels
        assert report["result"]["atkinson"]["interval"] == [0, 1]
        assert report["input"]["kind"] == "sturm_liouville"

    def test_non_symplectic_is_negative(self, tmp_path, capsys):
        spec = {
            "kind": "raw",
            "n": 1,
            "N": 0,
            "S": [[[2.0, 0.0], [0.0, 2.0]]],
            "Psi": [[[1.0, 0.0], [0.0, 0.0]]],
        }
        code, report = run(capsys, ["check", write_spec(tmp_path, spec)])
        assert code == EXIT_NEGATIVE
        assert report["status"] == "negative"
        assert not report["result"]["checks"][0]["passed"]

    def test_unbounded_generator(self, tmp_path, capsys):
        spec = dict(UNBOUNDED_UNIT, generator={"name": "sl_inverse_square_weight"})
        argv = ["check", write_spec(tmp_path, spec), "--truncation", "64"]
        code, report = run(capsys, argv)
        assert code == EXIT_OK
        assert report["result"]["truncation"] == 64
        assert report["input"]["N"] == "infinite"


class TestSolveAndBracket:
    """Test cases for ``solve`` and ``bracket``."""

    def test_backward_fibonacci(self, tmp_path, capsys):
        spec = dict(UNIT_SL, solve={"lambda": 1.0, "k0": 4, "z0": [1.0, 0.0]})
        code, report = run(capsys, ["solve", write_spec(tmp_path, spec)])
        assert code == EXIT_OK
        values = report["result"]["trajectory"]["values"]
        assert values[0] == [[13.0, 0.0], [21.0, 0.0]]
        assert values[4] == [[1.0, 0.0], [0.0, 0.0]]
        assert report["result"]["recursion_residual"] == 0.0

    def test_lambda_override(self, tmp_path, capsys):
        spec = dict(UNIT_SL, solve={"lambda": 1.0, "k0": 4, "z0": [1.0, 0.0]})
        argv = ["solve", write_spec(tmp_path, spec), "--lambda", "0"]
        code, report = run(capsys, argv)
        assert code == EXIT_OK
        assert report["result"]["lambda"] == [0.0, 0.0]
        values = report["result"]["trajectory"]["values"]
        assert all(v == [[1.0, 0.0], [0.0, 0.0]] for v in values)

    def test_csv_rows(self, tmp_path, capsys):
        spec = dict(UNIT_SL, solve={"lambda": 1.0, "k0": 4, "z0": [1.0, 0.0]})
        argv = ["solve", write_spec(tmp_path, spec), "--format", "csv"]
        code, out = run(capsys, argv)
        lines = out.strip().splitlines()
        assert code == EXIT_OK
        assert lines[0] == "k,component,real,imag"
        assert len(lines) == 1 + 5 * 2

    def test_missing_solve_block(self, tmp_path, capsys):
        code, report = run(capsys, ["solve", write_spec(tmp_path, UNIT_SL)])
        assert code == EXIT_INPUT
        assert report["error"]["type"] == "SpecFileError"

    def test_bracket_of_solve_reports(self, tmp_path, capsys):
        """A real solution paired with itself has a vanishing bracket."""
        spec = dict(UNIT_SL, solve={"lambda": 1.0, "k0": 4, "z0": [1.0, 0.0]})
        out_path = str(tmp_path / "solution.json")
        assert main(["solve", write_spec(tmp_path, spec), "-o", out_path]) == EXIT_OK
        assert capsys.readouterr().out == ""
        code, report = run(capsys, ["bracket", out_path, out_path])
        assert code == EXIT_OK
        assert report["result"]["vanishes"]
        assert report["result"]["left"] == 0
        assert report["result"]["right"] == 4

    def test_bracket_of_hand_trajectories(self, tmp_path, capsys):
        """z_0 = (1, 0), w_0 = (0, 1) and zero at index 1 gives -z_0* J w_0 = -1."""
        z = {"offset": 0, "values": [[1.0, 0.0], [0.0, 0.0]]}
        w = {"offset": 0, "values": [[0.0, 1.0], [0.0, 0.0]]}
        first = write_spec(tmp_path, z, "z.json")
        second = write_spec(tmp_path, w, "w.json")
        code, report = run(capsys, ["bracket", first, second])
        assert code == EXIT_OK
        assert report["result"]["bracket"] == [-1.0, 0.0]
        assert not report["result"]["vanishes"]


class TestClassifyCommand:
    """Test cases for ``classify``."""

    def test_finite_interval(self, tmp_path, capsys):
        code, report = run(capsys, ["classify", write_spec(tmp_path, UNIT_SL)])
        assert code == EXIT_OK
        assert report["result"]["verdict"] == "limit circle (finite interval)"
        assert report["result"]["atkinson"]["interval"] == [0, 1]

    def test_tolerance_reaches_atkinson(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("SYMPL_EXT_TOL", "1000")
        code, report = run(capsys, ["classify", write_spec(tmp_path, UNIT_SL)])
        assert code == EXIT_OK
        assert report["result"]["atkinson"] is None

    def test_unit_weight_limit_point(self, tmp_path, capsys):
        argv = ["classify", write_spec(tmp_path, UNBOUNDED_UNIT), "--truncation", "512"]
        code, report = run(capsys, argv)
        assert code == EXIT_OK
        assert report["result"]["verdict"] == "limit point"
        assert report["result"]["criteria"]["hinton_lewis"]["divergent"]

    def test_bad_h_sequence(self, tmp_path, capsys):
        path = write_spec(tmp_path, UNBOUNDED_UNIT)
        argv = ["classify", path, "--h-sequence", "const:x"]
        code, report = run(capsys, argv)
        assert code == EXIT_INPUT
        assert report["status"] == "error"


class TestExtensionCommand:
    """Test cases for ``extension``."""

    def test_periodic_canonical_form(self, tmp_path, capsys):
        spec = dict(UNIT_SL, boundary="periodic")
        argv = ["extension", write_spec(tmp_path, spec), "--canonicalize"]
        code, report = run(capsys, argv)
        assert code == EXIT_OK
        assert report["result"]["validation"]["verdict"] == "self-adjoint"
        assert report["result"]["canonical_form"]["form"] == "coupled"
        assert report["result"]["boundary_form"] == "periodic"

    def test_not_self_adjoint(self, tmp_path, capsys):
        boundary = {"M": [[1.0, 0.0], [0.0, 1.0]], "L": [[2.0, 0.0], [0.0, 2.0]]}
        spec = dict(UNIT_SL, boundary=boundary)
        code, report = run(capsys, ["extension", write_spec(tmp_path, spec)])
        assert code == EXIT_NEGATIVE
        assert report["result"]["validation"]["verdict"] == "not self-adjoint"
        assert report["result"]["validation"]["residual"] == pytest.approx(3.0)

    def test_equivalent_compare(self, tmp_path, capsys):
        scaled = {"M": [[2.0, 0.0], [0.0, 0.0]], "L": [[0.0, 0.0], [5.0, 0.0]]}
        spec = dict(UNIT_SL, boundary="dirichlet", compare=scaled)
        code, report = run(capsys, ["extension", write_spec(tmp_path, spec)])
        assert code == EXIT_OK
        assert report["result"]["equivalence"]["equivalent"]

    def test_krein(self, tmp_path, capsys):
        spec = {"kind": "raw", "n": 1, "N": 3, "generator": {"name": "shear"}}
        code, report = run(capsys, ["extension", write_spec(tmp_path, spec), "--krein"])
        assert code == EXIT_OK
        assert report["result"]["krein"]["branch"] == "b_nonzero"

    def test_needs_boundary(self, tmp_path, capsys):
        code, report = run(capsys, ["extension", write_spec(tmp_path, UNIT_SL)])
        assert code == EXIT_INPUT


class TestEigenvaluesCommand:
    """Test cases for ``eigenvalues``."""

    def test_dirichlet(self, tmp_path, capsys):
        spec = dict(
            UNIT_SL, N=2, p=[-1.0] * 4, q=[0.0] * 3, w=[1.0] * 3, boundary="dirichlet"
        )
        code, report = run(capsys, ["eigenvalues", write_spec(tmp_path, spec)])
        assert code == EXIT_OK
        assert report["result"]["count"] == 2
        reals = [row["real"] for row in report["result"]["eigenvalues"]]
        assert reals == pytest.approx([-3.0, -1.0], abs=1e-10)

    def test_csv(self, tmp_path, capsys):
        spec = dict(UNIT_SL, boundary="dirichlet")
        argv = ["eigenvalues", write_spec(tmp_path, spec), "--format", "csv"]
        code, out = run(capsys, argv)
        lines = out.strip().splitlines()
        assert code == EXIT_OK
        assert lines[0] == "index,real,imag,multiplicity,residual"
        assert len(lines) == 1 + 3

    def test_report_as_input(self, tmp_path, capsys):
        """A report embeds its canonical input and can be read back as a spec."""
        spec = dict(UNIT_SL, boundary="dirichlet")
        saved = str(tmp_path / "check.json")
        assert main(["check", write_spec(tmp_path, spec), "-o", saved]) == EXIT_OK
        code, report = run(capsys, ["eigenvalues", saved])
        assert code == EXIT_OK
        assert report["result"]["count"] == 3

    def test_require_self_adjoint(self, tmp_path, capsys):
        boundary = {"M": [[0.0, 0.0], [0.0, 0.0]], "L": [[1.0, 0.0], [0.0, 1.0]]}
        spec = dict(UNIT_SL, boundary=boundary)
        argv = ["eigenvalues", write_spec(tmp_path, spec), "--require-self-adjoint"]
        code, report = run(capsys, argv)
        assert code == EXIT_NEGATIVE
        assert report["result"]["count"] == 0

    def test_degenerate_relation(self, tmp_path, capsys):
        boundary = {"M": [[0.0, 0.0], [0.0, 0.0]], "L": [[0.0, 0.0], [0.0, 0.0]]}
        spec = dict(UNIT_SL, boundary=boundary)
        code, report = run(capsys, ["eigenvalues", write_spec(tmp_path, spec)])
        assert code == EXIT_NUMERICAL
        assert report["error"]["type"] == "DegenerateRelationError"

    def test_overflow_is_numerical_failure(self, tmp_path, capsys):
        big = [[1e100, 0.0], [0.0, 1e-100]]
        spec = {
            "kind": "raw",
            "n": 1,
            "N": 3,
            "S": [big] * 4,
            "Psi": [[[1.0, 0.0], [0.0, 0.0]]] * 4,
            "boundary": "dirichlet",
        }
        argv = ["eigenvalues", write_spec(tmp_path, spec), "--method", "companion"]
        code, report = run(capsys, argv)
        assert code == EXIT_NUMERICAL
        assert report["error"]["type"] == "ConvergenceError"

    def test_method_choice(self, tmp_path, capsys):
        spec = dict(UNIT_SL, boundary="dirichlet")
        argv = ["eigenvalues", write_spec(tmp_path, spec), "--method", "chebyshev"]
        code, report = run(capsys, argv)
        assert code == EXIT_OK
        assert report["result"]["method"] == "chebyshev"
        assert report["result"]["count"] == 3

    def test_unbounded_is_numerical_failure(self, tmp_path, capsys):
        spec = dict(UNBOUNDED_UNIT, boundary="dirichlet")
        code, report = run(capsys, ["eigenvalues", write_spec(tmp_path, spec)])
        assert code == EXIT_NUMERICAL
        assert report["error"]["type"] == "PreconditionError"


class TestInputErrors:
    """Test cases for malformed input."""

    def test_invalid_json(self, tmp_path, capsys):
        code, report = run(capsys, ["check", write_spec(tmp_path, "{\"kind\": ")])
        assert code == EXIT_INPUT
        assert "line 1" in report["error"]["message"]

    def test_unknown_kind(self, tmp_path, capsys):
        spec = {"kind": "hamiltonian", "N": 2}
        code, report = run(capsys, ["check", write_spec(tmp_path, spec)])
        assert code == EXIT_INPUT
        assert report["error"]["message"].startswith("kind:")

    def test_wrong_length(self, tmp_path, capsys):
        spec = dict(UNIT_SL, q=[0.0] * 3)
        code, report = run(capsys, ["check", write_spec(tmp_path, spec)])
        assert code == EXIT_INPUT
        assert report["error"]["message"].startswith("q:")

    def test_missing_file(self, tmp_path, capsys):
        code, report = run(capsys, ["check", str(tmp_path / "absent.json")])
        assert code == EXIT_INPUT
        assert report["error"]["type"] == "FileNotFoundError"

    def test_missing_config(self, tmp_path, capsys):
        config = str(tmp_path / "none.json")
        argv = ["check", write_spec(tmp_path, UNIT_SL), "--config", config]
        assert main(argv) == EXIT_INPUT

    def test_unknown_command(self, capsys):
        assert main(["integrate"]) == EXIT_INPUT
