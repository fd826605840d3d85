"""
Reading system spec files.

A spec file is a JSON object:

    {
      "kind": "raw" | "sturm_liouville" | "block_special",
      "n": 1,
      "N": 3 | "infinite",
      "generator": {"name": "shear", "parameters": {"b": 1.0}},
      "S": [...], "Psi": [...],                      (raw)
      "p": [...], "q": [...], "w": [...],            (sturm_liouville)
      "A": [...], "B": [...], "C": [...], "D": [...], "W": [...],  (block_special)
      "boundary": "dirichlet" | {"M": ..., "L": ...} | {"separated": [a0, a1]}
                  | {"coupled": {"R": ..., "beta": b}} | {"unitary": V}
                  | {"fg": {"F": ..., "G": ...}},
      "compare": <boundary>,
      "solve": {"lambda": x, "k0": 0, "z0": [...]}
    }

Complex numbers are written as [re, im] pairs. A report produced by the
command line is accepted as well; its "input" member is read.
"""

from dataclasses import dataclass, field
from numbers import Number
from typing import Any, Dict, List, Optional

import numpy as np

from ..base.data_processor import DataProcessor, to_plain
from ..base.exceptions import (
    InvalidSystemError,
    PreconditionError,
    ShapeMismatchError,
    SpecFileError,
)
from ..symplectic.core import DiscreteInterval, MatrixSeq, Trajectory
from ..symplectic.extensions import (
    NAMED_FORMS,
    BoundaryPair,
    Coupled,
    FGForm,
    Separated,
    UnitaryForm,
    named_pair,
)
from ..symplectic.samples import CATALOG, from_catalog
from ..symplectic.system import (
    BlockSpecialData,
    SturmLiouvilleData,
    SymplecticSystem,
    from_block_special,
    from_sturm_liouville,
)

KINDS = ("raw", "sturm_liouville", "block_special")
INFINITE = "infinite"


@dataclass
class SystemSpec:
    """A parsed spec file with its system, boundary data and canonical input."""

    system: SymplecticSystem
    canonical: Dict[str, Any]
    boundary: Optional[BoundaryPair] = None
    compare: Optional[BoundaryPair] = None
    boundary_form: Optional[str] = None
    solve: Dict[str, Any] = field(default_factory=dict)


def complex_entry(value: Any, path: str) -> complex:
    """A number or an [re, im] pair."""
    if isinstance(value, bool):
        raise SpecFileError("expected a number, got a boolean", field=path)
    if isinstance(value, Number):
        return complex(value)
    if isinstance(value, str) and value in ("NaN", "Infinity", "-Infinity"):
        return complex(float(value.replace("Infinity", "inf")))
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, Number) and not isinstance(v, bool) for v in value)
    ):
        return complex(value[0], value[1])
    raise SpecFileError(
        f"expected a number or an [re, im] pair, got {value!r}", field=path
    )


def complex_vector(value: Any, path: str, size: Optional[int] = None) -> np.ndarray:
    if not isinstance(value, list):
        raise SpecFileError("expected a list", field=path)
    vec = np.array(
        [complex_entry(v, f"{path}[{i}]") for i, v in enumerate(value)],
        dtype=complex,
    )
    if size is not None and vec.size != size:
        raise SpecFileError(f"expected {size} entries, got {vec.size}", field=path)
    return vec


def complex_matrix(
    value: Any, path: str, shape: Optional[tuple] = None
) -> np.ndarray:
    is_rows = isinstance(value, list) and all(isinstance(row, list) for row in value)
    if not is_rows or not value:
        raise SpecFileError("expected a matrix as a list of rows", field=path)
    rows = [complex_vector(row, f"{path}[{i}]") for i, row in enumerate(value)]
    if len({row.size for row in rows}) != 1:
        raise SpecFileError("rows have different lengths", field=path)
    mat = np.vstack(rows)
    if shape is not None and mat.shape != shape:
        raise SpecFileError(
            f"expected shape {shape[0]}x{shape[1]}, "
            f"got {mat.shape[0]}x{mat.shape[1]}",
            field=path,
        )
    return mat


def matrix_list(value: Any, path: str, count: int, shape: tuple) -> np.ndarray:
    if not isinstance(value, list):
        raise SpecFileError("expected a list of matrices", field=path)
    if len(value) != count:
        raise SpecFileError(f"expected {count} matrices, got {len(value)}", field=path)
    return np.stack(
        [complex_matrix(m, f"{path}[{k}]", shape) for k, m in enumerate(value)]
    )


def real_list(value: Any, path: str, count: int) -> np.ndarray:
    vec = complex_vector(value, path, count)
    if np.any(vec.imag != 0.0):
        raise SpecFileError("coefficients must be real", field=path)
    return vec.real


class SpecFileProcessor(DataProcessor):
    """Turns spec files into systems and boundary pairs."""

    def __init__(self, config: Optional[Any] = None, logger: Optional[Any] = None):
        super().__init__(config, logger, name="SpecFileProcessor")

    def load(self, file_path: str) -> SystemSpec:
        """
        Read and parse a spec file (or a report holding one).

        Raises:
            SpecFileError: On syntax errors or invalid fields
            FileNotFoundError: If the file does not exist
        """
        data = self.read_json(file_path)
        return self.parse(data)

    def parse(self, data: Any) -> SystemSpec:
        wrapped = isinstance(data, dict) and "kind" not in data
        if wrapped and isinstance(data.get("input"), dict):
            data = data["input"]
        if not isinstance(data, dict):
            raise SpecFileError("a spec file must hold a JSON object")
        kind = data.get("kind")
        if kind not in KINDS:
            raise SpecFileError(
                f"expected one of {', '.join(KINDS)}, got {kind!r}", field="kind"
            )
        n = self._n(data, kind)
        n_upper = self._n_upper(data)
        canonical: Dict[str, Any] = {
            "kind": kind,
            "n": n,
            "N": INFINITE if n_upper is None else n_upper,
        }
        try:
            if "generator" in data:
                system = self._from_generator(
                    data["generator"], n, n_upper, canonical
                )
            elif n_upper is None:
                raise SpecFileError(
                    "an unbounded interval needs a generator", field="generator"
                )
            elif kind == "raw":
                system = self._raw(data, n, n_upper, canonical)
            elif kind == "sturm_liouville":
                system = self._sturm_liouville(data, n_upper, canonical)
            else:
                system = self._block_special(data, n, n_upper, canonical)
        except (InvalidSystemError, ShapeMismatchError) as exc:
            raise SpecFileError(str(exc), field="system") from exc

        spec = SystemSpec(system, canonical)
        if "boundary" in data:
            spec.boundary, canonical["boundary"] = self.parse_boundary(
                data["boundary"], n, "boundary"
            )
            spec.boundary_form = self._form_name(data["boundary"])
        if "compare" in data:
            spec.compare, canonical["compare"] = self.parse_boundary(
                data["compare"], n, "compare"
            )
        if "solve" in data:
            spec.solve = self._solve(data["solve"], n)
            canonical["solve"] = to_plain(spec.solve)
        self.log_debug(f"Parsed {kind} system with n={n}, N={canonical['N']}")
        return spec

    def _n(self, data: dict, kind: str) -> int:
        n = data.get("n", 1 if kind == "sturm_liouville" else None)
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise SpecFileError(f"expected a positive integer, got {n!r}", field="n")
        if kind == "sturm_liouville" and n != 1:
            raise SpecFileError("Sturm-Liouville systems have n = 1", field="n")
        return n

    def _n_upper(self, data: dict) -> Optional[int]:
        value = data.get("N")
        if value == INFINITE:
            return None
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise SpecFileError(
                f"expected a nonnegative integer or \"infinite\", got {value!r}",
                field="N",
            )
        return value

    def _from_generator(
        self, spec: Any, n: int, n_upper: Optional[int], canonical: dict
    ) -> SymplecticSystem:
        if not isinstance(spec, dict) or not isinstance(spec.get("name"), str):
            raise SpecFileError(
                "expected {\"name\": ..., \"parameters\": {...}}", field="generator"
            )
        name = spec["name"]
        if name not in CATALOG:
            known = ", ".join(sorted(CATALOG))
            raise SpecFileError(
                f"unknown generator {name!r}; known: {known}", field="generator.name"
            )
        if not isinstance(spec.get("parameters") or {}, dict):
            raise SpecFileError("expected an object", field="generator.parameters")
        parameters = dict(spec.get("parameters") or {})
        parameters.setdefault("N", n_upper)
        if parameters["N"] != n_upper:
            raise SpecFileError(
                "generator N disagrees with the declared N",
                field="generator.parameters.N",
            )
        try:
            system = from_catalog(name, parameters)
        except TypeError as exc:
            raise SpecFileError(str(exc), field="generator.parameters") from exc
        except ValueError as exc:
            raise SpecFileError(str(exc), field="generator.parameters") from exc
        if system.n != n:
            raise SpecFileError(f"generator {name!r} builds n={system.n}", field="n")
        canonical["generator"] = {
            "name": name,
            "parameters": to_plain(spec.get("parameters") or {}),
        }
        return system

    def _raw(
        self, data: dict, n: int, n_upper: int, canonical: dict
    ) -> SymplecticSystem:
        shape = (2 * n, 2 * n)
        s_values = matrix_list(data.get("S"), "S", n_upper + 1, shape)
        psi_values = matrix_list(data.get("Psi"), "Psi", n_upper + 1, shape)
        canonical["S"] = to_plain(s_values)
        canonical["Psi"] = to_plain(psi_values)
        return SymplecticSystem.from_arrays(s_values, psi_values)

    def _sturm_liouville(
        self, data: dict, n_upper: int, canonical: dict
    ) -> SymplecticSystem:
        p = real_list(data.get("p"), "p", n_upper + 2)
        q = real_list(data.get("q"), "q", n_upper + 1)
        w = real_list(data.get("w"), "w", n_upper + 1)
        canonical.update(p=to_plain(p), q=to_plain(q), w=to_plain(w))
        return from_sturm_liouville(SturmLiouvilleData.from_arrays(p, q, w))

    def _block_special(
        self, data: dict, n: int, n_upper: int, canonical: dict
    ) -> SymplecticSystem:
        blocks = {}
        for name in ("A", "B", "C", "D", "W"):
            blocks[name] = matrix_list(data.get(name), name, n_upper + 1, (n, n))
            canonical[name] = to_plain(blocks[name])
        seqs = (MatrixSeq.from_array(blocks[name]) for name in "ABCDW")
        block_data = BlockSpecialData(DiscreteInterval.finite(n_upper), *seqs)
        return from_block_special(block_data, self.tolerance)

    @staticmethod
    def _form_name(value: Any) -> str:
        if isinstance(value, str):
            return value
        if isinstance(value, dict) and len(value) == 1:
            return next(iter(value))
        return "general"

    def parse_boundary(self, value: Any, n: int, path: str):
        """
        Boundary data in any accepted form.

        Returns:
            The pair and its canonical spec representation
        """
        try:
            if isinstance(value, str):
                if value not in NAMED_FORMS:
                    raise SpecFileError(
                        f"expected one of {', '.join(NAMED_FORMS)}, got {value!r}",
                        field=path,
                    )
                return named_pair(value, n), value
            if not isinstance(value, dict):
                raise SpecFileError("expected a name or an object", field=path)
            if "M" in value or "L" in value:
                m_mat = complex_matrix(value.get("M"), f"{path}.M")
                l_raw = value.get("L")
                l_mat = (
                    np.zeros((m_mat.shape[0], 0))
                    if l_raw == []
                    else complex_matrix(l_raw, f"{path}.L")
                )
                pair = BoundaryPair(m_mat, l_mat)
                if pair.n != n:
                    raise SpecFileError(
                        f"M must have {2 * n} columns", field=f"{path}.M"
                    )
                return pair, {"M": to_plain(pair.m_mat), "L": to_plain(pair.l_mat)}
            if "separated" in value:
                if n != 1:
                    raise SpecFileError(
                        "separated forms need n = 1", field=f"{path}.separated"
                    )
                angles = value["separated"]
                if not isinstance(angles, list) or len(angles) != 2:
                    raise SpecFileError(
                        "expected [alpha0, alpha_end]", field=f"{path}.separated"
                    )
                a0, a1 = (
                    complex_entry(a, f"{path}.separated[{i}]").real
                    for i, a in enumerate(angles)
                )
                return Separated(a0, a1).to_pair(), {"separated": [a0, a1]}
            if "coupled" in value:
                if n != 1:
                    raise SpecFileError(
                        "coupled forms need n = 1", field=f"{path}.coupled"
                    )
                body = value["coupled"]
                if not isinstance(body, dict):
                    raise SpecFileError(
                        "expected {\"R\": ..., \"beta\": ...}", field=f"{path}.coupled"
                    )
                r_mat = complex_matrix(body.get("R"), f"{path}.coupled.R", (2, 2))
                beta = complex_entry(body.get("beta", 0.0), f"{path}.coupled.beta").real
                form = Coupled(r_mat, beta)
                plain = {"R": to_plain(form.r_mat), "beta": beta}
                return form.to_pair(), {"coupled": plain}
            if "unitary" in value:
                v_mat = complex_matrix(
                    value["unitary"], f"{path}.unitary", (2 * n, 2 * n)
                )
                return UnitaryForm(v_mat).to_pair(), {"unitary": to_plain(v_mat)}
            if "fg" in value:
                body = value["fg"]
                if not isinstance(body, dict):
                    raise SpecFileError(
                        "expected {\"F\": ..., \"G\": ...}", field=f"{path}.fg"
                    )
                f_mat = complex_matrix(body.get("F"), f"{path}.fg.F", (2 * n, 2 * n))
                g_mat = complex_matrix(body.get("G"), f"{path}.fg.G", (2 * n, 2 * n))
                plain = {"F": to_plain(f_mat), "G": to_plain(g_mat)}
                return FGForm(f_mat, g_mat).to_pair(), {"fg": plain}
        except (PreconditionError, ShapeMismatchError) as exc:
            raise SpecFileError(str(exc), field=path) from exc
        raise SpecFileError("unrecognized boundary form", field=path)

    def _solve(self, value: Any, n: int) -> Dict[str, Any]:
        if not isinstance(value, dict):
            raise SpecFileError("expected an object", field="solve")
        lam = complex_entry(value.get("lambda", 0.0), "solve.lambda")
        out: Dict[str, Any] = {"lambda": lam}
        k0 = value.get("k0", 0)
        if not isinstance(k0, int) or isinstance(k0, bool) or k0 < 0:
            raise SpecFileError("expected a nonnegative integer", field="solve.k0")
        out["k0"] = k0
        out["z0"] = complex_vector(value.get("z0"), "solve.z0", 2 * n)
        return out

    def load_trajectory(self, file_path: str) -> Trajectory:
        """
        A trajectory file: {"offset": k, "values": [[...], ...]} with one
        2n-vector per index, or a ``solve`` report.
        """
        data = self.read_json(file_path)
        wrapped = isinstance(data, dict) and "values" not in data
        if wrapped and isinstance(data.get("result"), dict):
            data = data["result"].get("trajectory", data["result"])
        if not isinstance(data, dict):
            raise SpecFileError("expected an object with \"values\"")
        values: List[Any] = data.get("values")
        if not isinstance(values, list) or not values:
            raise SpecFileError("expected a nonempty list of vectors", field="values")
        offset = data.get("offset", 0)
        if not isinstance(offset, int) or isinstance(offset, bool):
            raise SpecFileError("expected an integer", field="offset")
        vectors = [complex_vector(v, f"values[{k}]") for k, v in enumerate(values)]
        if len({v.size for v in vectors}) != 1 or vectors[0].size % 2:
            raise SpecFileError("vectors must share one even length", field="values")
        return Trajectory(np.stack(vectors)[:, :, None], offset)
