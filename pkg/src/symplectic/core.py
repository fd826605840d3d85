"""
Foundational types: discrete intervals, matrix sequences, trajectories,
the canonical skew matrix, the weighted semi-inner product and the
endpoint boundary form.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

import numpy as np

from ..base.exceptions import (
    IndexOutOfRangeError,
    PreconditionError,
    ShapeMismatchError,
)
from ..utils.linalg_utils import LinalgUtils

ArrayLike = Union[np.ndarray, Iterable]


@dataclass(frozen=True)
class DiscreteInterval:
    """
    The index set [0, N+1) of a system.

    ``n_upper`` is N for a finite interval and None for an unbounded one.
    Every operation on an unbounded interval takes an explicit truncation
    index, which then plays the role of N.
    """

    n_upper: Optional[int] = None

    def __post_init__(self):
        if self.n_upper is not None and self.n_upper < 0:
            raise ValueError(f"N must be nonnegative, got {self.n_upper}")

    @classmethod
    def finite(cls, n_upper: int) -> "DiscreteInterval":
        return cls(int(n_upper))

    @classmethod
    def unbounded(cls) -> "DiscreteInterval":
        return cls(None)

    @property
    def is_finite(self) -> bool:
        return self.n_upper is not None

    def resolve(self, truncation: Optional[int] = None) -> int:
        """
        Last index of I_Z: N itself, or the truncation on unbounded intervals.

        Raises:
            PreconditionError: Unbounded interval without a truncation
            IndexOutOfRangeError: Truncation beyond N on a finite interval
        """
        if self.n_upper is None:
            if truncation is None:
                raise PreconditionError(
                    "an unbounded interval needs an explicit truncation index"
                )
            if truncation < 0:
                raise IndexOutOfRangeError(f"truncation {truncation} is negative")
            return int(truncation)
        if truncation is None:
            return self.n_upper
        if not 0 <= truncation <= self.n_upper:
            raise IndexOutOfRangeError(
                f"truncation {truncation} outside [0, {self.n_upper}]"
            )
        return int(truncation)

    def contains(self, k: int, extended: bool = False) -> bool:
        """Membership in I_Z, or in I_Z+ when ``extended``."""
        if k < 0:
            return False
        if self.n_upper is None:
            return True
        return k <= self.n_upper + (1 if extended else 0)

    def check_index(self, k: int, extended: bool = False) -> None:
        if not self.contains(k, extended):
            label = "[0, N+1]" if extended else "[0, N]"
            raise IndexOutOfRangeError(
                f"index {k} outside {label} with N={self.n_upper}"
            )

    def to_dict(self) -> dict:
        return {"N": "infinite" if self.n_upper is None else self.n_upper}


class MatrixSeq:
    """
    A sequence of complex ``rows x cols`` matrices.

    Values are either materialized as an array of shape ``(K, rows, cols)``
    covering indices ``offset .. offset+K-1``, or produced on demand by a
    generator ``k -> matrix`` for sequences on unbounded intervals.
    """

    def __init__(
        self,
        rows: int,
        cols: int,
        values: Optional[np.ndarray] = None,
        generator: Optional[Callable[[int], ArrayLike]] = None,
        offset: int = 0,
    ):
        if (values is None) == (generator is None):
            raise ValueError("give exactly one of values or generator")
        self.rows = int(rows)
        self.cols = int(cols)
        self.offset = int(offset)
        self._generator = generator
        self._values: Optional[np.ndarray] = None
        if values is not None:
            arr = np.array(values, dtype=complex)
            if arr.ndim != 3 or arr.shape[1:] != (self.rows, self.cols):
                raise ShapeMismatchError(
                    f"expected values of shape (K, {self.rows}, {self.cols}), "
                    f"got {arr.shape}"
                )
            arr.setflags(write=False)
            self._values = arr

    @classmethod
    def from_array(cls, values: ArrayLike, offset: int = 0) -> "MatrixSeq":
        arr = np.asarray(values, dtype=complex)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ShapeMismatchError(
                f"cannot read a matrix sequence from shape {arr.shape}"
            )
        return cls(arr.shape[1], arr.shape[2], values=arr, offset=offset)

    @classmethod
    def from_generator(
        cls, rows: int, cols: int, generator: Callable[[int], ArrayLike]
    ) -> "MatrixSeq":
        return cls(rows, cols, generator=generator)

    @classmethod
    def scalars(
        cls, values: Union[ArrayLike, Callable[[int], complex]], offset: int = 0
    ) -> "MatrixSeq":
        """1x1 sequence from a list of numbers or a function of k."""
        if callable(values):
            func = values
            return cls(1, 1, generator=lambda k: np.array([[func(k)]], dtype=complex))
        arr = np.asarray(values, dtype=complex).reshape(-1, 1, 1)
        return cls(1, 1, values=arr, offset=offset)

    @classmethod
    def constant(cls, matrix: ArrayLike, length: Optional[int] = None) -> "MatrixSeq":
        """Constant sequence; materialized when ``length`` is given."""
        mat = np.array(matrix, dtype=complex, ndmin=2)
        if length is None:
            return cls(mat.shape[0], mat.shape[1], generator=lambda k: mat)
        values = np.broadcast_to(mat, (length,) + mat.shape)
        return cls(mat.shape[0], mat.shape[1], values=values)

    @classmethod
    def zeros(cls, rows: int, cols: int, length: int, offset: int = 0) -> "MatrixSeq":
        return cls(rows, cols, values=np.zeros((length, rows, cols)), offset=offset)

    @property
    def is_materialized(self) -> bool:
        return self._values is not None

    @property
    def start(self) -> int:
        return self.offset

    @property
    def stop(self) -> Optional[int]:
        """Last defined index, None for generator-backed sequences."""
        if self._values is None:
            return None
        return self.offset + self._values.shape[0] - 1

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            raise PreconditionError(
                "generator-backed sequence has no materialized values"
            )
        return self._values

    def has(self, k: int) -> bool:
        if k < self.offset:
            return False
        return self._values is None or k <= self.stop

    def __getitem__(self, k: int) -> np.ndarray:
        if not self.has(k):
            raise IndexOutOfRangeError(f"index {k} outside [{self.start}, {self.stop}]")
        if self._values is not None:
            return self._values[k - self.offset]
        mat = np.array(self._generator(k), dtype=complex, ndmin=2)
        if mat.shape != (self.rows, self.cols):
            raise ShapeMismatchError(f"generator returned shape {mat.shape} at k={k}")
        return mat

    def scalar(self, k: int) -> complex:
        return complex(self[k][0, 0])

    def stack(self, start: int, stop: int) -> np.ndarray:
        """Array of shape ``(stop-start+1, rows, cols)`` for indices start..stop."""
        if stop < start:
            return np.zeros((0, self.rows, self.cols), dtype=complex)
        if self._values is not None:
            if not (self.has(start) and self.has(stop)):
                raise IndexOutOfRangeError(
                    f"range [{start}, {stop}] outside [{self.start}, {self.stop}]"
                )
            return self._values[start - self.offset: stop - self.offset + 1]
        return np.stack([self[k] for k in range(start, stop + 1)])

    def materialize(self, start: int, stop: int) -> "MatrixSeq":
        values = self.stack(start, stop)
        return MatrixSeq(self.rows, self.cols, values=values, offset=start)

    def __repr__(self) -> str:
        end = f"{self.stop}]" if self.is_materialized else "inf)"
        extent = f"[{self.start}, {end}"
        return f"MatrixSeq({self.rows}x{self.cols}, {extent})"


class Trajectory(MatrixSeq):
    """
    A materialized 2n x m sequence (solutions, fundamental matrices).

    Indices run over ``offset .. offset+K-1``; partial solutions keep their
    global indices.
    """

    def __init__(self, values: ArrayLike, offset: int = 0):
        arr = np.asarray(values, dtype=complex)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[1] % 2:
            raise ShapeMismatchError(
                f"trajectory values must have shape (K, 2n, m), got {arr.shape}"
            )
        super().__init__(arr.shape[1], arr.shape[2], values=arr, offset=offset)

    @property
    def n(self) -> int:
        return self.rows // 2

    @property
    def columns(self) -> int:
        return self.cols

    def column(self, j: int) -> "Trajectory":
        return Trajectory(self.values[:, :, j: j + 1], self.offset)

    def restrict(self, start: int, stop: int) -> "Trajectory":
        return Trajectory(self.stack(start, stop), start)

    def x(self, k: int) -> np.ndarray:
        """Upper half of the state at k."""
        return self[k][: self.n]

    def u(self, k: int) -> np.ndarray:
        """Lower half of the state at k."""
        return self[k][self.n:]

    def _aligned(self, other: "Trajectory") -> None:
        mine = (self.offset, self.stop, self.rows, self.cols)
        if (other.offset, other.stop, other.rows, other.cols) != mine:
            raise ShapeMismatchError(
                "trajectories are defined on different ranges or shapes"
            )

    def __add__(self, other: "Trajectory") -> "Trajectory":
        self._aligned(other)
        return Trajectory(self.values + other.values, self.offset)

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        self._aligned(other)
        return Trajectory(self.values - other.values, self.offset)

    def scale(self, factor: complex) -> "Trajectory":
        return Trajectory(factor * self.values, self.offset)

    def right_multiply(self, matrix: np.ndarray) -> "Trajectory":
        """Combine columns: z_k -> z_k C."""
        return Trajectory(self.values @ np.asarray(matrix, dtype=complex), self.offset)

    def __repr__(self) -> str:
        return f"Trajectory({self.rows}x{self.cols}, [{self.start}, {self.stop}])"


def canonical_skew(n: int) -> np.ndarray:
    """
    The 2n x 2n matrix J = [[0, I], [-I, 0]].

    Args:
        n: Half-dimension, at least 1

    Returns:
        J as a complex array
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]]).astype(complex)


def _check_shapes(z: MatrixSeq, u: MatrixSeq, psi: MatrixSeq) -> None:
    if z.rows != u.rows or z.rows != psi.rows or psi.rows != psi.cols:
        raise ShapeMismatchError(
            f"incompatible shapes: z {z.rows}x{z.cols}, u {u.rows}x{u.cols}, "
            f"psi {psi.rows}x{psi.cols}"
        )


def gram(
    z: MatrixSeq, u: MatrixSeq, psi: MatrixSeq, k_max: int, k_min: int = 0
) -> np.ndarray:
    """
    Matrix of weighted inner products sum_{k=k_min}^{k_max} z_k* psi_k u_k.

    Works for multi-column trajectories; the result is ``z.cols x u.cols``.
    """
    _check_shapes(z, u, psi)
    if k_max < k_min:
        return np.zeros((z.cols, u.cols), dtype=complex)
    zs = z.stack(k_min, k_max)
    us = u.stack(k_min, k_max)
    ps = psi.stack(k_min, k_max)
    return np.einsum("kia,kij,kjb->ab", zs.conj(), ps, us)


def semi_inner(
    z: MatrixSeq, u: MatrixSeq, psi: MatrixSeq, k_max: int, k_min: int = 0
) -> complex:
    """
    The semi-inner product sum_{k=0}^{k_max} z_k* psi_k u_k of two vector sequences.

    The right endpoint value z_{N+1} never enters because the sum stops at
    an index of I_Z.

    Raises:
        ShapeMismatchError: If the sequences are not single columns of matching size
    """
    if z.cols != 1 or u.cols != 1:
        raise ShapeMismatchError(
            "semi_inner expects single-column sequences; use gram for matrices"
        )
    return complex(gram(z, u, psi, k_max, k_min)[0, 0])


def semi_norm(z: MatrixSeq, psi: MatrixSeq, k_max: int, k_min: int = 0) -> float:
    value = semi_inner(z, z, psi, k_max, k_min).real
    return float(np.sqrt(max(value, 0.0)))


def skew_pairing(z_k: np.ndarray, w_k: np.ndarray) -> np.ndarray:
    """(z, w)_k = z_k* J w_k for vectors or matrices at one index."""
    z_k = np.asarray(z_k, dtype=complex)
    w_k = np.asarray(w_k, dtype=complex)
    jmat = canonical_skew(z_k.shape[0] // 2)
    return LinalgUtils.dagger(np.atleast_2d(z_k.T).T) @ jmat @ np.atleast_2d(w_k.T).T


def bracket_matrix(
    z: Trajectory,
    w: Trajectory,
    left: Optional[int] = None,
    right: Optional[int] = None,
) -> np.ndarray:
    """
    Endpoint form z*_{right} J w_{right} - z*_{left} J w_{left} for matrix trajectories.

    Endpoints default to the first and last index both trajectories share.
    """
    if z.rows != w.rows:
        raise ShapeMismatchError(f"trajectory sizes differ: {z.rows} vs {w.rows}")
    left = max(z.start, w.start) if left is None else left
    right = min(z.stop, w.stop) if right is None else right
    for k in (left, right):
        if not (z.has(k) and w.has(k)):
            raise IndexOutOfRangeError(f"endpoint {k} missing from a trajectory")
    return skew_pairing(z[right], w[right]) - skew_pairing(z[left], w[left])


def boundary_bracket(
    z: Trajectory,
    w: Trajectory,
    left: Optional[int] = None,
    right: Optional[int] = None,
) -> complex:
    """
    The boundary form (z, w)_k evaluated from 0 to N+1.

    Args:
        z: Single-column trajectory
        w: Single-column trajectory
        left: Left endpoint (defaults to the shared start, normally 0)
        right: Right endpoint (defaults to the shared stop, N+1 or truncation+1)

    Returns:
        z*_{N+1} J w_{N+1} - z*_0 J w_0
    """
    if z.cols != 1 or w.cols != 1:
        raise ShapeMismatchError("boundary_bracket expects single-column trajectories")
    return complex(bracket_matrix(z, w, left, right)[0, 0])


@dataclass
class CheckResult:
    """One named numerical check with its worst residual and where it occurred."""

    name: str
    passed: bool
    value: float
    index: Optional[int] = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "value": self.value}
        out["index"] = self.index
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class ValidationReport:
    """Ordered list of checks; passes when every check passes."""

    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def worst_residual(self) -> float:
        return max((abs(check.value) for check in self.checks), default=0.0)

    def __getitem__(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def failed(self) -> list:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> dict:
        checks = [check.to_dict() for check in self.checks]
        return {"passed": self.passed, "checks": checks}
