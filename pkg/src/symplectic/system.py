"""
Construction and structural validation of discrete symplectic systems.

A system is given by the coefficients S_k and the weights Psi_k; the
lambda-dependent part V_k = -J Psi_k S_k is always derived, never stored.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..base.config import resolve_tolerance
from ..base.exceptions import InvalidSystemError, PreconditionError, ShapeMismatchError
from ..base.logger import get_logger
from ..utils.linalg_utils import LinalgUtils
from .core import (
    CheckResult,
    DiscreteInterval,
    MatrixSeq,
    ValidationReport,
    canonical_skew,
)

logger = get_logger("symplectic.system")

# Generator-backed data is checked on this many leading indices.
VALIDATION_WINDOW = 64


@dataclass(frozen=True, eq=False)
class SturmLiouvilleData:
    """
    Coefficients of -Delta(p_k Delta y_{k-1}) + q_k y_k = lambda w_k y_k.

    ``p`` lives on [0, N+1], ``q`` and ``w`` on [0, N]; all three are 1x1
    matrix sequences (materialized or generator-backed).
    """

    interval: DiscreteInterval
    p: MatrixSeq
    q: MatrixSeq
    w: MatrixSeq

    def __post_init__(self):
        last = self._scan_stop()
        for k in range(0, last + 2):
            if self.p.scalar(k) == 0:
                raise InvalidSystemError(
                    f"p_{k} vanishes", identity="p_nonzero", index=k
                )
        weights = [self.w.scalar(k) for k in range(0, last + 1)]
        for k, wk in enumerate(weights):
            if abs(wk.imag) > 0 or wk.real < 0:
                raise InvalidSystemError(
                    f"w_{k} = {wk} is not a nonnegative real", "w_nonnegative", k
                )
        if not any(
            left.real > 0 and right.real > 0
            for left, right in zip(weights, weights[1:])
        ):
            raise InvalidSystemError(
                "w_k must be positive at two consecutive indices",
                identity="w_consecutive_positive",
            )

    def _scan_stop(self) -> int:
        if self.interval.is_finite:
            return self.interval.n_upper
        return VALIDATION_WINDOW

    @classmethod
    def from_arrays(cls, p, q, w) -> "SturmLiouvilleData":
        """
        Finite data from plain arrays: ``len(p) == N+2``, ``len(q) == len(w) == N+1``.

        Raises:
            ShapeMismatchError: If the lengths disagree
        """
        q_arr = np.asarray(q, dtype=float).ravel()
        w_arr = np.asarray(w, dtype=float).ravel()
        p_arr = np.asarray(p, dtype=float).ravel()
        n_upper = len(q_arr) - 1
        if len(w_arr) != n_upper + 1 or len(p_arr) != n_upper + 2 or n_upper < 0:
            raise ShapeMismatchError(
                "expected len(p) = N+2 and len(q) = len(w) = N+1, "
                f"got {len(p_arr)}, {len(q_arr)}, {len(w_arr)}"
            )
        return cls(
            DiscreteInterval.finite(n_upper),
            MatrixSeq.scalars(p_arr),
            MatrixSeq.scalars(q_arr),
            MatrixSeq.scalars(w_arr),
        )

    @classmethod
    def from_functions(
        cls, p, q, w, n_upper: Optional[int] = None
    ) -> "SturmLiouvilleData":
        """Data from functions of k; unbounded unless ``n_upper`` is given."""
        if n_upper is not None:
            return cls.from_arrays(
                [p(k) for k in range(n_upper + 2)],
                [q(k) for k in range(n_upper + 1)],
                [w(k) for k in range(n_upper + 1)],
            )
        return cls(
            DiscreteInterval.unbounded(),
            MatrixSeq.scalars(lambda k: float(p(k))),
            MatrixSeq.scalars(lambda k: float(q(k))),
            MatrixSeq.scalars(lambda k: float(w(k))),
        )

    def p_at(self, k: int) -> float:
        return self.p.scalar(k).real

    def q_at(self, k: int) -> float:
        return self.q.scalar(k).real

    def w_at(self, k: int) -> float:
        return self.w.scalar(k).real


@dataclass(frozen=True, eq=False)
class BlockSpecialData:
    """
    Blocks S_k = [[A, B], [C, D]] and weight W_k with Psi_k = diag(W_k, 0).

    The block identities are checked by :func:`from_block_special`, not here.
    """

    interval: DiscreteInterval
    a: MatrixSeq
    b: MatrixSeq
    c: MatrixSeq
    d: MatrixSeq
    w: MatrixSeq

    def __post_init__(self):
        blocks = (self.a, self.b, self.c, self.d, self.w)
        shapes = {(seq.rows, seq.cols) for seq in blocks}
        if len(shapes) != 1:
            raise ShapeMismatchError(
                f"blocks must share one square shape, got {sorted(shapes)}"
            )
        rows, cols = shapes.pop()
        if rows != cols:
            raise ShapeMismatchError(f"blocks must be square, got {rows}x{cols}")

    @property
    def n(self) -> int:
        return self.a.rows

    def blocks(self, k: int):
        return self.a[k], self.b[k], self.c[k], self.d[k]


@dataclass(frozen=True, eq=False)
class SymplecticSystem:
    """
    The system z_k = (S_k + lambda V_k) z_{k+1} on a discrete interval.

    Attributes:
        n: Half-dimension
        interval: Index set of the coefficients
        s_seq: S_k, 2n x 2n, k in I_Z
        psi_seq: Psi_k, 2n x 2n, k in I_Z
        origin: Scalar or block data the system was built from, if any
    """

    n: int
    interval: DiscreteInterval
    s_seq: MatrixSeq
    psi_seq: MatrixSeq
    origin: Optional[Union[SturmLiouvilleData, BlockSpecialData]] = None

    def __post_init__(self):
        size = 2 * self.n
        for name, seq in (("S", self.s_seq), ("Psi", self.psi_seq)):
            if (seq.rows, seq.cols) != (size, size):
                raise ShapeMismatchError(
                    f"{name}_k must be {size}x{size}, got {seq.rows}x{seq.cols}"
                )
        if self.interval.is_finite:
            for name, seq in (("S", self.s_seq), ("Psi", self.psi_seq)):
                if not (seq.has(0) and seq.has(self.interval.n_upper)):
                    raise ShapeMismatchError(
                        f"{name}_k must be defined on [0, {self.interval.n_upper}]"
                    )

    @classmethod
    def from_arrays(cls, s_values, psi_values) -> "SymplecticSystem":
        """Finite system from arrays of shape (N+1, 2n, 2n)."""
        s_seq = MatrixSeq.from_array(s_values)
        psi_seq = MatrixSeq.from_array(psi_values)
        if s_seq.values.shape != psi_seq.values.shape:
            raise ShapeMismatchError(
                "S and Psi arrays differ in shape: "
                f"{s_seq.values.shape} vs {psi_seq.values.shape}"
            )
        if s_seq.rows % 2:
            raise ShapeMismatchError(f"matrices must have even size, got {s_seq.rows}")
        n_upper = s_seq.values.shape[0] - 1
        return cls(s_seq.rows // 2, DiscreteInterval.finite(n_upper), s_seq, psi_seq)

    @property
    def skew(self) -> np.ndarray:
        return canonical_skew(self.n)

    @property
    def is_finite(self) -> bool:
        return self.interval.is_finite

    def horizon(self, truncation: Optional[int] = None) -> int:
        """Last coefficient index used: N, or the truncation on unbounded intervals."""
        return self.interval.resolve(truncation)

    def s(self, k: int) -> np.ndarray:
        self.interval.check_index(k)
        return self.s_seq[k]

    def psi(self, k: int) -> np.ndarray:
        self.interval.check_index(k)
        return self.psi_seq[k]

    def v(self, k: int) -> np.ndarray:
        """V_k = -J Psi_k S_k."""
        return -self.skew @ self.psi(k) @ self.s(k)

    def s_stack(self, start: int, stop: int) -> np.ndarray:
        return self.s_seq.stack(start, stop)

    def psi_stack(self, start: int, stop: int) -> np.ndarray:
        return self.psi_seq.stack(start, stop)

    def truncated(self, truncation: int) -> "SymplecticSystem":
        """Finite system on [0, truncation] with the same coefficients."""
        stop = self.horizon(truncation)
        return SymplecticSystem(
            self.n,
            DiscreteInterval.finite(stop),
            self.s_seq.materialize(0, stop),
            self.psi_seq.materialize(0, stop),
            self.origin,
        )

    def __repr__(self) -> str:
        return f"SymplecticSystem(n={self.n}, N={self.interval.to_dict()['N']})"


def lambda_matrix(sys: SymplecticSystem, lam: complex, k: int) -> np.ndarray:
    """
    The coefficient S_k(lambda) = S_k + lambda V_k of the time-reversed recursion.

    Raises:
        IndexOutOfRangeError: If k is not in I_Z
    """
    return sys.s(k) + lam * sys.v(k)


def lambda_stack(
    sys: SymplecticSystem, lam: complex, start: int, stop: int
) -> np.ndarray:
    """S_k(lambda) for k = start..stop as one array."""
    s = sys.s_stack(start, stop)
    psi = sys.psi_stack(start, stop)
    return s - lam * (sys.skew @ psi @ s)


def to_forward(sys: SymplecticSystem, lam: complex, k: int) -> np.ndarray:
    """
    Inverse of S_k(lambda) from the symplectic identity: -J S_k(conj(lambda))* J.
    """
    jmat = sys.skew
    return -jmat @ LinalgUtils.dagger(lambda_matrix(sys, np.conj(lam), k)) @ jmat


def reconstruct_psi(sys: SymplecticSystem, k: int) -> np.ndarray:
    """Psi_k recovered from S_k and V_k as J S_k J V_k* J."""
    jmat = sys.skew
    return jmat @ sys.s(k) @ jmat @ LinalgUtils.dagger(sys.v(k)) @ jmat


def validate_hypothesis(
    sys: SymplecticSystem, truncation: Optional[int] = None, tol: Optional[float] = None
) -> ValidationReport:
    """
    Check the structural identities of a system at every k.

    Each check records its worst residual and the index where it occurred.
    A failing check is data in the report, never an exception.

    Args:
        sys: The system
        truncation: Required for unbounded intervals
        tol: Residual tolerance (global default when None)

    Returns:
        Report with the checks ``symplectic``, ``psi_hermitian``,
        ``psi_isotropic``, ``psi_semidefinite``, ``v_pairing_hermitian``,
        ``v_isotropic`` and ``psi_reconstruction``
    """
    tol = resolve_tolerance(tol)
    stop = sys.horizon(truncation)
    jmat = sys.skew
    s = sys.s_stack(0, stop)
    psi = sys.psi_stack(0, stop)
    s_h = LinalgUtils.dagger(s)
    psi_h = LinalgUtils.dagger(psi)
    v = -jmat @ psi @ s
    v_h = LinalgUtils.dagger(v)

    def norms(stack: np.ndarray) -> np.ndarray:
        return np.linalg.norm(stack, ord=2, axis=(1, 2))

    residuals = {
        "symplectic": norms(s_h @ jmat @ s - jmat),
        "psi_hermitian": norms(psi - psi_h),
        "psi_isotropic": norms(psi_h @ jmat @ psi),
        "v_pairing_hermitian": norms(
            v_h @ jmat @ s - LinalgUtils.dagger(v_h @ jmat @ s)
        ),
        "v_isotropic": norms(v_h @ jmat @ v),
        "psi_reconstruction": norms(jmat @ s @ jmat @ v_h @ jmat - psi),
    }
    report = ValidationReport()
    for name in ("symplectic", "psi_hermitian", "psi_isotropic"):
        worst = int(np.argmax(residuals[name]))
        value = float(residuals[name][worst])
        report.checks.append(CheckResult(name, value <= tol, value, worst))

    min_eigs = np.linalg.eigvalsh(0.5 * (psi + psi_h))[:, 0]
    worst = int(np.argmin(min_eigs))
    report.checks.append(
        CheckResult(
            "psi_semidefinite",
            bool(min_eigs[worst] >= -tol),
            float(min_eigs[worst]),
            worst,
        )
    )
    for name in ("v_pairing_hermitian", "v_isotropic", "psi_reconstruction"):
        worst = int(np.argmax(residuals[name]))
        value = float(residuals[name][worst])
        report.checks.append(CheckResult(name, value <= tol, value, worst))

    if not report.passed:
        logger.warning(f"System hypothesis fails: {', '.join(report.failed())}")
    else:
        logger.debug(f"System hypothesis holds on [0, {stop}]")
    return report


def sturm_liouville_blocks(data: SturmLiouvilleData) -> BlockSpecialData:
    """
    Block data of the scalar embedding: A = 1, B = -1/p_{k+1}, C = -q_k,
    D = 1 + q_k/p_{k+1}, W = w_k.
    """

    def a(k):
        return np.array([[1.0]])

    def b(k):
        return np.array([[-1.0 / data.p_at(k + 1)]])

    def c(k):
        return np.array([[-data.q_at(k)]])

    def d(k):
        return np.array([[1.0 + data.q_at(k) / data.p_at(k + 1)]])

    def w(k):
        return np.array([[data.w_at(k)]])

    if data.interval.is_finite:
        ks = range(data.interval.n_upper + 1)
        seqs = [
            MatrixSeq.from_array(np.stack([f(k) for k in ks]))
            for f in (a, b, c, d, w)
        ]
    else:
        seqs = [MatrixSeq.from_generator(1, 1, f) for f in (a, b, c, d, w)]
    return BlockSpecialData(data.interval, *seqs)


def _block_checks(data: BlockSpecialData, k: int, tol: float) -> None:
    a, b, c, d = data.blocks(k)
    n = data.n
    eye = np.eye(n)
    ah, bh, ch, dh = (LinalgUtils.dagger(m) for m in (a, b, c, d))
    identities = {
        "A*D - C*B = I": LinalgUtils.norm2(ah @ d - ch @ b - eye),
        "AD* - BC* = I": LinalgUtils.norm2(a @ dh - b @ ch - eye),
        "A*C Hermitian": LinalgUtils.hermitian_residual(ah @ c),
        "B*D Hermitian": LinalgUtils.hermitian_residual(bh @ d),
        "AB* Hermitian": LinalgUtils.hermitian_residual(a @ bh),
        "CD* Hermitian": LinalgUtils.hermitian_residual(c @ dh),
    }
    for identity, residual in identities.items():
        if residual > tol:
            raise InvalidSystemError(
                f"block identity {identity} fails at k={k} (residual {residual:.3e})",
                identity,
                k,
            )
    weight = data.w[k]
    hermitian = LinalgUtils.hermitian_residual(weight) <= tol
    if not hermitian or LinalgUtils.min_eigenvalue(weight) < -tol:
        raise InvalidSystemError(
            f"W_{k} is not Hermitian positive semidefinite", "W_semidefinite", k
        )


def _block_matrices(data: BlockSpecialData, k: int):
    a, b, c, d = data.blocks(k)
    zero = np.zeros((data.n, data.n))
    s = np.block([[a, b], [c, d]])
    psi = np.block([[data.w[k], zero], [zero, zero]])
    return s, psi


def from_block_special(
    data: BlockSpecialData, tol: Optional[float] = None
) -> SymplecticSystem:
    """
    System with S_k = [[A, B], [C, D]] and Psi_k = diag(W_k, 0).

    Raises:
        InvalidSystemError: Naming the failing block identity and index
    """
    tol = resolve_tolerance(tol)
    n = data.n
    if data.interval.is_finite:
        last = data.interval.n_upper
        for k in range(last + 1):
            _block_checks(data, k, tol)
        pairs = [_block_matrices(data, k) for k in range(last + 1)]
        s_seq = MatrixSeq.from_array(np.stack([s for s, _ in pairs]))
        psi_seq = MatrixSeq.from_array(np.stack([p for _, p in pairs]))
    else:
        for k in range(VALIDATION_WINDOW + 1):
            _block_checks(data, k, tol)
        s_seq = MatrixSeq.from_generator(
            2 * n, 2 * n, lambda k: _block_matrices(data, k)[0]
        )
        psi_seq = MatrixSeq.from_generator(
            2 * n, 2 * n, lambda k: _block_matrices(data, k)[1]
        )
    return SymplecticSystem(n, data.interval, s_seq, psi_seq, origin=data)


def from_sturm_liouville(data: SturmLiouvilleData) -> SymplecticSystem:
    """
    Scalar system with S_k = [[1, -1/p_{k+1}], [-q_k, 1 + q_k/p_{k+1}]] and
    Psi_k = diag(w_k, 0).

    The state is z_k = (y_k, p_k (y_k - y_{k-1})).
    """

    def s(k):
        p_next = data.p_at(k + 1)
        qk = data.q_at(k)
        return np.array([[1.0, -1.0 / p_next], [-qk, 1.0 + qk / p_next]])

    def psi(k):
        return np.array([[data.w_at(k), 0.0], [0.0, 0.0]])

    if data.interval.is_finite:
        ks = range(data.interval.n_upper + 1)
        s_seq = MatrixSeq.from_array(np.stack([s(k) for k in ks]))
        psi_seq = MatrixSeq.from_array(np.stack([psi(k) for k in ks]))
    else:
        s_seq = MatrixSeq.from_generator(2, 2, s)
        psi_seq = MatrixSeq.from_generator(2, 2, psi)
    logger.debug(f"Built scalar system on N={data.interval.to_dict()['N']}")
    return SymplecticSystem(1, data.interval, s_seq, psi_seq, origin=data)


def sturm_liouville_state(data: SturmLiouvilleData, y: np.ndarray) -> np.ndarray:
    """
    States z_k = (y_k, p_k (y_k - y_{k-1})) for k = 0..len(y)-2.

    ``y`` holds y_{-1}, y_0, y_1, ... so the result has one entry less.
    """
    y = np.asarray(y, dtype=complex)
    ks = range(len(y) - 1)
    return np.array([[y[k + 1], data.p_at(k) * (y[k + 1] - y[k])] for k in ks])


def block_data_of(
    sys: SymplecticSystem, tol: Optional[float] = None
) -> BlockSpecialData:
    """
    Recover block data from a system whose weight has the form diag(W, 0).

    Raises:
        PreconditionError: If the system does not have the special block form
    """
    if isinstance(sys.origin, BlockSpecialData):
        return sys.origin
    if isinstance(sys.origin, SturmLiouvilleData):
        return sturm_liouville_blocks(sys.origin)
    tol = resolve_tolerance(tol)
    n = sys.n
    last = sys.horizon(None) if sys.is_finite else VALIDATION_WINDOW
    for k in range(last + 1):
        psi = sys.psi(k)
        if max(LinalgUtils.norm2(psi[:n, n:]), LinalgUtils.norm2(psi[n:, :])) > tol:
            raise PreconditionError(
                f"Psi_{k} is not of the form diag(W, 0); not a block special system"
            )

    def part(rows: slice, cols: slice, source: MatrixSeq) -> MatrixSeq:
        if source.is_materialized:
            return MatrixSeq.from_array(source.values[:, rows, cols])
        return MatrixSeq.from_generator(n, n, lambda k: source[k][rows, cols])

    top, bottom = slice(0, n), slice(n, 2 * n)
    return BlockSpecialData(
        sys.interval,
        part(top, top, sys.s_seq),
        part(top, bottom, sys.s_seq),
        part(bottom, top, sys.s_seq),
        part(bottom, bottom, sys.s_seq),
        part(top, top, sys.psi_seq),
    )
