"""
Self-adjoint extensions: boundary pairs (M, L), the endpoint matrices Omega
and Upsilon, validation, canonical scalar forms, the (F, G) and unitary
parametrizations, equivalence, GKN sets and the Krein-von Neumann extension.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from ..base.config import resolve_tolerance
from ..base.exceptions import (
    AtkinsonFailureError,
    ConvergenceError,
    DegenerateRelationError,
    PreconditionError,
    ShapeMismatchError,
)
from ..base.logger import get_logger
from ..utils.linalg_utils import RANK_RATIO, LinalgUtils
from ..utils.series_utils import CONVERGENT_RATIO
from .classify import DEFAULT_GROWTH_THRESHOLD, count_square_summable
from .core import Trajectory, bracket_matrix, canonical_skew, gram
from .solver import (
    PRECONDITION_RESIDUAL,
    fundamental,
    patching_bvp,
    recursion_residual,
    relation_residual,
    solve_ivp,
)
from .system import SymplecticSystem

logger = get_logger("symplectic.extensions")

# Imaginary parts above this make a coupled matrix R non-real.
REAL_TOLERANCE = 1e-12
UNITARY_TOLERANCE = 1e-10

FINITE_CASE = "finite interval"
LIMIT_POINT_CASE = "limit point"
LIMIT_CIRCLE_CASE = "limit circle"
GENERAL_CASE = "general"

NAMED_FORMS = ("dirichlet", "neumann", "periodic", "antiperiodic")


@dataclass(frozen=True, eq=False)
class BoundaryPair:
    """
    Boundary data of the condition M z_0 - L (endpoint data) = 0.

    On a finite interval both matrices are 2n x 2n and the endpoint data is
    z_{N+1}; in the general form L has 2q - 2n columns and acts on the
    vector of endpoint brackets with the arranged solution basis.
    """

    m_mat: np.ndarray
    l_mat: np.ndarray

    def __post_init__(self):
        m_mat = np.atleast_2d(np.asarray(self.m_mat, dtype=complex))
        l_mat = np.asarray(self.l_mat, dtype=complex)
        if l_mat.size == 0:
            l_mat = np.zeros((m_mat.shape[0], 0), dtype=complex)
        l_mat = np.atleast_2d(l_mat)
        if m_mat.shape[0] != l_mat.shape[0]:
            raise ShapeMismatchError(
                "M and L must have the same row count, "
                f"got {m_mat.shape} and {l_mat.shape}"
            )
        if m_mat.shape[1] % 2:
            raise ShapeMismatchError(f"M must have 2n columns, got {m_mat.shape[1]}")
        object.__setattr__(self, "m_mat", m_mat)
        object.__setattr__(self, "l_mat", l_mat)

    @property
    def n(self) -> int:
        return self.m_mat.shape[1] // 2

    @property
    def q(self) -> int:
        return self.m_mat.shape[0]

    @property
    def stacked(self) -> np.ndarray:
        """(M, -L), whose row space determines the relation."""
        return np.hstack([self.m_mat, -self.l_mat])

    def scaled(self, matrix: np.ndarray) -> "BoundaryPair":
        """The pair (C M, C L)."""
        matrix = np.asarray(matrix, dtype=complex)
        return BoundaryPair(matrix @ self.m_mat, matrix @ self.l_mat)

    def to_dict(self) -> dict:
        return {"M": self.m_mat, "L": self.l_mat}


class ExtensionForm:
    """Base of the parametrizations of self-adjoint boundary conditions."""

    kind = "form"

    def to_pair(self) -> BoundaryPair:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Separated(ExtensionForm):
    """cos(a0) x_0 + sin(a0) u_0 = 0 and -sin(a1) x_{N+1} + cos(a1) u_{N+1} = 0."""

    alpha0: float
    alpha_end: float
    kind = "separated"

    def to_pair(self) -> BoundaryPair:
        c0, s0 = np.cos(self.alpha0), np.sin(self.alpha0)
        c1, s1 = np.cos(self.alpha_end), np.sin(self.alpha_end)
        m_mat = np.array([[c0, s0], [0.0, 0.0]])
        l_mat = np.array([[0.0, 0.0], [-s1, c1]])
        return BoundaryPair(m_mat, l_mat)

    def to_dict(self) -> dict:
        return {"form": self.kind, "alpha0": self.alpha0, "alpha_end": self.alpha_end}


@dataclass(frozen=True, eq=False)
class Coupled(ExtensionForm):
    """z_{N+1} = e^{i beta} R z_0 with R real, det R = 1 and beta in [0, pi)."""

    r_mat: np.ndarray
    beta: float
    kind = "coupled"

    def __post_init__(self):
        r_mat = np.asarray(self.r_mat)
        scale = max(1.0, float(np.max(np.abs(r_mat))))
        if np.max(np.abs(np.imag(r_mat))) > REAL_TOLERANCE * scale:
            raise PreconditionError("coupled form requires a real matrix R")
        r_mat = np.real(r_mat).astype(float)
        if r_mat.shape != (2, 2):
            raise ShapeMismatchError(f"R must be 2x2, got {r_mat.shape}")
        det = float(np.linalg.det(r_mat))
        if abs(det - 1.0) > 1e-10 * max(1.0, float(np.max(np.abs(r_mat))) ** 2):
            raise PreconditionError(f"R must have determinant 1, got {det:.6g}")
        object.__setattr__(self, "r_mat", r_mat)

    def to_pair(self) -> BoundaryPair:
        return BoundaryPair(np.exp(1j * self.beta) * self.r_mat, np.eye(2))

    def to_dict(self) -> dict:
        return {"form": self.kind, "R": self.r_mat, "beta": self.beta}


@dataclass(frozen=True, eq=False)
class FGForm(ExtensionForm):
    """
    F gamma_x(z) + G gamma_u(z) = 0 with gamma_x = (x_0; x_{N+1}) and
    gamma_u = (u_0; -u_{N+1}).
    """

    f_mat: np.ndarray
    g_mat: np.ndarray
    kind = "fg"

    def to_pair(self) -> BoundaryPair:
        return from_fg(self.f_mat, self.g_mat)

    def to_dict(self) -> dict:
        return {"form": self.kind, "F": self.f_mat, "G": self.g_mat}


@dataclass(frozen=True, eq=False)
class UnitaryForm(ExtensionForm):
    """i (V - I) gamma_x(z) = (V + I) gamma_u(z) for a unitary V."""

    v_mat: np.ndarray
    kind = "unitary"

    def __post_init__(self):
        v_mat = np.asarray(self.v_mat, dtype=complex)
        if not LinalgUtils.is_unitary(v_mat, UNITARY_TOLERANCE):
            raise PreconditionError("V is not unitary")
        object.__setattr__(self, "v_mat", v_mat)

    def to_fg(self) -> FGForm:
        eye = np.eye(self.v_mat.shape[0])
        return FGForm(0.5j * (eye - self.v_mat), 0.5 * (eye + self.v_mat))

    def to_pair(self) -> BoundaryPair:
        return self.to_fg().to_pair()

    def to_dict(self) -> dict:
        return {"form": self.kind, "V": self.v_mat}


@dataclass(frozen=True, eq=False)
class GeneralML(ExtensionForm):
    pair: BoundaryPair
    kind = "general"

    def to_pair(self) -> BoundaryPair:
        return self.pair

    def to_dict(self) -> dict:
        return {"form": self.kind, **self.pair.to_dict()}


@dataclass(eq=False)
class OmegaMatrix:
    """
    Endpoint brackets omega_ij = (phi_i, phi_j) at the right end of the
    square-summable solutions at lam0 (first q_plus columns) and conj(lam0).

    The plus columns are arranged so that the leading rows of the
    off-diagonal block have full rank.
    """

    entries: np.ndarray
    q_plus: int
    q_minus: int
    n: int
    basis: Trajectory
    endpoint: int
    lam0: complex
    exact: bool = True

    @property
    def p(self) -> int:
        return self.q_plus + self.q_minus

    def block(self, row: int, col: int) -> np.ndarray:
        """Omega^{[row, col]} with blocks indexed 1 (plus) and 2 (minus)."""
        rows = slice(0, self.q_plus) if row == 1 else slice(self.q_plus, self.p)
        cols = slice(0, self.q_plus) if col == 1 else slice(self.q_plus, self.p)
        return self.entries[rows, cols]

    def leading(self, size: int) -> np.ndarray:
        return self.entries[:size, :size]

    @property
    def rank(self) -> int:
        return LinalgUtils.numerical_rank(self.entries)

    def endpoint_vector(self, z: Trajectory, size: int) -> np.ndarray:
        """Brackets (phi_i, z) at the right end for the first ``size`` basis columns."""
        phi = self.basis[self.endpoint][:, :size]
        return LinalgUtils.dagger(phi) @ canonical_skew(self.n) @ z[self.endpoint]

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "q_plus": self.q_plus,
            "q_minus": self.q_minus,
            "rank": self.rank,
            "rank_off_diagonal": LinalgUtils.numerical_rank(self.block(1, 2)),
            "endpoint": self.endpoint,
            "lambda0": self.lam0,
            "exact": self.exact,
        }


def _omega_at(basis: Trajectory, k: int, n: int) -> np.ndarray:
    phi = basis[k]
    return LinalgUtils.dagger(phi) @ canonical_skew(n) @ phi


def _arrange_plus(
    phi_plus: np.ndarray, phi_minus: np.ndarray, keep: int, n: int
) -> np.ndarray:
    off = LinalgUtils.dagger(phi_plus) @ canonical_skew(n) @ phi_minus
    _, _, perm = scipy.linalg.qr(LinalgUtils.dagger(off), pivoting=True)
    leading = list(perm[:keep])
    rest = [j for j in range(phi_plus.shape[1]) if j not in leading]
    return np.array(leading + rest)


def build_omega(
    sys: SymplecticSystem,
    lam0: complex,
    truncation: Optional[int] = None,
    growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
) -> OmegaMatrix:
    """
    Build the Omega matrix from fundamental solutions at lam0 and conj(lam0).

    On a finite interval the entries are exact brackets at N+1. On an
    unbounded interval every solution must be square summable at both
    parameters (limit circle case, stable under truncation doubling) and
    the brackets must settle at M/4, M/2 and M.

    Raises:
        ConvergenceError: Without a limit circle certificate or when the brackets
            keep moving
    """
    n = sys.n
    lam0 = complex(lam0)
    if sys.is_finite:
        endpoint = sys.horizon(None) + 1
        stop_value = None
    else:
        stop_value = sys.horizon(truncation)
        endpoint = stop_value + 1
        for lam in (lam0, np.conj(lam0)):
            estimate = count_square_summable(sys, lam, stop_value, growth_threshold)
            if not (estimate.stable and estimate.q_estimate == 2 * n):
                raise ConvergenceError(
                    f"no limit circle certificate at lambda={lam}: "
                    f"q estimate {estimate.q_estimate}, "
                    f"stable={estimate.stable}"
                )
    phi_plus = fundamental(sys, lam0, truncation=stop_value).values
    phi_minus = fundamental(sys, np.conj(lam0), truncation=stop_value).values
    order = _arrange_plus(phi_plus[-1], phi_minus[-1], 2 * n, n)
    values = np.concatenate([phi_plus[:, :, order], phi_minus], axis=2)
    basis = Trajectory(values, 0)

    if not sys.is_finite:
        windows = [endpoint >> 2, endpoint >> 1, endpoint]
        samples = [_omega_at(basis, k, n) for k in windows]
        drift1 = LinalgUtils.norm2(samples[1] - samples[0])
        drift2 = LinalgUtils.norm2(samples[2] - samples[1])
        settled = drift2 <= growth_threshold * max(1.0, LinalgUtils.norm2(samples[2]))
        if not (settled or drift2 <= CONVERGENT_RATIO * drift1):
            raise ConvergenceError(
                f"endpoint brackets do not settle at truncation {stop_value} "
                f"(drift {drift2:.3e})"
            )
    entries = _omega_at(basis, endpoint, n)
    omega = OmegaMatrix(
        entries, 2 * n, 2 * n, n, basis, endpoint, lam0, exact=sys.is_finite
    )
    logger.debug(f"Omega at lambda0={lam0}: rank {omega.rank} of {omega.p}")
    return omega


def build_upsilon(sys: SymplecticSystem, nu: float, theta: Trajectory) -> np.ndarray:
    """
    Upsilon = Theta_0* J Theta_0 for solutions of the recursion at real nu.

    The value is compared with the bracket matrix at the last index of
    ``theta``; both agree by the Wronskian identity.

    Raises:
        PreconditionError: If nu is not real, the columns are not solutions or
            are dependent
    """
    if np.imag(nu) != 0.0:
        raise PreconditionError(f"nu must be real, got {nu}")
    residual = recursion_residual(sys, float(np.real(nu)), theta)
    if residual > PRECONDITION_RESIDUAL:
        raise PreconditionError(
            f"basis does not solve the recursion at nu={nu} "
            f"(residual {residual:.3e})"
        )
    initial = theta[theta.start]
    if LinalgUtils.numerical_rank(initial) < theta.cols:
        raise PreconditionError("basis columns are linearly dependent")
    upsilon = _omega_at(theta, theta.start, sys.n)
    at_end = _omega_at(theta, theta.stop, sys.n)
    drift = LinalgUtils.norm2(upsilon - at_end)
    if drift > 1e-10 * max(1.0, LinalgUtils.norm2(upsilon)):
        logger.warning(f"Upsilon differs between the endpoints by {drift:.3e}")
    return upsilon


@dataclass
class ExtensionReport:
    """Validation of (M, L): rank, residual and the specialization applied."""

    case: str
    rank: int
    required_rank: int
    residual: float
    tolerance: float

    @property
    def self_adjoint(self) -> bool:
        return self.rank == self.required_rank and self.residual <= self.tolerance

    @property
    def verdict(self) -> str:
        return "self-adjoint" if self.self_adjoint else "not self-adjoint"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "case": self.case,
            "rank": self.rank,
            "required_rank": self.required_rank,
            "residual": self.residual,
        }


def _pair_residual(pair: BoundaryPair, middle: Optional[np.ndarray]) -> float:
    jmat = canonical_skew(pair.n)
    value = pair.m_mat @ jmat @ LinalgUtils.dagger(pair.m_mat)
    if middle is not None:
        value = value - pair.l_mat @ middle @ LinalgUtils.dagger(pair.l_mat)
    return LinalgUtils.norm2(value)


def validate_extension(
    sys: SymplecticSystem,
    pair: BoundaryPair,
    omega: Optional[OmegaMatrix] = None,
    case: Optional[str] = None,
    tol: Optional[float] = None,
) -> ExtensionReport:
    """
    Check whether (M, L) describes a self-adjoint extension.

    Cases:
        finite interval: rank(M, L) = 2n and M J M* - L J L* = 0
        limit point: rank M = n and M J M* = 0 (L is empty)
        limit circle: as the finite case, with L acting on the limiting endpoint values
        general: rank(M, L) = q and M J M* - L Omega_{2q-2n} L* = 0

    The case is inferred when not given: a supplied Omega selects the
    general form, a finite interval the finite one and an empty L the
    limit point one.

    Raises:
        ShapeMismatchError: If the shapes do not fit the case
        PreconditionError: If the case cannot be inferred
    """
    tol = resolve_tolerance(tol)
    n = sys.n
    if pair.n != n:
        raise ShapeMismatchError(f"pair is for n={pair.n}, system has n={n}")
    if case is None:
        if omega is not None:
            case = GENERAL_CASE
        elif sys.is_finite:
            case = FINITE_CASE
        elif pair.l_mat.shape[1] == 0:
            case = LIMIT_POINT_CASE
        else:
            raise PreconditionError(
                "on an unbounded interval pass omega or name the case"
            )
    if case == LIMIT_POINT_CASE:
        if pair.q != n or pair.l_mat.shape[1] != 0:
            raise ShapeMismatchError(
                f"limit point data is M of shape {n}x{2 * n} with empty L"
            )
        rank = LinalgUtils.numerical_rank(pair.m_mat)
        residual = _pair_residual(pair, None)
        required = n
    elif case in (FINITE_CASE, LIMIT_CIRCLE_CASE):
        square = (2 * n, 2 * n)
        if pair.m_mat.shape != square or pair.l_mat.shape != square:
            raise ShapeMismatchError(
                f"{case} data needs M and L of shape {2 * n}x{2 * n}"
            )
        rank = LinalgUtils.numerical_rank(pair.stacked)
        residual = _pair_residual(pair, canonical_skew(n))
        required = 2 * n
    elif case == GENERAL_CASE:
        if omega is None:
            raise PreconditionError("the general case needs the Omega matrix")
        width = 2 * pair.q - 2 * n
        if pair.l_mat.shape[1] != width or width > omega.p:
            raise ShapeMismatchError(
                f"L must have 2q-2n = {width} columns within p = {omega.p}"
            )
        rank = LinalgUtils.numerical_rank(pair.stacked)
        residual = _pair_residual(pair, omega.leading(width))
        required = pair.q
    else:
        raise PreconditionError(f"unknown case {case!r}")
    scale = max(1.0, LinalgUtils.norm2(pair.stacked) ** 2)
    report = ExtensionReport(case, rank, required, residual, tol * scale)
    logger.debug(
        f"Extension check ({case}): rank {rank}/{required}, residual {residual:.3e}"
    )
    return report


def to_general_pair(pair: BoundaryPair, omega: OmegaMatrix) -> BoundaryPair:
    """
    Rewrite a finite-interval pair in the general form over ``omega``.

    With Phi the arranged plus basis, the brackets (phi_i, z)_{N+1} equal
    Phi_{N+1}* J z_{N+1}, so L is replaced by L (Phi_{N+1}* J)^{-1}.
    """
    n = omega.n
    phi = omega.basis[omega.endpoint][:, : 2 * n]
    transform = LinalgUtils.dagger(phi) @ canonical_skew(n)
    l_general = np.linalg.solve(transform.T, pair.l_mat.T).T
    return BoundaryPair(pair.m_mat, l_general)


@dataclass
class MembershipResult:
    member: bool
    residual: float

    def __iter__(self):
        yield self.member
        yield self.residual

    def to_dict(self) -> dict:
        return {"member": self.member, "residual": self.residual}


def membership(
    sys: SymplecticSystem,
    pair: BoundaryPair,
    z: Trajectory,
    omega: Optional[OmegaMatrix] = None,
    tol: Optional[float] = None,
) -> MembershipResult:
    """
    Whether z satisfies the boundary condition of the pair.

    The right endpoint data is z at the last index of the trajectory, or the
    bracket vector against ``omega``'s basis in the general form.

    Raises:
        PreconditionError: If z is not the first component of a member of the
            maximal relation
    """
    tol = resolve_tolerance(tol)
    residual = relation_residual(sys, z)
    if residual > PRECONDITION_RESIDUAL:
        raise PreconditionError(
            f"trajectory is not in the maximal relation (residual {residual:.3e})"
        )
    if z.start != 0:
        raise PreconditionError("trajectory must start at index 0")
    if omega is None:
        right = z[z.stop]
    else:
        right = omega.endpoint_vector(z, pair.l_mat.shape[1])
    defect = pair.m_mat @ z[0] - pair.l_mat @ right
    value = LinalgUtils.norm2(defect)
    scale = max(1.0, LinalgUtils.norm2(z[0]), LinalgUtils.norm2(right))
    return MembershipResult(bool(value <= tol * scale), value)


def _row_vector(matrix: np.ndarray) -> np.ndarray:
    _, _, vh = np.linalg.svd(matrix)
    row = vh[0]
    pivot = row[np.argmax(np.abs(row))]
    row = row * np.conj(pivot) / abs(pivot)
    return np.real(row)


def _fold_angle(angle: float) -> float:
    folded = float(np.mod(angle, np.pi))
    if np.pi - folded < 1e-12:
        folded = 0.0
    return folded


def canonicalize_scalar(
    pair: BoundaryPair, tol: Optional[float] = None
) -> Union[Separated, Coupled]:
    """
    Canonical separated or coupled form of a valid scalar pair.

    rank M = 1: the angles are read from the row spaces of M and L.
    rank M = 2: K = L^{-1} M, beta = arg(det K)/2 folded into [0, pi) and
    R = e^{-i beta} K.

    Raises:
        PreconditionError: If the pair is not a valid scalar self-adjoint pair
    """
    tol = resolve_tolerance(tol)
    if pair.m_mat.shape != (2, 2) or pair.l_mat.shape != (2, 2):
        raise PreconditionError("canonical scalar forms need 2x2 matrices M and L")
    rank = LinalgUtils.numerical_rank(pair.stacked)
    residual = _pair_residual(pair, canonical_skew(1))
    if rank != 2 or residual > tol * max(1.0, LinalgUtils.norm2(pair.stacked) ** 2):
        raise PreconditionError(
            f"pair is not self-adjoint (rank {rank}, residual {residual:.3e})"
        )
    rank_m = LinalgUtils.numerical_rank(pair.m_mat)
    rank_l = LinalgUtils.numerical_rank(pair.l_mat)
    if rank_m != rank_l:
        raise PreconditionError(f"rank M = {rank_m} differs from rank L = {rank_l}")
    if rank_m == 1:
        r = _row_vector(pair.m_mat)
        l = _row_vector(pair.l_mat)
        return Separated(
            _fold_angle(np.arctan2(r[1], r[0])), _fold_angle(np.arctan2(-l[0], l[1]))
        )
    k_mat = np.linalg.solve(pair.l_mat, pair.m_mat)
    delta = float(np.angle(np.linalg.det(k_mat)))
    beta = _fold_angle(delta / 2.0)
    r_mat = np.exp(-1j * beta) * k_mat
    return Coupled(r_mat, beta)


def named_pair(name: str, n: int = 1) -> BoundaryPair:
    """
    Block versions of the classical conditions for any n.

    dirichlet: x_0 = 0 = x_{N+1}; neumann: u_0 = 0 = u_{N+1};
    periodic: z_0 = z_{N+1}; antiperiodic: z_0 = -z_{N+1}.
    """
    eye = np.eye(n)
    zero = np.zeros((n, n))
    if name == "dirichlet":
        return BoundaryPair(
            np.block([[eye, zero], [zero, zero]]), np.block([[zero, zero], [eye, zero]])
        )
    if name == "neumann":
        return BoundaryPair(
            np.block([[zero, eye], [zero, zero]]), np.block([[zero, zero], [zero, eye]])
        )
    if name == "periodic":
        return BoundaryPair(np.eye(2 * n), np.eye(2 * n))
    if name == "antiperiodic":
        return BoundaryPair(np.eye(2 * n), -np.eye(2 * n))
    raise ValueError(
        f"unknown boundary form {name!r}; expected one of {', '.join(NAMED_FORMS)}"
    )


def from_fg(f_mat: np.ndarray, g_mat: np.ndarray) -> BoundaryPair:
    """
    The pair M = [F_1, G_1], L = [-F_2, G_2] (column halves) of the condition
    F gamma_x + G gamma_u = 0; then M J M* - L J L* = F G* - G F*.
    """
    f_mat = np.atleast_2d(np.asarray(f_mat, dtype=complex))
    g_mat = np.atleast_2d(np.asarray(g_mat, dtype=complex))
    rows, cols = f_mat.shape
    if f_mat.shape != g_mat.shape or rows != cols or rows % 2:
        raise ShapeMismatchError(
            "F and G must be equal 2n x 2n matrices, "
            f"got {f_mat.shape} and {g_mat.shape}"
        )
    n = f_mat.shape[0] // 2
    m_mat = np.hstack([f_mat[:, :n], g_mat[:, :n]])
    l_mat = np.hstack([-f_mat[:, n:], g_mat[:, n:]])
    return BoundaryPair(m_mat, l_mat)


def fg_residual(f_mat: np.ndarray, g_mat: np.ndarray) -> float:
    """|F G* - G F*|, zero for self-adjoint conditions."""
    cross = f_mat @ LinalgUtils.dagger(g_mat)
    return LinalgUtils.norm2(cross - LinalgUtils.dagger(cross))


def to_fg(pair: BoundaryPair) -> FGForm:
    n = pair.n
    if pair.l_mat.shape != pair.m_mat.shape or pair.q != 2 * n:
        raise ShapeMismatchError("(F, G) form needs square M and L of equal shape")
    f_mat = np.hstack([pair.m_mat[:, :n], -pair.l_mat[:, :n]])
    g_mat = np.hstack([pair.m_mat[:, n:], pair.l_mat[:, n:]])
    return FGForm(f_mat, g_mat)


def from_unitary(v_mat: np.ndarray) -> Tuple[FGForm, BoundaryPair]:
    """
    F = (i/2)(I - V), G = (1/2)(I + V) and the resulting pair.

    Raises:
        PreconditionError: If V is not unitary
    """
    form = UnitaryForm(v_mat)
    fg = form.to_fg()
    return fg, fg.to_pair()


def to_unitary(pair: BoundaryPair) -> UnitaryForm:
    """
    V = (F + iG)^{-1} (iG - F) from the (F, G) form of a self-adjoint pair.

    Raises:
        PreconditionError: If F + iG is singular or V is not unitary
    """
    fg = to_fg(pair)
    combined = fg.f_mat + 1j * fg.g_mat
    if LinalgUtils.condition_number(combined) > 1e12:
        raise PreconditionError("F + iG is singular; the pair is not self-adjoint")
    v_mat = np.linalg.solve(combined, 1j * fg.g_mat - fg.f_mat)
    return UnitaryForm(v_mat)


@dataclass
class EquivalenceResult:
    equivalent: bool
    witness: Optional[np.ndarray] = None
    residual: Optional[float] = None

    def __bool__(self) -> bool:
        return self.equivalent

    def to_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "witness": self.witness,
            "residual": self.residual,
        }


def equivalent(first: BoundaryPair, second: BoundaryPair) -> EquivalenceResult:
    """
    Whether two pairs define the same relation, i.e. (M2, L2) = C (M1, L1)
    for an invertible C; returns the least-squares C when they do.

    Raises:
        ShapeMismatchError: If the shapes differ
        PreconditionError: If a pair lacks full row rank
    """
    if (first.m_mat.shape, first.l_mat.shape) != (
        second.m_mat.shape,
        second.l_mat.shape,
    ):
        raise ShapeMismatchError("pairs have different shapes")
    a_mat = first.stacked
    b_mat = second.stacked
    for label, mat in (("first", a_mat), ("second", b_mat)):
        if LinalgUtils.numerical_rank(mat) != mat.shape[0]:
            raise PreconditionError(f"{label} pair does not have full row rank")
    if not LinalgUtils.same_row_space(a_mat, b_mat, RANK_RATIO):
        return EquivalenceResult(False)
    witness_t, *_ = np.linalg.lstsq(a_mat.T, b_mat.T, rcond=None)
    witness = witness_t.T
    residual = LinalgUtils.norm2(witness @ a_mat - b_mat)
    return EquivalenceResult(True, witness, residual)


@dataclass
class GKNReport:
    """Checks of a candidate GKN set: vanishing brackets and endpoint independence."""

    brackets: np.ndarray
    bracket_residual: float
    endpoint_rank: int
    count: int
    tolerance: float

    @property
    def brackets_vanish(self) -> bool:
        return self.bracket_residual <= self.tolerance

    @property
    def independent(self) -> bool:
        return self.endpoint_rank == self.count

    @property
    def passed(self) -> bool:
        return self.brackets_vanish and self.independent

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "brackets_vanish": self.brackets_vanish,
            "bracket_residual": self.bracket_residual,
            "independent": self.independent,
            "endpoint_rank": self.endpoint_rank,
            "count": self.count,
        }


Candidate = Union[Trajectory, Tuple[Trajectory, Trajectory]]


def verify_gkn_set(
    sys: SymplecticSystem, candidates: Sequence[Candidate], tol: Optional[float] = None
) -> GKNReport:
    """
    Verify a candidate GKN set on a finite interval.

    Each candidate is a trajectory on [0, N+1] (optionally with its forcing);
    multi-column trajectories contribute one candidate per column.

    Raises:
        PreconditionError: If a candidate does not satisfy its recursion
    """
    tol = resolve_tolerance(tol)
    if not sys.is_finite:
        raise PreconditionError("GKN sets are verified on finite intervals only")
    end = sys.horizon(None) + 1
    columns = []
    for item in candidates:
        z, f = item if isinstance(item, tuple) else (item, None)
        if f is None:
            residual = relation_residual(sys, z)
        else:
            residual = recursion_residual(sys, 0.0, z, f)
        if residual > PRECONDITION_RESIDUAL:
            raise PreconditionError(
                f"candidate does not satisfy the recursion (residual {residual:.3e})"
            )
        if z.start != 0 or z.stop != end:
            raise PreconditionError(f"candidates must live on [0, {end}]")
        columns.append(z.values)
    stacked = Trajectory(np.concatenate(columns, axis=2), 0)
    brackets = bracket_matrix(stacked, stacked, 0, end)
    endpoints = np.vstack([stacked[0], stacked[end]])
    scale = max(1.0, LinalgUtils.norm2(endpoints) ** 2)
    return GKNReport(
        brackets,
        float(np.max(np.abs(brackets))) if brackets.size else 0.0,
        LinalgUtils.numerical_rank(endpoints),
        stacked.cols,
        tol * scale,
    )


def gkn_set_from_pair(
    sys: SymplecticSystem, pair: BoundaryPair
) -> Tuple[Trajectory, Trajectory]:
    """
    Elements with endpoint values z_0 = J M* e_i and z_{N+1} = J L* e_i,
    one column per row of the pair, joined through the patching problem on [0, N].

    Raises:
        AtkinsonFailureError: If the interval does not support patching
    """
    if not sys.is_finite:
        raise PreconditionError("GKN sets are built on finite intervals only")
    jmat = canonical_skew(sys.n)
    alpha = jmat @ LinalgUtils.dagger(pair.m_mat)
    beta = jmat @ LinalgUtils.dagger(pair.l_mat)
    return patching_bvp(sys, 0, sys.horizon(None), alpha, beta)


def sample_minimal_pairs(
    sys: SymplecticSystem, count: int, rng: Optional[np.random.Generator] = None
) -> Tuple[Trajectory, Trajectory]:
    """
    Random members {z, f} of the minimal relation, as ``count``-column trajectories.

    A forward solution from zero with random forcing is corrected by a
    patching solution so that both endpoint values vanish.

    Raises:
        AtkinsonFailureError: If the interval does not support patching
    """
    if not sys.is_finite:
        raise PreconditionError("minimal-relation samples need a finite interval")
    rng = np.random.default_rng() if rng is None else rng
    last = sys.horizon(None)
    n2 = 2 * sys.n
    shape = (last + 1, n2, count)
    forcing = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    zero = np.zeros((n2, count), dtype=complex)
    z = solve_ivp(sys, 0.0, 0, zero, f=forcing)
    patch, patch_f = patching_bvp(sys, 0, last, zero, z[last + 1])
    return z - patch, Trajectory(forcing, 0) - patch_f


@dataclass
class KreinResult:
    """The Krein-von Neumann extension of a scalar system with its derivation."""

    form: Coupled
    g_matrix: np.ndarray
    branch: str
    kernel_initial: np.ndarray
    kernel_residuals: List[float]
    real_shortcut: Optional[BoundaryPair]
    positivity: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "form": self.form.to_dict(),
            "G": self.g_matrix,
            "branch": self.branch,
            "kernel_initial_values": self.kernel_initial,
            "kernel_membership_residuals": self.kernel_residuals,
            "real_shortcut": (
                None if self.real_shortcut is None else self.real_shortcut.to_dict()
            ),
            "positivity": self.positivity,
        }


def _positivity_sample(
    sys: SymplecticSystem, samples: int, rng: np.random.Generator
) -> Dict[str, object]:
    record: Dict[str, object] = {"certified": False, "samples": samples}
    try:
        z, f = sample_minimal_pairs(sys, samples, rng)
    except AtkinsonFailureError as exc:
        record.update(sampled=False, reason=str(exc))
        logger.warning(
            "Positivity sample skipped: Atkinson condition fails on the interval"
        )
        return record
    last = sys.horizon(None)
    psi = sys.psi_seq
    pairing = np.diag(gram(z, f, psi, last)).real
    norms = np.diag(gram(z, z, psi, last)).real
    ratios = pairing / np.maximum(norms, np.finfo(float).tiny)
    record.update(
        sampled=True,
        min_ratio=float(np.min(ratios)),
        positive=bool(np.all(ratios > 0.0)),
    )
    if not record["positive"]:
        logger.warning(
            "Minimal relation is not positive on the sample; "
            "the Krein extension may not apply"
        )
    try:
        from .spectral import eigenvalues

        spectrum = eigenvalues(sys, named_pair("dirichlet", 1))
        values = spectrum.eigenvalues.real
        record["dirichlet_lowest"] = float(np.min(values)) if values.size else None
    except DegenerateRelationError:
        record["dirichlet_lowest"] = None
    return record


def krein_von_neumann(
    sys: SymplecticSystem,
    samples: int = 8,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
) -> KreinResult:
    """
    Krein-von Neumann extension T_min + (ker T_max x {0}) of a scalar system.

    With G = (S_0 S_1 ... S_N)^{-1} every homogeneous solution at lambda = 0
    satisfies z_{N+1} = G z_0, so the extension is given by the pair (G, I),
    written in coupled form with e^{i beta} = sqrt(det G). Positivity of the
    minimal relation is sampled, not certified.

    Raises:
        PreconditionError: If the system is not scalar or not on a finite interval
    """
    tol = resolve_tolerance(tol)
    if sys.n != 1:
        raise PreconditionError(
            "the Krein-von Neumann construction needs a scalar system"
        )
    if not sys.is_finite:
        raise PreconditionError(
            "the Krein-von Neumann construction needs a finite interval"
        )
    rng = np.random.default_rng(0) if rng is None else rng
    last = sys.horizon(None)
    product = np.eye(2, dtype=complex)
    for k in range(last + 1):
        product = product @ sys.s(k)
    g_matrix = np.linalg.inv(product)
    (a, b), (c, d) = g_matrix
    if abs(b) > 1e-12:
        branch = "b_nonzero"
        kernel = np.array([[0.0, 1.0], [1.0 / b, -a / b]], dtype=complex)
    else:
        branch = "b_zero"
        kernel = np.array([[0.0, 1.0], [1.0 / d, -c / d]], dtype=complex)
    pair = BoundaryPair(g_matrix, np.eye(2))
    form = canonicalize_scalar(pair, tol)
    if not isinstance(form, Coupled):
        raise DegenerateRelationError(
            "Krein-von Neumann data did not produce a coupled condition"
        )
    kernel_traj = solve_ivp(sys, 0.0, 0, kernel)
    residuals = [
        membership(sys, form.to_pair(), kernel_traj.column(j), tol=tol).residual
        for j in range(2)
    ]
    real_shortcut = None
    if np.max(np.abs(np.imag(g_matrix))) <= REAL_TOLERANCE:
        real_shortcut = BoundaryPair(np.real(g_matrix), np.eye(2))
    positivity = _positivity_sample(sys, samples, rng)
    logger.info(f"Krein-von Neumann extension: beta={form.beta:.6g}, branch {branch}")
    return KreinResult(
        form, g_matrix, branch, kernel, residuals, real_shortcut, positivity
    )

