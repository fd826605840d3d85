"""
Transfer matrices as exact polynomials in lambda and eigenvalues of
finite-interval boundary value problems.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import polynomial as poly

from ..base.config import resolve_tolerance
from ..base.exceptions import (
    ConvergenceError,
    DegenerateRelationError,
    PreconditionError,
    ShapeMismatchError,
)
from ..base.logger import get_logger
from ..utils.linalg_utils import LinalgUtils
from .core import Trajectory, gram
from .extensions import BoundaryPair, validate_extension
from .solver import recursion_residual, solve_ivp
from .system import SymplecticSystem, lambda_matrix

logger = get_logger("symplectic.spectral")

EPS = float(np.finfo(float).eps)
# Multiple of eps * (factors + size) applied to the absolute-value expansion.
ROUNDING_FACTOR = 4.0
# Rank cut for the weights when bounding the determinant's degree.
WEIGHT_RANK_RATIO = 1e-12
CLUSTER_RATIO = 1e-7
# Pencil eigenvalues beyond FINITE_RATIO * ||A|| / ||B|| count as infinite.
FINITE_RATIO = 1e6
SINGULAR_RATIO = 1e-11
EIGENPAIR_RESIDUAL = 1e-8
REAL_SPECTRUM_TOL = 1e-9
# Relative widening of the root interval sampled by the Chebyshev fit.
CHEBYSHEV_PAD = 0.02
METHODS = ("auto", "pencil", "companion", "chebyshev")


class PolyMatrix:
    """
    Matrix polynomial sum_j C_j lambda^j stored as coefficients of shape
    (degree + 1, rows, cols) in ascending powers.
    """

    def __init__(self, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 3:
            raise ShapeMismatchError(
                f"coefficients must have shape (d+1, r, c), got {coeffs.shape}"
            )
        self.coeffs = coeffs

    @classmethod
    def linear(cls, constant: np.ndarray, slope: np.ndarray) -> "PolyMatrix":
        return cls(np.stack([constant, slope]))

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[1:]

    def __call__(self, lam: complex) -> np.ndarray:
        result = np.zeros(self.shape, dtype=complex)
        for coeff in self.coeffs[::-1]:
            result = result * lam + coeff
        return result

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.shape[1] != other.shape[0]:
            raise ShapeMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        out = np.zeros(
            (self.degree + other.degree + 1, self.shape[0], other.shape[1]),
            dtype=complex,
        )
        for i, coeff in enumerate(self.coeffs):
            out[i: i + other.degree + 1] += coeff @ other.coeffs
        return PolyMatrix(out)

    def left_multiply(self, matrix: np.ndarray) -> "PolyMatrix":
        return PolyMatrix(np.asarray(matrix, dtype=complex) @ self.coeffs)

    def minus_constant(self, matrix: np.ndarray) -> "PolyMatrix":
        coeffs = self.coeffs.copy()
        coeffs[0] -= matrix
        return PolyMatrix(coeffs)

    def entry(self, i: int, j: int) -> np.ndarray:
        return self.coeffs[:, i, j]

    def __repr__(self) -> str:
        return f"PolyMatrix(shape={self.shape}, degree={self.degree})"


def _product(sys: SymplecticSystem, absolute: bool) -> PolyMatrix:
    def factor(k: int) -> PolyMatrix:
        if absolute:
            return PolyMatrix.linear(np.abs(sys.s(k)), np.abs(sys.v(k)))
        return PolyMatrix.linear(sys.s(k), sys.v(k))

    product = factor(0)
    for k in range(1, sys.horizon(None) + 1):
        product = product @ factor(k)
    return product


def transfer_poly(sys: SymplecticSystem) -> PolyMatrix:
    """
    Pi(lambda) = S_0(lambda) S_1(lambda) ... S_N(lambda), so that
    z_0 = Pi(lambda) z_{N+1}.

    Raises:
        PreconditionError: On an unbounded interval
    """
    if not sys.is_finite:
        raise PreconditionError("transfer matrices need a finite interval")
    return _product(sys, absolute=False)


def _poly_add(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    length = max(first.size, second.size)
    return np.pad(first, (0, length - first.size)) + np.pad(
        second, (0, length - second.size)
    )


def _expand_det(entries: List[List[np.ndarray]], signed: bool = True) -> np.ndarray:
    """
    Laplace expansion along successive rows, memoized on the set of free
    columns: an s x s polynomial matrix costs s 2^s convolutions.

    With ``signed=False`` all terms are added; on absolute values this is
    the scale against which the rounding of the signed sum is measured.
    """
    size = len(entries)
    memo: Dict[int, np.ndarray] = {}

    def minor(mask: int) -> np.ndarray:
        if mask == 0:
            return np.ones(1)
        if mask in memo:
            return memo[mask]
        row = size - bin(mask).count("1")
        total = np.zeros(1)
        position = 0
        for col in range(size):
            bit = 1 << col
            if not mask & bit:
                continue
            if np.any(entries[row][col]):
                term = np.convolve(entries[row][col], minor(mask ^ bit))
                total = _poly_add(total, -term if signed and position % 2 else term)
            position += 1
        memo[mask] = total
        return total

    return minor((1 << size) - 1)


def degree_bound(sys: SymplecticSystem) -> int:
    """
    sum_k rank Psi_k, the rank of the lambda part of the block pencil and
    hence a bound on the degree of det(M Pi(lambda) - L).
    """
    return sum(
        LinalgUtils.numerical_rank(sys.psi(k), WEIGHT_RANK_RATIO)
        for k in range(sys.horizon(None) + 1)
    )


@dataclass
class CharacteristicPolynomial:
    """
    Coefficients of det(M Pi(lambda) - L) in ascending powers.

    ``rounding`` bounds the floating point error of each coefficient;
    ``dropped`` counts nonzero coefficients above the kept degree that were
    indistinguishable from rounding and therefore cut.
    """

    coeffs: np.ndarray
    rounding: np.ndarray
    degree_bound: int
    dropped: int = 0

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, lam: complex) -> complex:
        return complex(poly.polyval(lam, self.coeffs))

    def derivative(self, lam: complex) -> complex:
        if self.degree == 0:
            return 0.0
        return complex(poly.polyval(lam, poly.polyder(self.coeffs)))

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coeffs,
            "degree": self.degree,
            "degree_bound": self.degree_bound,
            "rounding_bound": float(np.max(self.rounding)),
            "dropped_terms": self.dropped,
        }


def _check_pair(sys: SymplecticSystem, pair: BoundaryPair) -> None:
    size = 2 * sys.n
    if pair.m_mat.shape != (size, size) or pair.l_mat.shape != (size, size):
        raise ShapeMismatchError(f"pair matrices must be {size}x{size}")


def characteristic_det(
    sys: SymplecticSystem, pair: BoundaryPair
) -> CharacteristicPolynomial:
    """
    Coefficients of det(M Pi(lambda) - L) by exact Laplace expansion with
    polynomial products.

    The same expansion on |M| |Pi| + |L| bounds the rounding of every
    coefficient. Coefficients above sum_k rank Psi_k vanish identically and
    are cut, and so are leading ones that do not exceed their bound.

    Raises:
        PreconditionError: On an unbounded interval
        DegenerateRelationError: If no coefficient rises above its rounding bound
        ConvergenceError: If the coefficients overflow double precision
    """
    if not sys.is_finite:
        raise PreconditionError("characteristic determinants need a finite interval")
    _check_pair(sys, pair)
    size = 2 * sys.n
    with np.errstate(over="ignore", invalid="ignore"):
        matrix = _product(sys, absolute=False).left_multiply(pair.m_mat)
        matrix = matrix.minus_constant(pair.l_mat)
        scale = _product(sys, absolute=True).left_multiply(np.abs(pair.m_mat))
        scale = scale.minus_constant(-np.abs(pair.l_mat))
        coeffs = _expand_det(
            [[matrix.entry(i, j) for j in range(size)] for i in range(size)]
        )
        magnitude = _expand_det(
            [[scale.entry(i, j).real for j in range(size)] for i in range(size)],
            signed=False,
        )
    if not (np.all(np.isfinite(coeffs)) and np.all(np.isfinite(magnitude))):
        raise ConvergenceError(
            "characteristic polynomial coefficients overflow double precision"
        )

    bound = degree_bound(sys)
    steps = sys.horizon(None) + 1
    rounding = ROUNDING_FACTOR * EPS * (steps + size) * magnitude
    coeffs = _poly_add(coeffs, np.zeros(bound + 1))[: bound + 1]
    rounding = _poly_add(rounding, np.zeros(bound + 1))[: bound + 1]
    significant = np.nonzero(np.abs(coeffs) > rounding)[0]
    if significant.size == 0:
        raise DegenerateRelationError(
            "det(M Pi(lambda) - L) vanishes identically; the relation is multivalued "
            "and has no eigenvalue problem in this sense"
        )
    top = int(significant[-1])
    dropped = int(np.count_nonzero(coeffs[top + 1:]))
    if dropped:
        logger.debug(f"Cut {dropped} leading coefficients below their rounding bound")
    return CharacteristicPolynomial(
        coeffs[: top + 1], rounding[: top + 1], bound, dropped
    )


def block_pencil(
    sys: SymplecticSystem, pair: BoundaryPair
) -> Tuple[np.ndarray, np.ndarray]:
    """
    The pencil A - lambda B acting on (z_0, ..., z_{N+1}).

    Block row k is z_k - S_k(lambda) z_{k+1}, the last block row is
    M z_0 - L z_{N+1}. Eliminating z_0 ... z_N shows
    det(A - lambda B) = det(M Pi(lambda) - L).
    """
    if not sys.is_finite:
        raise PreconditionError("the block pencil needs a finite interval")
    _check_pair(sys, pair)
    size = 2 * sys.n
    steps = sys.horizon(None) + 1
    dim = size * (steps + 1)
    a_mat = np.zeros((dim, dim), dtype=complex)
    b_mat = np.zeros((dim, dim), dtype=complex)
    for k in range(steps):
        here = slice(k * size, (k + 1) * size)
        after = slice((k + 1) * size, (k + 2) * size)
        a_mat[here, here] = np.eye(size)
        a_mat[here, after] = -sys.s(k)
        b_mat[here, after] = sys.v(k)
    last = slice(steps * size, dim)
    a_mat[last, :size] = pair.m_mat
    a_mat[last, last] = -pair.l_mat
    return a_mat, b_mat


def _pencil_roots(a_mat: np.ndarray, b_mat: np.ndarray, limit: int) -> np.ndarray:
    """
    Finite generalized eigenvalues by QZ, at most ``limit`` of them.

    Raises:
        DegenerateRelationError: If the pencil is singular
    """
    norm_b = float(np.linalg.norm(b_mat))
    if norm_b == 0.0 or limit == 0:
        return np.zeros(0, dtype=complex)
    alpha, beta = scipy.linalg.eig(a_mat, b_mat, right=False, homogeneous_eigvals=True)
    size_a = np.abs(alpha) / float(np.linalg.norm(a_mat))
    size_b = np.abs(beta) / norm_b
    if np.any((size_a <= SINGULAR_RATIO) & (size_b <= SINGULAR_RATIO)):
        raise DegenerateRelationError(
            "the block pencil is singular, so det(M Pi(lambda) - L) "
            "vanishes identically"
        )
    finite = np.nonzero(size_a < FINITE_RATIO * size_b)[0]
    order = finite[np.argsort(-(size_b[finite] / np.maximum(size_a[finite], EPS)))]
    keep = order[:limit]
    if finite.size > limit:
        logger.debug(f"Dropped {finite.size - limit} pencil values beyond the degree")
    return alpha[keep] / beta[keep]


def _cluster(roots: np.ndarray) -> List[List[complex]]:
    clusters: List[List[complex]] = []
    for root in sorted(roots, key=lambda r: (r.real, r.imag)):
        for group in clusters:
            centre = np.mean(group)
            if abs(root - centre) <= CLUSTER_RATIO * (1.0 + abs(centre)):
                group.append(root)
                break
        else:
            clusters.append([root])
    return clusters


def _transfer_at(sys: SymplecticSystem, lam: complex) -> np.ndarray:
    product = np.eye(2 * sys.n, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(sys.horizon(None) + 1):
            product = product @ lambda_matrix(sys, lam, k)
    return product


def _numeric_det(sys: SymplecticSystem, pair: BoundaryPair, lam: complex) -> complex:
    matrix = pair.m_mat @ _transfer_at(sys, lam) - pair.l_mat
    if not np.all(np.isfinite(matrix)):
        return complex(np.inf)
    return complex(np.linalg.det(matrix))


def _polish(
    sys: SymplecticSystem,
    pair: BoundaryPair,
    charpoly: CharacteristicPolynomial,
    lam: complex,
) -> complex:
    slope = charpoly.derivative(lam)
    if slope == 0.0:
        return lam
    value = _numeric_det(sys, pair, lam)
    if not np.isfinite(value):
        return lam
    candidate = lam - value / slope
    if abs(_numeric_det(sys, pair, candidate)) < abs(value):
        return candidate
    return lam


def _companion_roots(coeffs: np.ndarray) -> np.ndarray:
    descending = coeffs[::-1]
    if descending.size < 2:
        return np.zeros(0, dtype=complex)
    return scipy.linalg.eigvals(scipy.linalg.companion(descending))


def _chebyshev_roots(
    sys: SymplecticSystem, pair: BoundaryPair, estimate: np.ndarray
) -> np.ndarray:
    """
    Real roots from a Chebyshev fit of the numeric determinant on the real
    interval spanned by ``estimate``, padded by CHEBYSHEV_PAD.
    """
    if estimate.size == 0:
        return estimate
    lo, hi = float(np.min(estimate.real)), float(np.max(estimate.real))
    pad = CHEBYSHEV_PAD * (hi - lo) + 1e-6 * (1.0 + max(abs(lo), abs(hi)))
    centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo) + pad
    degree = estimate.size
    nodes = np.cos(np.pi * (np.arange(2 * degree + 2) + 0.5) / (2 * degree + 2))
    values = np.array([_numeric_det(sys, pair, centre + half * x) for x in nodes])
    if not np.all(np.isfinite(values)):
        raise ConvergenceError("the determinant overflows on the Chebyshev nodes")
    fitted = cheb.chebfit(nodes, values, degree)
    roots = np.asarray(cheb.chebroots(fitted), dtype=complex)
    inside = (np.abs(roots.imag) <= 1e-6) & (np.abs(roots.real) <= 1.0)
    return (centre + half * roots[inside].real).astype(complex)


@dataclass
class Spectrum:
    """
    Eigenvalues with multiplicities, boundary vectors z_{N+1}, eigenfunctions
    and the checks made on them.
    """

    eigenvalues: np.ndarray
    multiplicities: List[int]
    eigenvectors: List[np.ndarray]
    eigenfunctions: List[Trajectory]
    residuals: List[float]
    orthogonality: np.ndarray
    self_adjoint: bool
    method: str
    characteristic: Optional[CharacteristicPolynomial] = None
    rejected: List[complex] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def max_imag(self) -> float:
        if self.eigenvalues.size == 0:
            return 0.0
        relative = np.abs(self.eigenvalues.imag) / (1.0 + np.abs(self.eigenvalues))
        return float(np.max(relative))

    @property
    def orthogonality_residual(self) -> float:
        """Largest normalized pairing of eigenfunctions with distinct eigenvalues."""
        labels = np.concatenate(
            [np.full(vecs.shape[1], i) for i, vecs in enumerate(self.eigenvectors)]
            or [np.zeros(0, dtype=int)]
        )
        distinct = labels[:, None] != labels[None, :]
        if not np.any(distinct):
            return 0.0
        return float(np.max(np.abs(self.orthogonality[distinct])))

    def to_rows(self) -> List[dict]:
        return [
            {
                "index": i,
                "real": float(lam.real),
                "imag": float(lam.imag),
                "multiplicity": self.multiplicities[i],
                "residual": self.residuals[i],
            }
            for i, lam in enumerate(self.eigenvalues)
        ]

    def to_dict(self) -> dict:
        characteristic = self.characteristic
        return {
            "method": self.method,
            "self_adjoint": self.self_adjoint,
            "count": int(sum(self.multiplicities)),
            "eigenvalues": self.to_rows(),
            "max_imag": self.max_imag,
            "orthogonality_residual": self.orthogonality_residual,
            "orthogonality": self.orthogonality,
            "characteristic": (
                None if characteristic is None else characteristic.to_dict()
            ),
            "rejected": self.rejected,
            "notes": self.notes,
        }


def _eigenfunctions(
    sys: SymplecticSystem, pair: BoundaryPair, lam: complex, multiplicity: int
) -> Optional[Tuple[np.ndarray, Trajectory, float]]:
    """Null vectors, weighted-orthonormal eigenfunctions and their residual."""
    end = sys.horizon(None) + 1
    matrix = pair.m_mat @ _transfer_at(sys, lam) - pair.l_mat
    if not np.all(np.isfinite(matrix)):
        return None
    _, sv, vh = np.linalg.svd(matrix)
    small = int(np.sum(sv <= 1e-8 * max(1.0, sv[0])))
    count = min(max(small, 1), multiplicity)
    vectors = LinalgUtils.dagger(vh[-count:])
    with np.errstate(over="ignore", invalid="ignore"):
        traj = solve_ivp(sys, lam, end, vectors, start=0, stop=end)
    if not np.all(np.isfinite(traj.values)):
        return None
    weights = LinalgUtils.hermitian_part(gram(traj, traj, sys.psi_seq, end - 1))
    floor = 1e-14 * max(1.0, float(np.max(np.abs(weights))))
    if LinalgUtils.min_eigenvalue(weights) > floor:
        factor = np.linalg.cholesky(weights)
        transform = np.linalg.inv(LinalgUtils.dagger(factor))
        vectors = vectors @ transform
        traj = traj.right_multiply(transform)
    else:
        logger.warning(f"Eigenfunctions at lambda={lam:.6g} have zero weighted norm")
    boundary = LinalgUtils.norm2(pair.m_mat @ traj[0] - pair.l_mat @ traj[end])
    scale = max(1.0, LinalgUtils.norm2(traj[0]), LinalgUtils.norm2(traj[end]))
    residual = max(recursion_residual(sys, lam, traj), boundary / scale)
    return vectors, traj, residual


def eigenvalues(
    sys: SymplecticSystem,
    pair: BoundaryPair,
    method: str = "auto",
    tol: Optional[float] = None,
) -> Spectrum:
    """
    Eigenvalues of the boundary value problem z_k = S_k(lambda) z_{k+1},
    M z_0 - L z_{N+1} = 0 on a finite interval.

    Methods:
        ``"pencil"`` (the ``"auto"`` choice) takes the finite generalized
        eigenvalues of the block companion pencil, whose determinant is the
        characteristic polynomial; ``"companion"`` takes the companion roots
        of the polynomial's coefficients with one Newton step each;
        ``"chebyshev"`` fits the numeric determinant on the real interval of
        the pencil estimates.

    Every eigenvalue is re-verified: its null vectors are turned into
    trajectories, orthonormalized in the weighted product, and rejected when
    the recursion or boundary residual exceeds 1e-8.

    Raises:
        PreconditionError: On an unbounded interval
        DegenerateRelationError: If the characteristic determinant vanishes identically
        ConvergenceError: If a self-adjoint pair yields eigenvalues off the real
            axis, or the companion method meets overflowing coefficients
    """
    tol = resolve_tolerance(tol)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if not sys.is_finite:
        raise PreconditionError("eigenvalues are computed on finite intervals only")
    notes: List[str] = []
    charpoly: Optional[CharacteristicPolynomial]
    try:
        charpoly = characteristic_det(sys, pair)
    except ConvergenceError as exc:
        if method == "companion":
            raise
        charpoly = None
        notes.append(f"characteristic polynomial unavailable: {exc}")
    self_adjoint = validate_extension(sys, pair, tol=tol).self_adjoint
    if method == "auto":
        method = "pencil"

    limit = degree_bound(sys) if charpoly is None else charpoly.degree
    if method == "companion":
        assert charpoly is not None
        roots = _companion_roots(charpoly.coeffs)
        if charpoly.dropped:
            notes.append(
                f"{charpoly.dropped} leading coefficients were lost to cancellation; "
                "companion roots may be missing"
            )
    else:
        roots = _pencil_roots(*block_pencil(sys, pair), limit)
        if method == "chebyshev":
            roots = _chebyshev_roots(sys, pair, roots)
            notes.append("roots from a Chebyshev fit of the numeric determinant")

    values, multiplicities, vectors, functions, residuals = [], [], [], [], []
    rejected: List[complex] = []
    for group in _cluster(roots):
        lam = complex(np.mean(group))
        if method == "companion" and len(group) == 1 and charpoly is not None:
            lam = _polish(sys, pair, charpoly, lam)
        checked = _eigenfunctions(sys, pair, lam, len(group))
        if checked is None or not checked[2] <= EIGENPAIR_RESIDUAL:
            rejected.append(lam)
            continue
        values.append(lam)
        multiplicities.append(len(group))
        vectors.append(checked[0])
        functions.append(checked[1])
        residuals.append(checked[2])
    if rejected:
        logger.warning(f"Rejected {len(rejected)} roots failing reconstruction")
        notes.append(f"{len(rejected)} roots failed trajectory reconstruction")

    if functions:
        stacked = Trajectory(np.concatenate([f.values for f in functions], axis=2), 0)
        inner = gram(stacked, stacked, sys.psi_seq, sys.horizon(None))
        norms = np.sqrt(np.maximum(np.abs(np.diag(inner)), np.finfo(float).tiny))
        orthogonality = inner / np.outer(norms, norms)
    else:
        orthogonality = np.zeros((0, 0), dtype=complex)
    if not self_adjoint:
        notes.append("boundary pair is not self-adjoint")
    spectrum = Spectrum(
        eigenvalues=np.array(values, dtype=complex),
        multiplicities=multiplicities,
        eigenvectors=vectors,
        eigenfunctions=functions,
        residuals=residuals,
        orthogonality=orthogonality,
        self_adjoint=self_adjoint,
        method=method,
        characteristic=charpoly,
        rejected=rejected,
        notes=notes,
    )
    if self_adjoint and spectrum.max_imag > REAL_SPECTRUM_TOL:
        raise ConvergenceError(
            f"self-adjoint pair gave eigenvalues off the real axis "
            f"(relative imaginary part {spectrum.max_imag:.3e})"
        )
    logger.debug(
        f"Spectrum: {len(values)} distinct eigenvalues, "
        f"max imag {spectrum.max_imag:.3e}"
    )
    return spectrum
