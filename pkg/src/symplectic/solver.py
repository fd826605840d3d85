"""
Solutions of the time-reversed recursion

    z_k = S_k(lambda) z_{k+1} - J Psi_k f_k,

fundamental matrices, residual-based verification of the Lagrange and
Wronskian identities, the canonical transformation and the two-point
patching problem.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg

from ..base.config import resolve_tolerance
from ..base.exceptions import (
    AtkinsonFailureError,
    IndexOutOfRangeError,
    PreconditionError,
    ShapeMismatchError,
)
from ..base.logger import get_logger
from ..utils.linalg_utils import LinalgUtils
from .core import MatrixSeq, Trajectory, canonical_skew, skew_pairing
from .system import SymplecticSystem, lambda_stack

logger = get_logger("symplectic.solver")

# Gram matrices above this condition number are treated as singular.
SINGULAR_CONDITION = 1e12
# Recursion residual above which verification inputs are rejected.
PRECONDITION_RESIDUAL = 1e-8

Forcing = Optional[Union[MatrixSeq, np.ndarray]]


class FundamentalMatrix(Trajectory):
    """A 2n x 2n solution of the homogeneous recursion at ``lam``."""

    def __init__(self, values, offset: int = 0, lam: complex = 0.0):
        super().__init__(values, offset)
        self.lam = complex(lam)

    def inverse_at(self, k: int) -> np.ndarray:
        """Phi_k^{-1}; -J Phi_k* J for real lambda and Phi_start = I."""
        phi = self[k]
        normalized = np.allclose(
            self[self.start], np.eye(self.rows), rtol=0.0, atol=1e-14
        )
        if self.lam.imag == 0.0 and normalized:
            jmat = canonical_skew(self.n)
            return -jmat @ LinalgUtils.dagger(phi) @ jmat
        return np.linalg.inv(phi)

    def __repr__(self) -> str:
        return f"FundamentalMatrix(lam={self.lam}, [{self.start}, {self.stop}])"


def _forcing_values(
    f: Forcing, start: int, stop: int, rows: int, cols: int
) -> Optional[np.ndarray]:
    if f is None:
        return None
    if isinstance(f, MatrixSeq):
        values = f.stack(start, stop)
    else:
        arr = np.asarray(f, dtype=complex)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        values = arr[start: stop + 1]
        if values.shape[0] != stop - start + 1:
            raise ShapeMismatchError(f"forcing array does not cover [{start}, {stop}]")
    if values.shape[1:] != (rows, cols):
        raise ShapeMismatchError(
            f"forcing has shape {values.shape[1:]}, expected {(rows, cols)}"
        )
    return values


def solve_ivp(
    sys: SymplecticSystem,
    lam: complex,
    k0: int,
    z0: np.ndarray,
    f: Forcing = None,
    truncation: Optional[int] = None,
    start: int = 0,
    stop: Optional[int] = None,
) -> Trajectory:
    """
    Solve the (possibly nonhomogeneous) recursion from the value at ``k0``.

    Indices below ``k0`` come from the recursion as written; indices above
    use the exact inverse -J S_k(conj(lambda))* J.

    Args:
        sys: The system
        lam: Spectral parameter
        k0: Index of the prescribed value, in [start, stop]
        z0: Value at k0, a 2n-vector or a 2n x m matrix
        f: Forcing on the coefficient indices (zero when None)
        truncation: Required for unbounded intervals when ``stop`` is None
        start: First index of the returned trajectory
        stop: Last index of the returned trajectory (default N+1)

    Returns:
        Trajectory on [start, stop], exactly equal to z0 at k0

    Raises:
        IndexOutOfRangeError: If k0 or the range lies outside the interval
        ShapeMismatchError: If z0 or f has the wrong shape
    """
    n2 = 2 * sys.n
    if stop is None:
        stop = sys.horizon(truncation) + 1
    if not sys.interval.contains(stop, extended=True) or start < 0 or stop < start:
        raise IndexOutOfRangeError(f"range [{start}, {stop}] outside the interval")
    if not start <= k0 <= stop:
        raise IndexOutOfRangeError(f"initial index {k0} outside [{start}, {stop}]")
    init = np.asarray(z0, dtype=complex)
    if init.ndim == 1:
        init = init[:, None]
    if init.shape[0] != n2:
        raise ShapeMismatchError(
            f"initial value must have {n2} rows, got {init.shape[0]}"
        )
    cols = init.shape[1]

    jmat = sys.skew
    forcing = _forcing_values(f, start, stop - 1, n2, cols)
    if forcing is not None:
        shift = jmat @ sys.psi_stack(start, stop - 1) @ forcing
    out = np.empty((stop - start + 1, n2, cols), dtype=complex)
    out[k0 - start] = init
    if k0 > start:
        mats = lambda_stack(sys, lam, start, k0 - 1)
        for i in range(k0 - 1 - start, -1, -1):
            out[i] = mats[i] @ out[i + 1]
            if forcing is not None:
                out[i] -= shift[i]
    if k0 < stop:
        adjoint = lambda_stack(sys, np.conj(lam), k0, stop - 1)
        inverses = -jmat @ LinalgUtils.dagger(adjoint) @ jmat
        for k in range(k0, stop):
            i = k - start
            rhs = out[i] if forcing is None else out[i] + shift[i]
            out[i + 1] = inverses[k - k0] @ rhs
    return Trajectory(out, start)


def fundamental(
    sys: SymplecticSystem,
    lam: complex,
    truncation: Optional[int] = None,
    start: int = 0,
    stop: Optional[int] = None,
    initial: Optional[np.ndarray] = None,
) -> FundamentalMatrix:
    """
    Fundamental matrix with Phi_start = I (or ``initial``).
    """
    if initial is None:
        init = np.eye(2 * sys.n, dtype=complex)
    else:
        init = np.asarray(initial, dtype=complex)
    traj = solve_ivp(
        sys, lam, start, init, truncation=truncation, start=start, stop=stop
    )
    return FundamentalMatrix(traj.values, traj.offset, lam)


def mapped_relation(sys: SymplecticSystem, z: Trajectory) -> np.ndarray:
    """
    L(z)_k = J (z_k - S_k z_{k+1}) for k = z.start .. z.stop-1.
    """
    s = sys.s_stack(z.start, z.stop - 1)
    zs = z.values
    return sys.skew @ (zs[:-1] - s @ zs[1:])


def recursion_residual(
    sys: SymplecticSystem, lam: complex, z: Trajectory, f: Forcing = None
) -> float:
    """
    Largest relative defect of z_k = S_k(lambda) z_{k+1} - J Psi_k f_k over z's range.
    """
    start, stop = z.start, z.stop
    if stop <= start:
        return 0.0
    mats = lambda_stack(sys, lam, start, stop - 1)
    zs = z.values
    image = mats @ zs[1:]
    forcing = _forcing_values(f, start, stop - 1, z.rows, z.cols)
    if forcing is not None:
        image = image - sys.skew @ sys.psi_stack(start, stop - 1) @ forcing
    defect = np.linalg.norm(zs[:-1] - image, axis=(1, 2))
    scale = np.maximum.reduce(
        [
            np.ones(len(defect)),
            np.linalg.norm(zs[:-1], axis=(1, 2)),
            np.linalg.norm(image, axis=(1, 2)),
        ]
    )
    return float(np.max(defect / scale))


def relation_residual(sys: SymplecticSystem, z: Trajectory) -> float:
    """
    Distance of L(z)_k from the range of Psi_k, relative to |L(z)_k|.

    Zero exactly when some f satisfies L(z)_k = Psi_k f_k, i.e. when z is
    the first component of an element of the maximal relation.
    """
    if z.stop <= z.start:
        return 0.0
    image = mapped_relation(sys, z)
    psi = sys.psi_stack(z.start, z.stop - 1)
    worst = 0.0
    for k in range(image.shape[0]):
        projector = psi[k] @ np.linalg.pinv(psi[k], rcond=1e-12)
        defect = np.linalg.norm(image[k] - projector @ image[k])
        scale = max(
            1.0, float(np.linalg.norm(z.values[k])), float(np.linalg.norm(image[k]))
        )
        worst = max(worst, float(defect) / scale)
    return worst


def _require_solution(
    sys: SymplecticSystem, lam: complex, z: Trajectory, f: Forcing, label: str
) -> None:
    residual = recursion_residual(sys, lam, z, f)
    if residual > PRECONDITION_RESIDUAL:
        raise PreconditionError(
            f"{label} does not solve the recursion at lambda={lam} "
            f"(residual {residual:.3e})"
        )


def verify_lagrange(
    sys: SymplecticSystem,
    lam: complex,
    nu: complex,
    z: Trajectory,
    u: Trajectory,
    f: Forcing,
    g: Forcing,
    s: int,
    t: int,
) -> float:
    """
    Residual of the extended Lagrange identity on [s, t]:

        (z, u)_k |_s^{t+1} = sum_{k=s}^t [(conj(lam) - nu) z_k* Psi_k u_k
                                          + f_k* Psi_k u_k - z_k* Psi_k g_k]

    Returns:
        |LHS - RHS| (spectral norm for multi-column inputs)

    Raises:
        PreconditionError: If z or u does not solve its recursion on [s, t+1]
    """
    n2 = 2 * sys.n
    f_vals = _forcing_values(f, s, t, n2, z.cols)
    g_vals = _forcing_values(g, s, t, n2, u.cols)
    _require_solution(sys, lam, z.restrict(s, t + 1), f, "z")
    _require_solution(sys, nu, u.restrict(s, t + 1), g, "u")

    lhs = skew_pairing(z[t + 1], u[t + 1]) - skew_pairing(z[s], u[s])
    psi = sys.psi_stack(s, t)
    zs = z.stack(s, t)
    us = u.stack(s, t)
    zh = LinalgUtils.dagger(zs)
    rhs = (np.conj(lam) - nu) * np.sum(zh @ psi @ us, axis=0)
    if f_vals is not None:
        rhs = rhs + np.sum(LinalgUtils.dagger(f_vals) @ psi @ us, axis=0)
    if g_vals is not None:
        rhs = rhs - np.sum(zh @ psi @ g_vals, axis=0)
    residual = LinalgUtils.norm2(lhs - rhs)
    logger.debug(f"Lagrange identity on [{s}, {t}]: residual {residual:.3e}")
    return residual


def verify_wronskian(
    sys: SymplecticSystem, lam: complex, z: Trajectory, u: Trajectory
) -> float:
    """
    Largest drift of z_k* J u_k from its value at the first index, for z at
    lambda and u at conj(lambda).
    """
    _require_solution(sys, lam, z, None, "z")
    _require_solution(sys, np.conj(lam), u, None, "u")
    start = max(z.start, u.start)
    stop = min(z.stop, u.stop)
    base = skew_pairing(z[start], u[start])
    drift = 0.0
    for k in range(start + 1, stop + 1):
        drift = max(drift, LinalgUtils.norm2(skew_pairing(z[k], u[k]) - base))
    return drift


@dataclass(frozen=True, eq=False)
class CanonicalTransform:
    """
    Change of variables y_k = Q_k z_k with Q_k = Phi_k^{-1} at lambda = 0.

    Attributes:
        psi_hat: Transformed weights Phi_k* Psi_k Phi_k on [0, N]
        q: Q_k on [0, N+1]
        semidefinite_preserved: Whether psi_hat is semidefinite exactly when Psi is
    """

    psi_hat: MatrixSeq
    q: Trajectory
    semidefinite_preserved: bool

    def apply(self, z: Union[Trajectory, MatrixSeq]) -> Trajectory:
        """Transform a trajectory (or a forcing sequence) pointwise."""
        start = max(z.start, self.q.start)
        stop = min(z.stop, self.q.stop)
        return Trajectory(self.q.stack(start, stop) @ z.stack(start, stop), start)

    def residual(self, y: Trajectory, g: Trajectory) -> float:
        """Largest defect of -J (y_{k+1} - y_k) = psi_hat_k g_k."""
        jmat = canonical_skew(y.n)
        start, stop = y.start, min(y.stop - 1, g.stop)
        lhs = -jmat @ (y.stack(start + 1, stop + 1) - y.stack(start, stop))
        rhs = self.psi_hat.stack(start, stop) @ g.stack(start, stop)
        scale = max(1.0, float(np.max(np.abs(rhs))) if rhs.size else 1.0)
        return float(np.max(np.linalg.norm(lhs - rhs, axis=(1, 2)))) / scale


def canonical_transform(
    sys: SymplecticSystem, truncation: Optional[int] = None, tol: Optional[float] = None
) -> CanonicalTransform:
    """
    Transform the system at lambda = 0 into the form -J Delta y_k = psi_hat_k g_k.

    Q_k = -J Phi_k* J with Phi_0 = I, and psi_hat_k = Phi_k* Psi_k Phi_k.
    """
    tol = resolve_tolerance(tol)
    stop = sys.horizon(truncation)
    phi = fundamental(sys, 0.0, truncation=truncation)
    jmat = sys.skew
    phis = phi.values
    q_vals = -jmat @ LinalgUtils.dagger(phis) @ jmat
    psi = sys.psi_stack(0, stop)
    psi_hat = LinalgUtils.dagger(phis[:-1]) @ psi @ phis[:-1]
    hat_scale = max(1.0, float(np.max(np.abs(psi_hat))))
    psi_psd = np.linalg.eigvalsh(LinalgUtils.hermitian_part(psi))[:, 0] >= -tol
    hat_psd = (
        np.linalg.eigvalsh(LinalgUtils.hermitian_part(psi_hat))[:, 0]
        >= -tol * hat_scale
    )
    preserved = bool(np.all(psi_psd == hat_psd))
    if not preserved:
        logger.warning(
            "Canonical transform changed the semidefiniteness of the weights"
        )
    return CanonicalTransform(
        MatrixSeq.from_array(psi_hat), Trajectory(q_vals, 0), preserved
    )


def patching_bvp(
    sys: SymplecticSystem,
    c: int,
    d: int,
    alpha: np.ndarray,
    beta: np.ndarray,
) -> Tuple[Trajectory, Trajectory]:
    """
    Find z and f on [c, d] with L(z)_k = Psi_k f_k, z_c = alpha and z_{d+1} = beta.

    With Phi a fundamental matrix at lambda = 0 and A = sum_{k=c}^d Phi_k* Psi_k Phi_k,
    solve A eta = -Phi_{d+1}* J beta and A omega = -Phi_c* J alpha, then
    propagate h1 = Phi eta forward from zero at c and h2 = Phi omega backward
    from zero at d+1. z = z1 + z2 and f = h1 - h2.

    Args:
        sys: The system
        c: First index of the patch
        d: Last coefficient index of the patch
        alpha: Value at c (2n-vector or 2n x m)
        beta: Value at d+1

    Returns:
        z on [c, d+1] and f on [c, d] as trajectories

    Raises:
        AtkinsonFailureError: If A has condition number above 1e12
    """
    if c > d:
        raise IndexOutOfRangeError(f"empty patch [{c}, {d}]")
    sys.interval.check_index(c)
    sys.interval.check_index(d)
    n2 = 2 * sys.n
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    if alpha.ndim == 1:
        alpha = alpha[:, None]
    if beta.ndim == 1:
        beta = beta[:, None]
    if alpha.shape != beta.shape or alpha.shape[0] != n2:
        raise ShapeMismatchError(
            f"endpoint values must both be {n2} x m, "
            f"got {alpha.shape} and {beta.shape}"
        )

    phi = fundamental(sys, 0.0, start=c, stop=d + 1)
    phis = phi.values
    psi = sys.psi_stack(c, d)
    gram = np.sum(LinalgUtils.dagger(phis[:-1]) @ psi @ phis[:-1], axis=0)
    gram = LinalgUtils.hermitian_part(gram)
    cond = LinalgUtils.condition_number(gram)
    if cond > SINGULAR_CONDITION:
        raise AtkinsonFailureError(
            f"solution Gram matrix on [{c}, {d}] is singular "
            f"(condition number {cond:.3e}); "
            "the Atkinson condition fails on this patch",
            condition_number=cond,
        )
    if cond > 1e8:
        logger.warning(
            f"Patching Gram matrix on [{c}, {d}] is ill-conditioned ({cond:.3e})"
        )
    jmat = sys.skew
    right = -LinalgUtils.dagger(phis[-1]) @ jmat @ beta
    left = -LinalgUtils.dagger(phis[0]) @ jmat @ alpha
    eta = scipy.linalg.solve(gram, right, assume_a="her")
    omega = scipy.linalg.solve(gram, left, assume_a="her")
    h1 = phis[:-1] @ eta
    h2 = phis[:-1] @ omega
    zero = np.zeros_like(alpha)
    z1 = solve_ivp(
        sys, 0.0, c, zero, f=MatrixSeq.from_array(h1, c), start=c, stop=d + 1
    )
    z2 = solve_ivp(
        sys, 0.0, d + 1, zero, f=MatrixSeq.from_array(-h2, c), start=c, stop=d + 1
    )
    logger.debug(f"Patched [{c}, {d}] with Gram condition {cond:.3e}")
    return z1 + z2, Trajectory(h1 - h2, c)


def glue_endpoints(
    sys: SymplecticSystem,
    head: Trajectory,
    tail: Trajectory,
    c: int,
    d: int,
    head_f: Optional[Trajectory] = None,
    tail_f: Optional[Trajectory] = None,
) -> Tuple[Trajectory, Trajectory]:
    """
    Interpolate between two trajectories.

    The result equals ``head`` on [head.start, c], ``tail`` on [d+1, tail.stop]
    and solves the patching problem on [c, d] in between.

    Returns:
        The glued trajectory and its forcing on [head.start, tail.stop - 1]
    """
    if not (head.has(c) and tail.has(d + 1)) or head.start > c or tail.stop < d + 1:
        raise IndexOutOfRangeError(f"head must reach {c} and tail must reach {d + 1}")
    if head.cols != tail.cols:
        raise ShapeMismatchError("head and tail have different column counts")
    patch, patch_f = patching_bvp(sys, c, d, head[c], tail[d + 1])
    start, stop = head.start, tail.stop
    values = np.concatenate(
        [head.stack(start, c - 1), patch.values, tail.stack(d + 2, stop)]
    )
    shape = (head.rows, head.cols)
    if head_f is None:
        before = np.zeros((c - start,) + shape)
    else:
        before = head_f.stack(start, c - 1)
    if tail_f is None:
        after = np.zeros((stop - 1 - d,) + shape)
    else:
        after = tail_f.stack(d + 1, stop - 1)
    forcing = np.concatenate([before, patch_f.values, after])
    return Trajectory(values, start), Trajectory(forcing, start)
