"""
Named systems and random generators.

The catalog maps generator names (as used in spec files) to functions
returning a :class:`SymplecticSystem`.
"""

from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import scipy.stats

from .core import DiscreteInterval, MatrixSeq, canonical_skew
from .system import (
    BlockSpecialData,
    SturmLiouvilleData,
    SymplecticSystem,
    from_sturm_liouville,
)

Scalar = Union[float, Sequence[float]]


def _per_index(value: Scalar, count: int) -> np.ndarray:
    arr = np.asarray(value, dtype=float).ravel()
    if arr.size == 1:
        return np.full(count, float(arr[0]))
    if arr.size != count:
        raise ValueError(f"expected {count} values, got {arr.size}")
    return arr


def sl_inverse_square_weight(N: Optional[int] = None) -> SymplecticSystem:
    """p = -1, q = 0, w_k = 1/(k+1)^2; unbounded unless N is given."""
    data = SturmLiouvilleData.from_functions(
        lambda k: -1.0, lambda k: 0.0, lambda k: 1.0 / (k + 1) ** 2, n_upper=N
    )
    return from_sturm_liouville(data)


def sl_unit(N: Optional[int] = None) -> SymplecticSystem:
    """p = -1, q = 0, w = 1."""
    data = SturmLiouvilleData.from_functions(
        lambda k: -1.0, lambda k: 0.0, lambda k: 1.0, n_upper=N
    )
    return from_sturm_liouville(data)


def sturm_liouville(
    p: Sequence[float], q: Sequence[float], w: Sequence[float]
) -> SymplecticSystem:
    return from_sturm_liouville(SturmLiouvilleData.from_arrays(p, q, w))


def shear(N: int, b: Scalar = 1.0, w: Scalar = 1.0) -> SymplecticSystem:
    """
    S_k = [[1, -b_k], [0, 1]], Psi_k = diag(w_k, 0): the scalar system with
    p_{k+1} = 1/b_k and q = 0.
    """
    b_arr = _per_index(b, N + 1)
    if np.any(b_arr == 0.0):
        raise ValueError("shear coefficients must be nonzero")
    p = np.concatenate([[1.0 / b_arr[0]], 1.0 / b_arr])
    return sturm_liouville(p, np.zeros(N + 1), _per_index(w, N + 1))


def diagonal_coupling(
    N: int, a: float = 2.0, c: float = 0.5, w: Scalar = 1.0
) -> SymplecticSystem:
    """S_k = [[a, 0], [c, 1/a]], Psi_k = diag(w_k, 0)."""
    if a == 0.0:
        raise ValueError("a must be nonzero")
    s = np.array([[a, 0.0], [c, 1.0 / a]])
    weights = _per_index(w, N + 1)
    s_values = np.repeat(s[None], N + 1, axis=0)
    psi_values = np.zeros((N + 1, 2, 2))
    psi_values[:, 0, 0] = weights
    return SymplecticSystem.from_arrays(s_values, psi_values)


def random_symplectic(
    n: int, rng: np.random.Generator, scale: float = 0.5, real: bool = True
) -> np.ndarray:
    """exp(J H) for a random symmetric (or Hermitian) H of size 2n."""
    size = 2 * n
    h = rng.standard_normal((size, size))
    if not real:
        h = h + 1j * rng.standard_normal((size, size))
    h = scale * 0.5 * (h + h.conj().T)
    s = scipy.linalg.expm(canonical_skew(n) @ h)
    return s.real if real else s


def random_weight(n: int, rng: np.random.Generator, real: bool = True) -> np.ndarray:
    """Hermitian positive definite n x n matrix."""
    a = rng.standard_normal((n, n))
    if not real:
        a = a + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T + 0.5 * np.eye(n)


def random_unitary(size: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed size x size unitary."""
    return scipy.stats.unitary_group.rvs(size, random_state=rng)


def random_system(
    n: int, N: int, rng: np.random.Generator, real: bool = True, scale: float = 0.5
) -> SymplecticSystem:
    """
    Random finite system: S_k symplectic and Psi_k = T_k* diag(W_k, 0) T_k with
    T_k symplectic and W_k positive definite, so Psi_k is isotropic.
    """
    s_values = np.stack([random_symplectic(n, rng, scale, real) for _ in range(N + 1)])
    psi_values = []
    for _ in range(N + 1):
        t = random_symplectic(n, rng, 0.3, real)
        base = np.zeros((2 * n, 2 * n), dtype=complex)
        base[:n, :n] = random_weight(n, rng, real)
        psi = t.conj().T @ base @ t
        psi_values.append(0.5 * (psi + psi.conj().T))
    return SymplecticSystem.from_arrays(s_values, np.stack(psi_values))


def random_block_data(n: int, N: int, rng: np.random.Generator) -> BlockSpecialData:
    """Blocks of random real symplectic matrices with positive definite weights."""
    mats = np.stack([random_symplectic(n, rng) for _ in range(N + 1)])
    weights = np.stack([random_weight(n, rng) for _ in range(N + 1)])
    blocks = [mats[:, :n, :n], mats[:, :n, n:], mats[:, n:, :n], mats[:, n:, n:]]
    return BlockSpecialData(
        DiscreteInterval.finite(N),
        *(MatrixSeq.from_array(b) for b in blocks),
        MatrixSeq.from_array(weights),
    )


def random_sturm_liouville(N: int, rng: np.random.Generator) -> SturmLiouvilleData:
    """p in [-2, -0.5], q in [-1, 1], w in [0.5, 2]."""
    return SturmLiouvilleData.from_arrays(
        rng.uniform(-2.0, -0.5, N + 2),
        rng.uniform(-1.0, 1.0, N + 1),
        rng.uniform(0.5, 2.0, N + 1),
    )


CATALOG: Dict[str, Callable[..., SymplecticSystem]] = {
    "sl_inverse_square_weight": sl_inverse_square_weight,
    "sl_unit": sl_unit,
    "shear": shear,
    "diagonal_coupling": diagonal_coupling,
}


def from_catalog(name: str, parameters: Optional[dict] = None) -> SymplecticSystem:
    """
    Build a named system.

    Raises:
        KeyError: If the name is not in the catalog
    """
    if name not in CATALOG:
        known = ", ".join(sorted(CATALOG))
        raise KeyError(f"unknown generator {name!r}; known: {known}")
    return CATALOG[name](**(parameters or {}))
