"""
Dense linear-algebra helpers for small complex matrices.
"""

from typing import Optional

import numpy as np
import scipy.linalg

# Relative singular-value cutoff for rank decisions.
RANK_RATIO = 1e-10


class LinalgUtils:
    """
    Utility class for the small dense matrix operations used throughout.

    Every rank decision goes through :meth:`numerical_rank` so the whole
    library shares one cutoff relative to the largest singular value.
    """

    @staticmethod
    def dagger(matrix: np.ndarray) -> np.ndarray:
        """Conjugate transpose (works on stacks of matrices too)."""
        return np.conj(np.swapaxes(matrix, -1, -2))

    @staticmethod
    def norm2(matrix: np.ndarray) -> float:
        """Spectral norm; 0.0 for empty matrices."""
        matrix = np.atleast_2d(matrix)
        if matrix.size == 0:
            return 0.0
        return float(np.linalg.norm(matrix, 2))

    @staticmethod
    def hermitian_residual(matrix: np.ndarray) -> float:
        """Spectral norm of ``A - A*``."""
        return LinalgUtils.norm2(matrix - LinalgUtils.dagger(matrix))

    @staticmethod
    def hermitian_part(matrix: np.ndarray) -> np.ndarray:
        return 0.5 * (matrix + LinalgUtils.dagger(matrix))

    @staticmethod
    def min_eigenvalue(matrix: np.ndarray) -> float:
        """Smallest eigenvalue of the Hermitian part of ``matrix``."""
        if matrix.size == 0:
            return 0.0
        return float(scipy.linalg.eigvalsh(LinalgUtils.hermitian_part(matrix))[0])

    @staticmethod
    def is_unitary(matrix: np.ndarray, tol: float = 1e-10) -> bool:
        """
        Check unitarity in the spectral norm.

        Args:
            matrix: Square matrix
            tol: Allowed ``||V*V - I||``

        Returns:
            True if the matrix is unitary within ``tol``
        """
        identity = np.eye(matrix.shape[0])
        return LinalgUtils.norm2(LinalgUtils.dagger(matrix) @ matrix - identity) <= tol

    @staticmethod
    def singular_values(matrix: np.ndarray) -> np.ndarray:
        matrix = np.atleast_2d(matrix)
        if matrix.size == 0:
            return np.zeros(0)
        return scipy.linalg.svdvals(matrix)

    @staticmethod
    def numerical_rank(matrix: np.ndarray, ratio: float = RANK_RATIO) -> int:
        """
        Rank with singular values below ``ratio * sigma_max`` treated as zero.

        Args:
            matrix: Any 2-D matrix
            ratio: Relative cutoff

        Returns:
            Numerical rank (0 for the zero matrix)
        """
        sv = LinalgUtils.singular_values(matrix)
        if sv.size == 0 or sv[0] == 0.0:
            return 0
        return int(np.sum(sv > ratio * sv[0]))

    @staticmethod
    def null_space(matrix: np.ndarray, rcond: Optional[float] = None) -> np.ndarray:
        """Orthonormal basis of the kernel as columns."""
        return scipy.linalg.null_space(np.atleast_2d(matrix), rcond=rcond)

    @staticmethod
    def condition_number(matrix: np.ndarray) -> float:
        sv = LinalgUtils.singular_values(matrix)
        if sv.size == 0:
            return 1.0
        if sv[-1] == 0.0:
            return float("inf")
        return float(sv[0] / sv[-1])

    @staticmethod
    def hermitian_power(matrix: np.ndarray, power: float) -> np.ndarray:
        """
        Fractional power of a Hermitian positive definite matrix via ``eigh``.

        Raises:
            ValueError: If an eigenvalue is not positive
        """
        values, vectors = scipy.linalg.eigh(LinalgUtils.hermitian_part(matrix))
        if np.any(values <= 0.0):
            raise ValueError("matrix is not positive definite")
        return (vectors * values**power) @ LinalgUtils.dagger(vectors)

    @staticmethod
    def same_row_space(
        first: np.ndarray, second: np.ndarray, ratio: float = RANK_RATIO
    ) -> bool:
        """True when both matrices span the same row space."""
        r1 = LinalgUtils.numerical_rank(first, ratio)
        r2 = LinalgUtils.numerical_rank(second, ratio)
        if r1 != r2:
            return False
        return LinalgUtils.numerical_rank(np.vstack([first, second]), ratio) == r1
