"""
Unit tests for intervals, sequences, trajectories and the pairing forms.
"""

import pytest
from pathlib import Path

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from src.base import IndexOutOfRangeError, PreconditionError, ShapeMismatchError
from src.symplectic.core import (
    DiscreteInterval,
    MatrixSeq,
    Trajectory,
    boundary_bracket,
    bracket_matrix,
    canonical_skew,
    gram,
    semi_inner,
    semi_norm,
    skew_pairing,
)
from src.symplectic.samples import random_system
from src.symplectic.solver import solve_ivp, verify_wronskian

WEIGHT = np.diag([1.0, 0.0])


class TestCanonicalSkew:
    """Test cases for canonical_skew."""

    def test_scalar_case(self):
        """n = 1 gives [[0, 1], [-1, 0]]."""
        assert np.array_equal(canonical_skew(1), np.array([[0, 1], [-1, 0]]))

    def test_orthogonal(self):
        """J J* = I."""
        jmat = canonical_skew(2)
        assert np.allclose(jmat @ jmat.conj().T, np.eye(4))

    def test_square_is_minus_identity(self):
        """J^2 = -I and J* = -J."""
        jmat = canonical_skew(3)
        assert np.allclose(jmat @ jmat, -np.eye(6))
        assert np.allclose(jmat.conj().T, -jmat)

    def test_rejects_zero(self):
        """n must be positive."""
        with pytest.raises(ValueError):
            canonical_skew(0)


class TestDiscreteInterval:
    """Test cases for DiscreteInterval."""

    def test_finite_resolve(self):
        """A finite interval resolves to N or a smaller truncation."""
        interval = DiscreteInterval.finite(5)
        assert interval.resolve() == 5
        assert interval.resolve(3) == 3
        with pytest.raises(IndexOutOfRangeError):
            interval.resolve(6)

    def test_unbounded_needs_truncation(self):
        """An unbounded interval has no default horizon."""
        interval = DiscreteInterval.unbounded()
        assert not interval.is_finite
        assert interval.resolve(100) == 100
        with pytest.raises(PreconditionError):
            interval.resolve()

    def test_contains(self):
        """Membership in I_Z and in the extended set."""
        interval = DiscreteInterval.finite(2)
        assert interval.contains(2)
        assert not interval.contains(3)
        assert interval.contains(3, extended=True)
        assert not interval.contains(-1)
        assert interval.to_dict() == {"N": 2}
        assert DiscreteInterval.unbounded().to_dict() == {"N": "infinite"}


class TestMatrixSeq:
    """Test cases for MatrixSeq."""

    def test_materialized_access(self):
        """Values are indexed by global index."""
        seq = MatrixSeq.from_array(np.arange(12.0).reshape(3, 2, 2), offset=2)
        assert seq.start == 2
        assert seq.stop == 4
        assert np.array_equal(seq[3], np.array([[4, 5], [6, 7]]))
        with pytest.raises(IndexOutOfRangeError):
            seq[5]

    def test_values_are_read_only(self):
        """Materialized values cannot be modified in place."""
        seq = MatrixSeq.constant(np.eye(2), length=3)
        with pytest.raises(ValueError):
            seq.values[0, 0, 0] = 5.0

    def test_generator_backed(self):
        """Generator-backed sequences are defined for every index."""
        seq = MatrixSeq.scalars(lambda k: 1.0 / (k + 1))
        assert not seq.is_materialized
        assert seq.stop is None
        assert seq.scalar(9) == pytest.approx(0.1)
        assert seq.stack(0, 2).shape == (3, 1, 1)

    def test_generator_shape_checked(self):
        """A generator returning the wrong shape is rejected."""
        seq = MatrixSeq.from_generator(2, 2, lambda k: np.eye(3))
        with pytest.raises(ShapeMismatchError):
            seq[0]

    def test_exactly_one_source(self):
        """Values and generator are mutually exclusive."""
        with pytest.raises(ValueError):
            MatrixSeq(1, 1)


class TestTrajectory:
    """Test cases for Trajectory."""

    def test_vector_values_get_a_column(self):
        """(K, 2n) input becomes (K, 2n, 1)."""
        traj = Trajectory(np.ones((4, 2)))
        assert traj.values.shape == (4, 2, 1)
        assert traj.n == 1

    def test_odd_size_rejected(self):
        """States must have even size."""
        with pytest.raises(ShapeMismatchError):
            Trajectory(np.ones((4, 3)))

    def test_arithmetic_and_columns(self):
        """Sum, difference, column extraction and restriction keep indices."""
        first = Trajectory(np.arange(16.0).reshape(4, 2, 2), offset=1)
        second = first.scale(2.0)
        assert np.allclose((second - first).values, first.values)
        assert np.allclose((first + first).values, second.values)
        column = first.column(1)
        assert column.cols == 1
        assert np.allclose(column[2], first[2][:, 1:2])
        part = first.restrict(2, 3)
        assert (part.start, part.stop) == (2, 3)

    def test_misaligned_sum_rejected(self):
        """Trajectories on different ranges cannot be added."""
        with pytest.raises(ShapeMismatchError):
            Trajectory(np.ones((3, 2))) + Trajectory(np.ones((4, 2)))


class TestSemiInner:
    """Test cases for the weighted semi-inner product."""

    def test_constant_vector(self):
        """z = u = e1 on [0, 2] with Psi = diag(1, 0) gives 3."""
        z = Trajectory(np.tile([1.0, 0.0], (4, 1)))
        psi = MatrixSeq.constant(WEIGHT, length=3)
        assert semi_inner(z, z, psi, 2) == pytest.approx(3.0)

    def test_zero_weight(self, rng):
        """Psi = 0 gives 0 for any z and u."""
        z = Trajectory(rng.standard_normal((4, 2)))
        u = Trajectory(rng.standard_normal((4, 2)))
        psi = MatrixSeq.zeros(2, 2, 3)
        assert semi_inner(z, u, psi, 2) == 0.0

    def test_partial_sum(self):
        """z_k = (1/(k+1), 0) with k_max = 3 gives 1 + 1/4 + 1/9 + 1/16."""
        values = np.array([[1.0 / (k + 1), 0.0] for k in range(5)])
        z = Trajectory(values)
        psi = MatrixSeq.constant(WEIGHT, length=4)
        assert semi_inner(z, z, psi, 3) == pytest.approx(1.4236111111111112)

    def test_conjugate_symmetry(self, rng):
        """<z, u> is the conjugate of <u, z>."""
        z = Trajectory(rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2)))
        u = Trajectory(rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2)))
        psi = MatrixSeq.constant(WEIGHT, length=5)
        forward = semi_inner(z, u, psi, 4)
        backward = semi_inner(u, z, psi, 4)
        assert abs(forward - np.conj(backward)) <= 1e-13 * max(1.0, abs(forward))

    def test_right_endpoint_ignored(self, rng):
        """Changing z_{N+1} does not change the product up to N."""
        values = rng.standard_normal((4, 2))
        changed = values.copy()
        changed[3] = [100.0, -100.0]
        psi = MatrixSeq.constant(WEIGHT, length=3)
        first = semi_inner(Trajectory(values), Trajectory(values), psi, 2)
        second = semi_inner(Trajectory(changed), Trajectory(changed), psi, 2)
        assert first == second

    def test_semi_norm_nonnegative(self, rng):
        """The semi-norm is real and nonnegative."""
        z = Trajectory(rng.standard_normal((4, 2)))
        psi = MatrixSeq.constant(WEIGHT, length=3)
        assert semi_norm(z, psi, 2) >= 0.0

    def test_multi_column_rejected(self):
        """semi_inner needs single columns; gram handles matrices."""
        z = Trajectory(np.ones((3, 2, 2)))
        psi = MatrixSeq.constant(WEIGHT, length=2)
        with pytest.raises(ShapeMismatchError):
            semi_inner(z, z, psi, 1)
        assert gram(z, z, psi, 1).shape == (2, 2)

    def test_gram_matches_columns(self, rng):
        """Gram entries are the pairwise semi-inner products."""
        z = Trajectory(rng.standard_normal((5, 2, 3)))
        psi = MatrixSeq.constant(WEIGHT, length=4)
        matrix = gram(z, z, psi, 3)
        expected = semi_inner(z.column(0), z.column(2), psi, 3)
        assert matrix[0, 2] == pytest.approx(expected)


class TestBoundaryBracket:
    """Test cases for the endpoint form."""

    def test_equal_endpoints_cancel(self):
        """z = w with z_0 = z_{N+1} gives 0."""
        values = np.array([[1.0, 2.0], [3.0, 4.0], [1.0, 2.0]])
        z = Trajectory(values)
        assert boundary_bracket(z, z) == 0.0

    def test_left_endpoint_only(self):
        """z_0 = e1, w_0 = e2 and vanishing right ends give -1."""
        z = Trajectory(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]))
        w = Trajectory(np.array([[0.0, 1.0], [0.0, 0.0], [0.0, 0.0]]))
        assert boundary_bracket(z, w) == pytest.approx(-1.0)

    def test_solutions_at_conjugate_parameters(self, rng):
        """Solutions at lambda and conj(lambda) have vanishing bracket."""
        system = random_system(1, 6, rng, real=False)
        lam = 1.0 + 1.0j
        z = solve_ivp(system, lam, 0, np.array([1.0, 0.5j]))
        w = solve_ivp(system, np.conj(lam), 0, np.array([-0.3, 2.0]))
        value = boundary_bracket(z, w)
        scale = 1.0 + np.linalg.norm(z.values) * np.linalg.norm(w.values)
        assert abs(value) <= 1e-9 * scale
        assert verify_wronskian(system, lam, z, w) <= 1e-9 * scale

    def test_missing_endpoint(self):
        """An endpoint outside a trajectory is an error."""
        z = Trajectory(np.ones((3, 2)))
        with pytest.raises(IndexOutOfRangeError):
            boundary_bracket(z, z, 0, 5)

    def test_bracket_matrix_is_skew_hermitian(self, rng):
        """(z, z) brackets form a skew-Hermitian matrix."""
        values = rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2))
        z = Trajectory(values)
        matrix = bracket_matrix(z, z)
        assert np.allclose(matrix, -matrix.conj().T)

    def test_skew_pairing_vectors(self):
        """(z, w)_k = z* J w for single vectors."""
        value = skew_pairing(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert value.shape == (1, 1)
        assert value[0, 0] == pytest.approx(1.0)
