"""
Unit tests for system construction and structural validation.
"""

import pytest
from pathlib import Path

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from src.base import InvalidSystemError, PreconditionError, ShapeMismatchError
from src.symplectic.classify import check_atkinson
from src.symplectic.core import DiscreteInterval, MatrixSeq, Trajectory
from src.symplectic.samples import (
    random_block_data,
    random_sturm_liouville,
    random_system,
    sl_unit,
)
from src.symplectic.solver import recursion_residual, solve_ivp
from src.symplectic.system import (
    BlockSpecialData,
    SturmLiouvilleData,
    SymplecticSystem,
    block_data_of,
    from_block_special,
    from_sturm_liouville,
    lambda_matrix,
    reconstruct_psi,
    sturm_liouville_blocks,
    sturm_liouville_state,
    to_forward,
    validate_hypothesis,
)


def identity_system(n=1, N=3):
    size = 2 * n
    s = np.repeat(np.eye(size)[None], N + 1, axis=0)
    return SymplecticSystem.from_arrays(s, np.zeros_like(s))


class TestValidateHypothesis:
    """Test cases for validate_hypothesis."""

    def test_identity_system_passes(self):
        """S = I, Psi = 0 passes every check with zero residual."""
        report = validate_hypothesis(identity_system())
        assert report.passed
        assert report.worst_residual == 0.0
        assert [check.name for check in report.checks] == [
            "symplectic",
            "psi_hermitian",
            "psi_isotropic",
            "psi_semidefinite",
            "v_pairing_hermitian",
            "v_isotropic",
            "psi_reconstruction",
        ]

    def test_inverse_square_weight_passes(self, inverse_square_sl):
        """The unbounded scalar example passes on a truncation."""
        report = validate_hypothesis(inverse_square_sl, truncation=200)
        assert report.passed

    def test_unbounded_needs_truncation(self, inverse_square_sl):
        """Unbounded systems are validated on an explicit truncation only."""
        with pytest.raises(PreconditionError):
            validate_hypothesis(inverse_square_sl)

    def test_scaled_identity_fails_symplectic(self):
        """S = diag(2, 2) fails with residual |4J - J| = 3."""
        s = np.repeat(np.diag([2.0, 2.0])[None], 3, axis=0)
        report = validate_hypothesis(SymplecticSystem.from_arrays(s, np.zeros_like(s)))
        assert not report.passed
        assert report["symplectic"].value == pytest.approx(3.0)
        assert report.failed() == ["symplectic"]

    def test_corrupted_entry_named(self, unit_sl):
        """A single corrupted coefficient is reported with its index."""
        s = unit_sl.s_seq.values.copy()
        s[2, 0, 0] += 0.5
        system = SymplecticSystem.from_arrays(s, unit_sl.psi_seq.values)
        report = validate_hypothesis(system)
        assert not report["symplectic"].passed
        assert report["symplectic"].index == 2

    def test_random_system_passes(self, rng):
        """Random generated systems satisfy every identity."""
        report = validate_hypothesis(random_system(2, 5, rng, real=False))
        assert report.passed, report.failed()

    def test_negative_weight_fails(self):
        """An indefinite weight fails the semidefinite check."""
        s = np.repeat(np.eye(2)[None], 2, axis=0)
        psi = np.repeat(np.diag([-1.0, 0.0])[None], 2, axis=0)
        report = validate_hypothesis(SymplecticSystem.from_arrays(s, psi))
        assert not report["psi_semidefinite"].passed
        assert report["psi_semidefinite"].value == pytest.approx(-1.0)


class TestLambdaMatrix:
    """Test cases for lambda_matrix and to_forward."""

    def test_zero_parameter(self, unit_sl):
        """lambda = 0 gives S_k exactly."""
        assert np.array_equal(lambda_matrix(unit_sl, 0.0, 1), unit_sl.s(1))

    def test_scalar_example(self, unit_sl):
        """p = -1, q = 0, w = 1, lambda = 1 gives [[1, 1], [1, 2]]."""
        expected = np.array([[1.0, 1.0], [1.0, 2.0]])
        assert np.allclose(lambda_matrix(unit_sl, 1.0, 0), expected)

    def test_symplectic_type_identity(self, rng):
        """S_k(conj(lambda))* J S_k(lambda) = J."""
        system = random_system(2, 4, rng, real=False)
        lam = 2.0 - 3.0j
        for k in range(5):
            left = lambda_matrix(system, np.conj(lam), k).conj().T
            value = left @ system.skew @ lambda_matrix(system, lam, k)
            assert np.linalg.norm(value - system.skew, 2) <= 1e-10

    def test_index_out_of_range(self, unit_sl):
        """k must lie in [0, N]."""
        from src.base import IndexOutOfRangeError

        with pytest.raises(IndexOutOfRangeError):
            lambda_matrix(unit_sl, 1.0, 5)

    def test_forward_of_identity(self):
        """lambda = 0 with S = I gives I."""
        assert np.allclose(to_forward(identity_system(), 0.0, 0), np.eye(2))

    def test_forward_is_inverse(self, rng):
        """to_forward(lambda) S_k(lambda) = I."""
        system = random_system(1, 3, rng, real=False)
        lam = 1.0 + 1.0j
        for k in range(4):
            product = to_forward(system, lam, k) @ lambda_matrix(system, lam, k)
            assert np.linalg.norm(product - np.eye(2), 2) <= 1e-10

    def test_forward_matches_backward(self, rng):
        """Forward propagation from z_0 reproduces the solution from z_{N+1}."""
        system = random_system(1, 4, rng)
        lam = 0.3 - 0.2j
        backward = solve_ivp(system, lam, 5, np.array([1.0, -2.0]))
        forward = solve_ivp(system, lam, 0, backward[0])
        assert np.allclose(forward.values, backward.values, atol=1e-10)

    def test_random_systems_keep_identities(self, rng):
        """S_k* J S_k = J and Psi_k = J S_k J V_k* J over random systems."""
        for _ in range(200):
            n = int(rng.integers(1, 4))
            N = int(rng.integers(0, 21))
            system = random_system(n, N, rng, real=bool(rng.integers(2)))
            jmat = system.skew
            for k in range(N + 1):
                s_mat = system.s(k)
                assert np.linalg.norm(s_mat.conj().T @ jmat @ s_mat - jmat, 2) <= 1e-10
                psi = system.psi(k)
                scale = np.linalg.norm(s_mat, 2) ** 2 * max(1.0, np.linalg.norm(psi, 2))
                error = np.linalg.norm(reconstruct_psi(system, k) - psi, 2)
                assert error <= 1e-12 * scale

    def test_reconstruct_psi(self, rng):
        """Psi_k = J S_k J V_k* J."""
        system = random_system(2, 2, rng, real=False)
        for k in range(3):
            assert np.allclose(reconstruct_psi(system, k), system.psi(k), atol=1e-10)


class TestSturmLiouville:
    """Test cases for the scalar embedding."""

    def test_coefficients(self, unit_sl):
        """p = -1, q = 0 gives S_k = [[1, 1], [0, 1]] and Psi_k = diag(w_k, 0)."""
        assert np.allclose(unit_sl.s(2), np.array([[1.0, 1.0], [0.0, 1.0]]))
        assert np.allclose(unit_sl.psi(2), np.diag([1.0, 0.0]))
        assert unit_sl.n == 1
        assert unit_sl.interval.n_upper == 4

    def test_general_coefficients(self):
        """S_k = [[1, -1/p_{k+1}], [-q_k, 1 + q_k/p_{k+1}]]."""
        data = SturmLiouvilleData.from_arrays([1.0, 2.0, 4.0], [0.5, -1.0], [1.0, 2.0])
        system = from_sturm_liouville(data)
        assert np.allclose(system.s(0), np.array([[1.0, -0.5], [-0.5, 1.25]]))
        assert np.allclose(system.s(1), np.array([[1.0, -0.25], [1.0, 0.75]]))

    def test_zero_weight_rejected(self):
        """w = 0 everywhere violates two-point positivity."""
        with pytest.raises(InvalidSystemError) as info:
            SturmLiouvilleData.from_arrays([-1.0] * 5, [0.0] * 4, [0.0] * 4)
        assert info.value.identity == "w_consecutive_positive"

    def test_zero_p_rejected(self):
        """p_k = 0 is rejected with its index."""
        with pytest.raises(InvalidSystemError) as info:
            SturmLiouvilleData.from_arrays([-1.0, 0.0, -1.0], [0.0, 0.0], [1.0, 1.0])
        assert info.value.index == 1

    def test_length_mismatch(self):
        """p needs N+2 entries."""
        with pytest.raises(ShapeMismatchError):
            SturmLiouvilleData.from_arrays([-1.0] * 3, [0.0] * 3, [1.0] * 3)

    def test_three_term_round_trip_unit(self, unit_sl):
        """y_{k+1} = 3 y_k - y_{k-1} at lambda = 1 maps to a solution."""
        y = [0.0, 1.0]
        for _ in range(5):
            y.append(3.0 * y[-1] - y[-2])
        states = sturm_liouville_state(unit_sl.origin, np.array(y))
        traj = Trajectory(states)
        assert recursion_residual(unit_sl, 1.0, traj) <= 1e-12

    def test_three_term_round_trip_random(self, rng):
        """The three-term recursion with general coefficients maps to a solution."""
        data = random_sturm_liouville(6, rng)
        lam = 0.7 + 0.4j
        y = [1.0 + 0.0j, 0.5 - 0.5j]
        for k in range(7):
            potential = data.q_at(k) - lam * data.w_at(k)
            step = data.p_at(k) * (y[-1] - y[-2]) + potential * y[-1]
            y.append(y[-1] + step / data.p_at(k + 1))
        traj = Trajectory(sturm_liouville_state(data, np.array(y)))
        assert traj.stop == 7
        assert recursion_residual(from_sturm_liouville(data), lam, traj) <= 1e-10

    def test_unbounded_generator(self, inverse_square_sl):
        """Generator-backed data on an unbounded interval."""
        assert not inverse_square_sl.is_finite
        assert inverse_square_sl.psi(3)[0, 0] == pytest.approx(1.0 / 16.0)
        truncated = inverse_square_sl.truncated(10)
        assert truncated.is_finite
        assert truncated.horizon() == 10


class TestBlockSpecial:
    """Test cases for the block form."""

    def test_identity_blocks(self):
        """A = D = I, B = C = 0, W = I gives S = I, Psi = diag(I, 0)."""
        eye = np.repeat(np.eye(2)[None], 3, axis=0)
        zero = np.zeros_like(eye)
        blocks = (MatrixSeq.from_array(m) for m in (eye, zero, zero, eye, eye))
        data = BlockSpecialData(DiscreteInterval.finite(2), *blocks)
        system = from_block_special(data)
        assert system.n == 2
        assert np.allclose(system.s(1), np.eye(4))
        assert np.allclose(system.psi(1), np.diag([1.0, 1.0, 0.0, 0.0]))

    def test_scalar_blocks_match(self, rng):
        """Scalar data embedded as 1x1 blocks reproduces the scalar constructor."""
        data = random_sturm_liouville(5, rng)
        direct = from_sturm_liouville(data)
        via_blocks = from_block_special(sturm_liouville_blocks(data))
        assert np.allclose(direct.s_seq.values, via_blocks.s_seq.values)
        assert np.allclose(direct.psi_seq.values, via_blocks.psi_seq.values)

    def test_derived_v_block_form(self, rng):
        """V_k = [[0, 0], [W A, W B]]."""
        data = random_block_data(2, 3, rng)
        system = from_block_special(data)
        a, b, _, _ = data.blocks(1)
        w = data.w[1]
        v = system.v(1)
        assert np.allclose(v[:2], 0.0, atol=1e-12)
        assert np.allclose(v[2:, :2], w @ a, atol=1e-12)
        assert np.allclose(v[2:, 2:], w @ b, atol=1e-12)

    def test_violated_identity_named(self):
        """A block identity failure names the identity and the index."""
        ones = np.ones((3, 1, 1))
        a = ones.copy()
        a[1] = 2.0
        data = BlockSpecialData(
            DiscreteInterval.finite(2),
            MatrixSeq.from_array(a),
            MatrixSeq.from_array(0 * ones),
            MatrixSeq.from_array(0 * ones),
            MatrixSeq.from_array(ones),
            MatrixSeq.from_array(ones),
        )
        with pytest.raises(InvalidSystemError) as info:
            from_block_special(data)
        assert info.value.identity == "A*D - C*B = I"
        assert info.value.index == 1

    def test_invertible_blocks_give_atkinson(self, rng):
        """Invertible B and W make the Atkinson test pass on two points."""
        system = from_block_special(random_block_data(2, 4, rng))
        assert check_atkinson(system, 0, 1).passed

    def test_block_data_of(self, rng):
        """Block data is recovered from raw systems of block form only."""
        system = from_block_special(random_block_data(1, 3, rng))
        raw = SymplecticSystem.from_arrays(system.s_seq.values, system.psi_seq.values)
        recovered = block_data_of(raw)
        assert np.allclose(recovered.w.values, system.psi_seq.values[:, :1, :1])
        with pytest.raises(PreconditionError):
            block_data_of(random_system(1, 3, rng))

    def test_block_data_of_scalar_origin(self):
        """A scalar system hands back its block embedding."""
        data = block_data_of(sl_unit(3))
        assert np.allclose(data.b[0], 1.0)
