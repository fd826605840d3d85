"""
Unit tests for boundary pairs, their parametrizations and the Krein-von Neumann
extension.
"""

import pytest
from pathlib import Path

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from src.base import PreconditionError, ShapeMismatchError
from src.symplectic.core import Trajectory
from src.symplectic.extensions import (
    FINITE_CASE,
    GENERAL_CASE,
    LIMIT_POINT_CASE,
    BoundaryPair,
    Coupled,
    Separated,
    build_omega,
    build_upsilon,
    canonicalize_scalar,
    equivalent,
    fg_residual,
    from_fg,
    from_unitary,
    gkn_set_from_pair,
    krein_von_neumann,
    membership,
    named_pair,
    sample_minimal_pairs,
    to_general_pair,
    to_unitary,
    validate_extension,
    verify_gkn_set,
)
from src.symplectic.samples import random_system, random_unitary, shear, sl_unit
from src.symplectic.solver import fundamental, solve_ivp


class TestValidateExtension:
    """Test cases for validate_extension."""

    def test_periodic_is_self_adjoint(self, unit_sl):
        """M = L = I is valid on a finite interval."""
        report = validate_extension(unit_sl, named_pair("periodic"))
        assert report.self_adjoint
        assert report.case == FINITE_CASE
        assert report.rank == 2

    def test_scaled_right_end_fails(self, unit_sl):
        """M = I, L = 2I leaves M J M* - L J L* = -3J."""
        report = validate_extension(unit_sl, BoundaryPair(np.eye(2), 2.0 * np.eye(2)))
        assert not report.self_adjoint
        assert report.residual == pytest.approx(3.0)
        assert report.verdict == "not self-adjoint"

    def test_rank_deficient(self, unit_sl):
        """A pair of rank one cannot describe an extension on a finite interval."""
        pair = BoundaryPair(np.diag([1.0, 0.0]), np.zeros((2, 2)))
        report = validate_extension(unit_sl, pair)
        assert report.rank == 1
        assert not report.self_adjoint

    @pytest.mark.parametrize(
        "name", ["dirichlet", "neumann", "periodic", "antiperiodic"]
    )
    def test_named_block_forms(self, rng, name):
        """The classical conditions are valid for every n."""
        system = random_system(2, 3, rng)
        assert validate_extension(system, named_pair(name, 2)).self_adjoint

    def test_limit_point_case(self, inverse_square_sl):
        """An isotropic 1x2 row with empty L is inferred as the limit point case."""
        pair = BoundaryPair(np.array([[1.0, 0.0]]), np.zeros((1, 0)))
        report = validate_extension(inverse_square_sl, pair)
        assert report.case == LIMIT_POINT_CASE
        assert report.self_adjoint

    def test_limit_point_non_isotropic(self, inverse_square_sl):
        """M = (1, i) gives M J M* = -2i."""
        pair = BoundaryPair(np.array([[1.0, 1.0j]]), np.zeros((1, 0)))
        report = validate_extension(inverse_square_sl, pair)
        assert not report.self_adjoint
        assert report.residual == pytest.approx(2.0)

    def test_unbounded_needs_case(self, inverse_square_sl):
        """A nonempty L on an unbounded interval needs Omega or an explicit case."""
        with pytest.raises(PreconditionError):
            validate_extension(inverse_square_sl, named_pair("periodic"))

    def test_wrong_size(self, unit_sl):
        """Pairs for another n are rejected."""
        with pytest.raises(ShapeMismatchError):
            validate_extension(unit_sl, named_pair("periodic", 2))


class TestCanonicalForms:
    """Test cases for canonicalize_scalar and the named pairs."""

    def test_dirichlet(self):
        """Dirichlet is separated with angles (0, pi/2)."""
        form = canonicalize_scalar(named_pair("dirichlet"))
        assert isinstance(form, Separated)
        assert form.alpha0 == pytest.approx(0.0)
        assert form.alpha_end == pytest.approx(np.pi / 2)

    def test_neumann(self):
        """Neumann is separated with angles (pi/2, 0)."""
        form = canonicalize_scalar(named_pair("neumann"))
        assert form.alpha0 == pytest.approx(np.pi / 2)
        assert form.alpha_end == pytest.approx(0.0)

    def test_periodic(self):
        """Periodic is coupled with R = I, beta = 0."""
        form = canonicalize_scalar(named_pair("periodic"))
        assert isinstance(form, Coupled)
        assert np.allclose(form.r_mat, np.eye(2))
        assert form.beta == pytest.approx(0.0)

    def test_antiperiodic(self):
        """Antiperiodic is coupled with R = -I, beta = 0."""
        form = canonicalize_scalar(named_pair("antiperiodic"))
        assert np.allclose(form.r_mat, -np.eye(2))
        assert form.beta == pytest.approx(0.0)

    def test_coupled_round_trip(self):
        """A coupled form survives conversion to a pair and back."""
        r_mat = np.array([[2.0, 1.0], [1.0, 1.0]])
        form = canonicalize_scalar(Coupled(r_mat, np.pi / 3).to_pair())
        assert np.allclose(form.r_mat, r_mat)
        assert form.beta == pytest.approx(np.pi / 3)

    def test_separated_round_trip(self, unit_sl):
        """A separated form gives a valid pair that canonicalizes back."""
        pair = Separated(0.4, 1.1).to_pair()
        assert validate_extension(unit_sl, pair).self_adjoint
        form = canonicalize_scalar(pair)
        assert (form.alpha0, form.alpha_end) == pytest.approx((0.4, 1.1))

    def test_random_coupled_round_trips(self, rng):
        """Canonical forms of random valid pairs define the same relation."""
        for _ in range(200):
            _, pair = from_unitary(random_unitary(2, rng))
            form = canonicalize_scalar(pair)
            back = form.to_pair()
            assert equivalent(pair, back)
            again = canonicalize_scalar(back)
            assert type(again) is type(form)
            if isinstance(form, Coupled):
                assert np.allclose(again.r_mat, form.r_mat, atol=1e-8)
                assert again.beta == pytest.approx(form.beta, abs=1e-9)

    def test_random_separated_round_trips(self, rng):
        """Random angles in [0, pi) survive conversion to a pair and back."""
        for alpha0, alpha_end in rng.uniform(0.0, np.pi, (100, 2)):
            form = canonicalize_scalar(Separated(alpha0, alpha_end).to_pair())
            assert isinstance(form, Separated)
            assert form.alpha0 == pytest.approx(alpha0, abs=1e-10)
            assert form.alpha_end == pytest.approx(alpha_end, abs=1e-10)

    def test_coupled_requires_unit_determinant(self):
        """R must have determinant one."""
        with pytest.raises(PreconditionError):
            Coupled(2.0 * np.eye(2), 0.0)

    def test_invalid_pair_rejected(self):
        """Only self-adjoint pairs have canonical forms."""
        with pytest.raises(PreconditionError):
            canonicalize_scalar(BoundaryPair(np.eye(2), 2.0 * np.eye(2)))

    def test_unknown_name(self):
        """Unknown names are rejected."""
        with pytest.raises(ValueError):
            named_pair("robin")


class TestParametrizations:
    """Test cases for the (F, G) and unitary forms and equivalence."""

    def test_fg_dirichlet(self):
        """F = I, G = 0 is the Dirichlet condition."""
        pair = from_fg(np.eye(2), np.zeros((2, 2)))
        assert equivalent(pair, named_pair("dirichlet"))

    def test_fg_residual(self):
        """F G* - G F* vanishes for a self-adjoint (F, G)."""
        assert fg_residual(np.eye(2), np.zeros((2, 2))) == 0.0
        assert fg_residual(np.eye(2), 1j * np.eye(2)) == pytest.approx(2.0)

    def test_unitary_round_trip(self, rng):
        """V -> (F, G) -> pair -> V recovers V."""
        v_mat = random_unitary(2, rng)
        fg, pair = from_unitary(v_mat)
        assert fg_residual(fg.f_mat, fg.g_mat) <= 1e-12
        assert np.allclose(to_unitary(pair).v_mat, v_mat, atol=1e-10)

    def test_unitary_pairs_are_self_adjoint(self, rng, unit_sl):
        """Every unitary V gives a self-adjoint extension."""
        _, pair = from_unitary(random_unitary(2, rng))
        assert validate_extension(unit_sl, pair).self_adjoint

    @pytest.mark.parametrize("n", [1, 2])
    def test_random_unitaries(self, rng, n):
        """Random V give valid pairs, recover V, and distinct V differ."""
        system = random_system(n, 3, rng)
        previous = None
        for _ in range(200):
            v_mat = random_unitary(2 * n, rng)
            fg, pair = from_unitary(v_mat)
            assert fg_residual(fg.f_mat, fg.g_mat) <= 1e-12
            assert validate_extension(system, pair).self_adjoint
            assert np.allclose(to_unitary(pair).v_mat, v_mat, atol=1e-10)
            if previous is not None:
                assert not equivalent(pair, previous)
            previous = pair

    def test_dirichlet_unitary(self):
        """Dirichlet corresponds to V = -I."""
        assert np.allclose(to_unitary(named_pair("dirichlet")).v_mat, -np.eye(2))

    def test_non_unitary_rejected(self):
        """V must be unitary."""
        with pytest.raises(PreconditionError):
            from_unitary(2.0 * np.eye(2))

    def test_equivalent_to_self(self):
        """A pair is equivalent to itself with witness I."""
        result = equivalent(named_pair("periodic"), named_pair("periodic"))
        assert result.equivalent
        assert np.allclose(result.witness, np.eye(2))

    def test_scaled_pair(self):
        """(3i M, 3i L) is equivalent to (M, L)."""
        pair = named_pair("dirichlet")
        result = equivalent(pair, pair.scaled(3j * np.eye(2)))
        assert result
        assert np.allclose(result.witness, 3j * np.eye(2))
        assert result.residual <= 1e-12

    def test_dirichlet_neumann_differ(self):
        """Different conditions are not equivalent."""
        assert not equivalent(named_pair("dirichlet"), named_pair("neumann"))

    def test_rank_deficient_rejected(self):
        """Equivalence needs full row rank."""
        zero = BoundaryPair(np.zeros((2, 2)), np.zeros((2, 2)))
        with pytest.raises(PreconditionError):
            equivalent(zero, named_pair("periodic"))


class TestGknAndMembership:
    """Test cases for GKN sets, membership and minimal-relation samples."""

    def test_gkn_from_pair(self, unit_sl):
        """The patched elements of a self-adjoint pair form a GKN set."""
        z, f = gkn_set_from_pair(unit_sl, named_pair("dirichlet"))
        report = verify_gkn_set(unit_sl, [(z, f)])
        assert report.passed
        assert report.count == 2
        assert report.to_dict()["brackets_vanish"]

    def test_duplicate_is_dependent(self, unit_sl):
        """Repeating a candidate breaks endpoint independence."""
        z, f = gkn_set_from_pair(unit_sl, named_pair("periodic"))
        report = verify_gkn_set(unit_sl, [(z, f), (z, f)])
        assert report.brackets_vanish
        assert not report.independent

    def test_non_solution_rejected(self, rng, unit_sl):
        """Candidates must satisfy their recursion."""
        noise = Trajectory(rng.standard_normal((6, 2)))
        with pytest.raises(PreconditionError):
            verify_gkn_set(unit_sl, [noise])

    def test_zero_is_member(self, unit_sl):
        """The zero sequence satisfies every boundary condition."""
        zero = Trajectory(np.zeros((6, 2)))
        member, residual = membership(unit_sl, named_pair("periodic"), zero)
        assert member
        assert residual == 0.0

    def test_minimal_samples_are_members(self, rng, unit_sl):
        """Minimal-relation samples vanish at both ends and satisfy every pair."""
        z, f = sample_minimal_pairs(unit_sl, 2, rng)
        assert np.allclose(z[0], 0.0, atol=1e-10)
        assert np.allclose(z[5], 0.0, atol=1e-10)
        for name in ("dirichlet", "neumann", "periodic"):
            assert membership(unit_sl, named_pair(name), z.column(0)).member

    def test_non_member(self, unit_sl):
        """A solution with z_0 != z_{N+1} is not periodic."""
        z = solve_ivp(unit_sl, 0.0, 0, np.array([0.0, 1.0]))
        result = membership(unit_sl, named_pair("periodic"), z)
        assert not result.member
        assert result.residual > 1.0


class TestOmegaAndUpsilon:
    """Test cases for build_omega, to_general_pair and build_upsilon."""

    def test_finite_omega(self, unit_sl):
        """Finite-interval Omega is exact and skew-Hermitian."""
        omega = build_omega(unit_sl, 1j)
        assert omega.exact
        assert omega.p == 4
        assert omega.endpoint == 5
        assert np.allclose(omega.entries, -omega.entries.conj().T)
        assert omega.rank == 2

    def test_general_pair_is_self_adjoint(self, unit_sl):
        """A finite pair rewritten over Omega is valid in the general form."""
        omega = build_omega(unit_sl, 1j)
        general = to_general_pair(named_pair("dirichlet"), omega)
        report = validate_extension(unit_sl, general, omega)
        assert report.case == GENERAL_CASE
        assert report.self_adjoint

    def test_general_membership(self, unit_sl):
        """Membership over Omega agrees with membership at N+1."""
        omega = build_omega(unit_sl, 1j)
        pair = named_pair("dirichlet")
        z = solve_ivp(unit_sl, 0.0, 0, np.array([0.0, 1.0]))
        direct = membership(unit_sl, pair, z)
        general = membership(unit_sl, to_general_pair(pair, omega), z, omega)
        assert direct.member == general.member

    def test_upsilon_of_identity_start(self, unit_sl):
        """Theta_0 = I gives Upsilon = J."""
        theta = fundamental(unit_sl, 0.0)
        expected = np.array([[0.0, 1.0], [-1.0, 0.0]])
        assert np.allclose(build_upsilon(unit_sl, 0.0, theta), expected)

    def test_upsilon_needs_real_nu(self, unit_sl):
        """nu must be real."""
        with pytest.raises(PreconditionError):
            build_upsilon(unit_sl, 1j, fundamental(unit_sl, 1j))


class TestKrein:
    """Test cases for the Krein-von Neumann extension."""

    def test_shear(self, rng):
        """b = 1 on N = 3 gives G = [[1, 4], [0, 1]] and beta = 0."""
        result = krein_von_neumann(shear(3), rng=rng)
        assert np.allclose(result.g_matrix, np.array([[1.0, 4.0], [0.0, 1.0]]))
        assert result.form.beta == pytest.approx(0.0)
        assert np.allclose(result.form.r_mat, result.g_matrix.real)
        assert result.branch == "b_nonzero"
        assert max(result.kernel_residuals) <= 1e-10
        assert result.real_shortcut is not None
        assert result.positivity["samples"] == 8

    def test_kernel_satisfies_condition(self):
        """Both kernel solutions satisfy z_{N+1} = G z_0."""
        system = sl_unit(4)
        result = krein_von_neumann(system)
        kernel = solve_ivp(system, 0.0, 0, result.kernel_initial)
        assert np.allclose(kernel[5], result.g_matrix @ kernel[0], atol=1e-10)

    def test_requires_scalar_finite(self, inverse_square_sl):
        """Only scalar systems on finite intervals are supported."""
        with pytest.raises(PreconditionError):
            krein_von_neumann(inverse_square_sl)
