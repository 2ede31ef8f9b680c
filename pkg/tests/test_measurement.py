import numpy as np
import pytest

from povmlab.generators import make_rng, random_luders_instrument, random_povm, random_state
from povmlab.linalg import dag, op_norm
from povmlab.measurement import (
    DiscretePOVM,
    KrausInstrument,
    identity_instrument,
    luders_instrument,
    nonselective_post_state,
    polar_kraus,
    selective_post_state,
    sequential_joint_prob,
    validate,
    validate_effect,
    validate_povm,
    validate_state,
)

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = 0.5 * np.ones((2, 2), dtype=complex)
MINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


class TestValidate:
    def test_half_identity_effect_passes(self):
        rep = validate_effect(np.eye(2) / 2)
        assert rep.passed
        assert all(item.residual == 0.0 for item in rep.items)

    def test_effect_above_one_fails(self):
        rep = validate_effect(np.diag([1.2, 0.0]))
        assert not rep.passed
        assert any("max_eigenvalue" in it.name for it in rep.failed_items)

    def test_povm_normalization(self):
        povm = DiscretePOVM([np.diag([0.5, 0.5]), np.diag([0.5, 0.5])])
        assert validate_povm(povm).passed

    def test_povm_normalization_failure(self):
        povm = DiscretePOVM([np.diag([0.5, 0.5]), np.diag([0.4, 0.5])])
        rep = validate_povm(povm)
        assert not rep.passed

    def test_state_validation(self):
        assert validate_state(np.eye(3) / 3).passed
        assert not validate_state(np.eye(3)).passed

    def test_strict_positivity_toggle(self):
        povm = DiscretePOVM([np.eye(2), np.zeros((2, 2))])
        assert validate_povm(povm).passed
        assert not validate_povm(povm, require_strict_positive=True).passed

    def test_dispatch(self):
        assert validate(np.eye(2) / 2).passed
        assert validate(DiscretePOVM([np.eye(2)])).passed
        assert validate(identity_instrument(2)).passed


class TestLuders:
    def test_projective_roots_are_projectors(self):
        instr = luders_instrument(DiscretePOVM([P0, P1]))
        assert instr.efficient
        assert op_norm(instr.families[0][0] - P0) < 1e-12
        assert op_norm(instr.families[1][0] - P1) < 1e-12

    def test_single_outcome_identity(self):
        instr = luders_instrument(DiscretePOVM([np.eye(3)]))
        assert op_norm(instr.families[0][0] - np.eye(3)) < 1e-12

    def test_qubit_scalar_roots(self):
        povm = DiscretePOVM([np.diag([0.36, 0.64]), np.diag([0.64, 0.36])])
        instr = luders_instrument(povm)
        assert np.allclose(instr.families[0][0], np.diag([0.6, 0.8]), atol=1e-12)
        assert np.allclose(instr.families[1][0], np.diag([0.8, 0.6]), atol=1e-12)

    def test_induced_povm_matches(self):
        rng = make_rng(21)
        povm = random_povm(4, 3, rng)
        instr = luders_instrument(povm)
        for j in range(3):
            assert op_norm(instr.effect(j) - povm[j]) < 1e-10

    def test_invalid_povm_rejected(self):
        with pytest.raises(ValueError, match="invalid POVM"):
            luders_instrument(DiscretePOVM([np.diag([0.5, 0.5])]))


class TestPolarKraus:
    def test_identity_isometry(self):
        T = np.diag([0.5, 0.25]).astype(complex)
        K = polar_kraus(T, np.eye(2))
        assert np.allclose(K, np.diag(np.sqrt([0.5, 0.25])), atol=1e-12)

    def test_pauli_x_on_rank_deficient(self):
        T = np.diag([1.0, 0.0]).astype(complex)
        K = polar_kraus(T, X)
        assert op_norm(dag(K) @ K - T) < 1e-12

    def test_random_unitary_preserves_effect(self):
        rng = make_rng(22)
        from povmlab.generators import haar_unitary, random_effect

        for dim in (2, 4):
            T = random_effect(dim, rng)
            V = haar_unitary(dim, rng)
            K = polar_kraus(T, V)
            assert op_norm(dag(K) @ K - T) <= 1e-10

    def test_non_isometric_rejected(self):
        with pytest.raises(ValueError, match="isometric"):
            polar_kraus(np.eye(2), 0.5 * np.eye(2))


class TestPostStates:
    def test_projective_idempotence(self):
        instr = luders_instrument(DiscretePOVM([P0, P1]))
        prob, out = selective_post_state(P0, instr, 0)
        assert prob == pytest.approx(1.0, abs=1e-12)
        assert op_norm(out - P0) < 1e-12

    def test_trivial_instrument(self):
        rho = random_state(3, make_rng(23))
        prob, out = selective_post_state(rho, identity_instrument(3), 0)
        assert prob == pytest.approx(1.0, abs=1e-12)
        assert op_norm(out - rho) < 1e-12

    def test_qubit_luders_arithmetic(self):
        povm = DiscretePOVM([np.diag([0.36, 0.64]), np.diag([0.64, 0.36])])
        instr = luders_instrument(povm)
        prob, out = selective_post_state(np.eye(2) / 2, instr, 0)
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(out, np.diag([0.36, 0.64]), atol=1e-12)

    def test_zero_probability_outcome_raises(self):
        instr = luders_instrument(DiscretePOVM([P0, P1]))
        with pytest.raises(ValueError, match="probability"):
            selective_post_state(P1, instr, 0)

    def test_nonselective_identity(self):
        rho = random_state(3, make_rng(24))
        assert op_norm(nonselective_post_state(rho, identity_instrument(3)) - rho) < 1e-12

    def test_nonselective_commuting_unchanged(self):
        instr = luders_instrument(DiscretePOVM([P0, P1]))
        rho = np.diag([0.3, 0.7]).astype(complex)
        assert op_norm(nonselective_post_state(rho, instr) - rho) < 1e-12

    def test_nonselective_dephasing(self):
        instr = luders_instrument(DiscretePOVM([P0, P1]))
        assert op_norm(nonselective_post_state(PLUS, instr) - np.eye(2) / 2) < 1e-12

    def test_luders_idempotent_on_commuting_state(self):
        # [rho, T_j] = 0 for all j leaves the non-selective post-state fixed
        from povmlab.generators import haar_unitary

        rng = make_rng(30)
        U = haar_unitary(4, rng)
        profiles = rng.uniform(0.05, 1.0, size=(3, 4))
        profiles /= profiles.sum(axis=0, keepdims=True)
        povm = DiscretePOVM([U @ np.diag(w).astype(complex) @ dag(U) for w in profiles])
        p = rng.uniform(0.1, 1.0, 4)
        rho = U @ np.diag(p / p.sum()).astype(complex) @ dag(U)
        out = nonselective_post_state(rho, luders_instrument(povm))
        assert op_norm(out - rho) <= 1e-10

    def test_nonselective_is_probability_mixture_of_selective(self):
        rng = make_rng(25)
        for _ in range(10):
            instr = random_luders_instrument(3, 3, rng)
            rho = random_state(3, rng)
            mix = np.zeros((3, 3), dtype=complex)
            for j in range(len(instr)):
                prob, out = selective_post_state(rho, instr, j)
                mix += prob * out
            assert op_norm(nonselective_post_state(rho, instr) - mix) <= 1e-10

    def test_trace_preserved(self):
        rng = make_rng(26)
        instr = random_luders_instrument(4, 2, rng)
        rho = random_state(4, rng)
        out = nonselective_post_state(rho, instr)
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-10)


class TestSequentialJointProb:
    def test_marginalization(self):
        rng = make_rng(27)
        instr = random_luders_instrument(3, 2, rng)
        rho = random_state(3, rng)
        for j in range(2):
            joint = sequential_joint_prob(rho, instr, j, np.eye(3))
            assert joint == pytest.approx(np.trace(rho @ instr.effect(j)).real, abs=1e-12)

    def test_commuting_diagonal_is_classical_product(self):
        povm = DiscretePOVM([np.diag([0.2, 0.6]), np.diag([0.8, 0.4])])
        instr = luders_instrument(povm)
        rho = np.diag([1.0, 0.0]).astype(complex)
        S = np.diag([0.5, 0.9]).astype(complex)
        joint = sequential_joint_prob(rho, instr, 0, S)
        assert joint == pytest.approx(0.2 * 0.5, abs=1e-12)

    def test_qubit_plus_basis_witness(self):
        instr = luders_instrument(DiscretePOVM([PLUS, MINUS]))
        joint = sequential_joint_prob(P0, instr, 0, P0)
        assert joint == pytest.approx(0.25, abs=1e-12)

    def test_total_probability_one(self):
        rng = make_rng(28)
        for _ in range(10):
            instr = random_luders_instrument(4, 3, rng)
            rho = random_state(4, rng)
            total = sum(
                sequential_joint_prob(rho, instr, j, np.eye(4)) for j in range(len(instr))
            )
            assert abs(total - 1.0) <= 1e-10

    def test_annihilated_outcome_gives_zero(self):
        instr = luders_instrument(DiscretePOVM([P0, P1]))
        assert sequential_joint_prob(P1, instr, 0, np.eye(2)) == pytest.approx(0.0, abs=1e-14)


class TestKrausInstrument:
    def test_non_efficient_family(self):
        K1 = np.sqrt(0.5) * P0
        K2 = np.sqrt(0.5) * P0
        instr = KrausInstrument([[K1, K2], [P1]])
        assert not instr.efficient
        assert op_norm(instr.effect(0) - P0) < 1e-12

    def test_instrument_validation(self):
        rng = make_rng(29)
        instr = random_luders_instrument(3, 2, rng)
        assert validate(instr).passed
