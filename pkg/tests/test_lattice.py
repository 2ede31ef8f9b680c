import numpy as np
import pytest

from povmlab.generators import haar_unitary, make_rng
from povmlab.geometry import RegionUnion, causally_separated
from povmlab.lattice import (
    LocalizationClaim,
    build_alternating_system,
    build_diagonal_smeared_system,
    build_frame_smeared_system,
    build_sharp_system,
    causal_shadow,
    cc_residual,
    cells_bounding_box,
    claim_consistent_with_ldp,
    effect_of,
    hc_audit,
    heisenberg_evolve,
    lattice_rest_box,
    ldp_minimal_region,
    microcausality_residual,
    projector_screening_identity,
    validate_system,
)
from povmlab.linalg import commutator, dag, op_norm


@pytest.fixture(scope="module")
def sharp16():
    return build_sharp_system(16, 1.0, 1.0)


@pytest.fixture(scope="module")
def smeared16():
    return build_frame_smeared_system(16, 1.0, 1.0, 1.5)


class TestSharpSystem:
    def test_n2_structure(self):
        sys = build_sharp_system(2, 1.0, 1.0)
        assert np.allclose(sys.cell_effects[0], np.diag([1.0, 0.0]))
        assert np.allclose(sys.cell_effects[1], np.diag([0.0, 1.0]))
        assert np.allclose(sys.shift, np.array([[0, 1], [1, 0]]))

    def test_min_energy_is_mass(self, sharp16):
        w = np.linalg.eigvalsh(sharp16.hamiltonian)
        assert w[0] == pytest.approx(1.0, abs=1e-12)

    def test_invariants(self, sharp16):
        rep = validate_system(sharp16)
        assert rep.passed
        assert rep.residual("translation_covariance") <= 1e-12

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            build_sharp_system(1, 1.0, 1.0)
        with pytest.raises(ValueError):
            build_sharp_system(4, -1.0, 1.0)


class TestFrameSmearedSystem:
    def test_normalization_exact(self, smeared16):
        assert op_norm(sum(smeared16.cell_effects) - np.eye(16)) <= 1e-12

    def test_effects_positive(self, smeared16):
        for E in smeared16.cell_effects:
            assert np.linalg.eigvalsh(E)[0] >= -1e-12

    def test_invariants(self, smeared16):
        assert validate_system(smeared16).passed

    def test_genuinely_noncommuting(self, smeared16):
        A = effect_of(smeared16, {0, 1})
        B = effect_of(smeared16, {2, 3})
        assert op_norm(commutator(A, B)) > 1e-3

    def test_wide_limit_effects_become_proportional(self):
        sys = build_frame_smeared_system(8, 1.0, 1.0, width=40.0)
        E0, E1 = sys.cell_effects[0], sys.cell_effects[1]
        # all effects converge to one another (proportional), still summing to I
        assert op_norm(E0 - E1) < 1e-3
        assert op_norm(sum(sys.cell_effects) - np.eye(8)) < 1e-12

    def test_width_validation(self):
        with pytest.raises(ValueError):
            build_frame_smeared_system(8, 1.0, 1.0, width=0.0)

    def test_nonempty_effect_sums_have_trivial_kernel(self, smeared16):
        A = effect_of(smeared16, {3})
        assert np.linalg.eigvalsh(A)[0] > 1e-4


class TestDiagonalSmearedSystem:
    def test_commuting_and_normalized(self):
        sys = build_diagonal_smeared_system(12, 1.0, 1.0, 1.5)
        assert validate_system(sys).passed
        A = effect_of(sys, {0, 1})
        B = effect_of(sys, {5, 6})
        assert op_norm(commutator(A, B)) < 1e-14
        assert np.linalg.eigvalsh(effect_of(sys, {2}))[0] > 0


class TestEffectOf:
    def test_full_lattice_is_identity(self, smeared16):
        assert op_norm(effect_of(smeared16, range(16)) - np.eye(16)) <= 1e-12

    def test_empty_is_zero(self, smeared16):
        assert op_norm(effect_of(smeared16, ())) == 0.0

    def test_partition(self, smeared16):
        cells = frozenset({1, 4, 9})
        comp = smeared16.complement(cells)
        total = effect_of(smeared16, cells) + effect_of(smeared16, comp)
        assert op_norm(total - np.eye(16)) <= 1e-12

    def test_covariance_on_random_sets(self, smeared16):
        rng = make_rng(51)
        for _ in range(100):
            size = int(rng.integers(1, 16))
            cells = frozenset(int(k) for k in rng.choice(16, size=size, replace=False))
            shifted = frozenset((k + 1) % 16 for k in cells)
            lhs = smeared16.shift @ effect_of(smeared16, cells) @ dag(smeared16.shift)
            assert op_norm(lhs - effect_of(smeared16, shifted)) <= 1e-12

    def test_out_of_range_rejected(self, smeared16):
        with pytest.raises(ValueError):
            effect_of(smeared16, {16})


class TestMicrocausality:
    def test_frozen_dynamics(self, sharp16):
        frozen = build_sharp_system(16, 1.0, 1.0)
        frozen.hamiltonian = np.zeros((16, 16), dtype=complex)
        frozen._eig = None
        assert microcausality_residual(frozen, {0}, {8}, [0.0, 0.7, 2.0]) < 1e-12

    def test_time_zero_sharp_projectors(self, sharp16):
        assert microcausality_residual(sharp16, {0, 1}, {4, 5}, [0.0]) < 1e-14

    def test_positive_energy_evolution_breaks_it(self, sharp16):
        # calibrated on this system: residual ~9.2e-6 at the antipodal pair,
        # ~5e-2 for nearby cells at t = 1
        assert microcausality_residual(sharp16, {0}, {8}, [0.5]) > 4e-6
        assert microcausality_residual(sharp16, {0}, {2}, [1.0]) > 1e-2

    def test_overlap_rejected(self, sharp16):
        with pytest.raises(ValueError, match="disjoint"):
            microcausality_residual(sharp16, {0, 1}, {1, 2}, [0.5])


class TestCausalCondition:
    def test_time_zero_residual_vanishes(self, sharp16):
        assert cc_residual(sharp16, {2, 3}, 0.0) == pytest.approx(0.0, abs=1e-14)

    def test_hegerfeldt_violation_for_sharp(self, sharp16):
        # calibrated witness: single cell, one time step
        assert cc_residual(sharp16, {0}, 1.0) < -0.01

    def test_full_lattice_saturates_exactly(self, sharp16):
        shadow, saturated = causal_shadow(sharp16, range(16), 0.5)
        assert saturated
        r = cc_residual(sharp16, range(16), 0.5)
        assert r == pytest.approx(0.0, abs=1e-12)

    def test_shadow_growth(self, sharp16):
        shadow, saturated = causal_shadow(sharp16, {8}, 2.0)
        assert shadow == frozenset({6, 7, 8, 9, 10})
        assert not saturated

    def test_smeared_system_is_less_violating(self, smeared16, sharp16):
        worst_smeared = min(
            cc_residual(smeared16, {k}, 1.0) for k in range(0, 16, 4)
        )
        worst_sharp = min(cc_residual(sharp16, {k}, 1.0) for k in range(0, 16, 4))
        assert worst_smeared > worst_sharp


class TestAudit:
    T_GRID = [0.5, 1.0, 3.0]
    SAMPLES = [[0, 1, 2, 3], [5, 6, 7, 8], [12, 13]]

    def test_sharp_system_fails_microcausality(self, sharp16):
        audit = hc_audit(sharp16, self.SAMPLES, self.T_GRID, tol=1e-9)
        assert audit.additivity_residual <= 1e-12
        assert audit.covariance_residual <= 1e-12
        assert audit.energy_min_eig >= 1.0 - 1e-9
        assert audit.microcausality_residual > 1e-3
        assert audit.max_effect_norm > 0.9
        assert audit.consistency_verdict.startswith("hypothesis 4")

    def test_alternating_spectrum_fails_energy(self):
        sys = build_alternating_system(16, 1.0, 1.0)
        audit = hc_audit(sys, self.SAMPLES, self.T_GRID, tol=1e-9)
        assert audit.energy_min_eig < -0.5
        assert audit.consistency_verdict.startswith("hypothesis 3")
        # its projector effects commute pairwise regardless of the dynamics
        for j in range(16):
            for k in range(j + 1, 16):
                assert op_norm(commutator(sys.cell_effects[j], sys.cell_effects[k])) <= 1e-12

    def test_degenerate_all_zero_system_rejected_at_validation(self, sharp16):
        broken = build_sharp_system(4, 1.0, 1.0)
        broken.cell_effects = [np.zeros((4, 4), dtype=complex) for _ in range(4)]
        rep = validate_system(broken)
        assert not rep.passed
        audit = hc_audit(broken, [[0], [2]], [0.5], tol=1e-9)
        assert audit.consistency_verdict.startswith("effects trivial")

    def test_frame_smeared_same_verdict(self, smeared16):
        audit = hc_audit(smeared16, self.SAMPLES, self.T_GRID, tol=1e-9)
        assert audit.consistency_verdict.startswith("hypothesis 4")


class TestLdpRegion:
    def test_proper_subset_forces_full_rest_box(self, smeared16):
        sigma = lattice_rest_box(smeared16)
        minimal = ldp_minimal_region(smeared16, {2, 3}, sigma)
        assert minimal.boxes == (sigma,)

    def test_full_lattice_also_full_box(self, smeared16):
        sigma = lattice_rest_box(smeared16)
        minimal = ldp_minimal_region(smeared16, range(16), sigma)
        assert minimal.boxes == (sigma,)

    def test_unnormalized_system_rejected(self, smeared16):
        broken = build_sharp_system(4, 1.0, 1.0)
        broken.cell_effects = broken.cell_effects[:3] + [np.zeros((4, 4), dtype=complex)]
        with pytest.raises(ValueError, match="normalized"):
            ldp_minimal_region(broken, {0}, lattice_rest_box(broken))

    def test_minimal_regions_never_causally_separated(self, smeared16):
        # rest-space boxes of two measurements are never causally separated
        # as long as their time gap stays below the spatial extent
        sigma0 = lattice_rest_box(smeared16, t=0.0)
        sigma1 = lattice_rest_box(smeared16, t=3.0)
        r0 = ldp_minimal_region(smeared16, {1, 2}, sigma0)
        r1 = ldp_minimal_region(smeared16, {9}, sigma1)
        assert not causally_separated(r0, r1)

    def test_claim_consistency(self, smeared16):
        sigma = lattice_rest_box(smeared16)
        minimal = ldp_minimal_region(smeared16, {2, 3}, sigma)
        good = LocalizationClaim(frozenset({2, 3}), RegionUnion([sigma]))
        tight = LocalizationClaim(
            frozenset({2, 3}), RegionUnion([cells_bounding_box(smeared16, {2, 3})])
        )
        assert claim_consistent_with_ldp(good, minimal)
        assert not claim_consistent_with_ldp(tight, minimal)


class TestHeisenbergEvolve:
    def test_unitary_consistency(self, sharp16):
        A = effect_of(sharp16, {0, 1})
        evolved = heisenberg_evolve(sharp16, A, 0.7)
        w_before = np.sort(np.linalg.eigvalsh(A))
        w_after = np.sort(np.linalg.eigvalsh(evolved))
        assert np.max(np.abs(w_before - w_after)) < 1e-12

    def test_zero_time_identity(self, sharp16):
        A = effect_of(sharp16, {3})
        assert op_norm(heisenberg_evolve(sharp16, A, 0.0) - A) < 1e-12


class TestProjectorScreening:
    def make_triple(self, dim, p_rank, q_extra, r_rank, rng):
        U = haar_unitary(dim, rng)
        P = U @ np.diag(np.r_[np.ones(p_rank), np.zeros(dim - p_rank)]) @ dag(U)
        Q = U @ np.diag(np.r_[np.ones(p_rank + q_extra), np.zeros(dim - p_rank - q_extra)]) @ dag(U)
        r_diag = np.zeros(dim)
        r_diag[p_rank + q_extra : p_rank + q_extra + r_rank] = 1.0
        R = U @ np.diag(r_diag) @ dag(U)
        return P, Q, R

    def test_random_construction(self):
        rng = make_rng(52)
        for _ in range(50):
            P, Q, R = self.make_triple(8, 2, 2, 3, rng)
            rep = projector_screening_identity(P, Q, R)
            assert rep.passed
            assert rep.residual("PR_zero") <= 1e-12

    def test_zero_projector_trivial(self):
        Z = np.zeros((3, 3), dtype=complex)
        Q = np.diag([1.0, 1.0, 0.0]).astype(complex)
        R = np.diag([0.0, 0.0, 1.0]).astype(complex)
        rep = projector_screening_identity(Z, Q, R)
        assert rep.passed

    def test_violated_precondition_skips_conclusion(self):
        P = np.diag([1.0, 0.0]).astype(complex)
        Q = np.diag([1.0, 0.0]).astype(complex)
        R = np.diag([1.0, 0.0]).astype(complex)  # QR != 0
        rep = projector_screening_identity(P, Q, R)
        assert not rep.passed
        assert any("skipped" in note for note in rep.notes)
        assert all(it.name != "PR_zero" for it in rep.items)
