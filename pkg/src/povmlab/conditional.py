"""Laboratory-restricted conditional localization POVMs.

Given effects A(cells) normalized on a full lattice and a laboratory base
region with A(lab) of trivial kernel, the family

    B(cells) = V A(lab)^{-1/2} A(cells) A(lab)^{-1/2} V†,   cells inside lab,

is a POVM normalized on the laboratory.  tr(rho B(cells)) reads as the
probability of detecting the system in ``cells`` given that it is detected in
the laboratory; the gentle-measurement bound quantifies how well that reading
approximates the plain detection fraction.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .lattice import LatticeLocalizationSystem, as_cells, effect_of
from .linalg import (
    DEFAULT_TOL,
    as_matrix,
    commutator,
    dag,
    eigh_checked,
    hermitize,
    is_unitary,
    op_norm,
    psd_inv_sqrt,
    psd_sqrt,
    trace_norm,
)
from .reporting import CheckReport

KERNEL_FLOOR_FACTOR = 1e-8


def kernel_min_eig(A0, tol: float = DEFAULT_TOL) -> float:
    """Minimum eigenvalue of a Hermitian operator; the construction below
    proceeds only when it clears the kernel floor."""
    w, _ = eigh_checked(A0, tol)
    return float(w[0])


def _kernel_floor(A0: np.ndarray) -> float:
    return KERNEL_FLOOR_FACTOR * max(op_norm(A0), np.finfo(float).tiny)


class ConditionalPOVM:
    """Conditional localization effects on a laboratory cell set.

    Effects are computed on demand and cached; the inverse square root of the
    laboratory effect is fixed at construction, so the cache is immutable
    afterwards and concurrent evaluation is safe.
    """

    def __init__(
        self,
        lab_cells: frozenset[int],
        raw_effect: Callable[[frozenset[int]], np.ndarray],
        inv_sqrt: np.ndarray,
        conjugator: np.ndarray | None = None,
        lab_effect_norm: float = 1.0,
    ):
        self.lab_cells = frozenset(lab_cells)
        self._raw_effect = raw_effect
        self.inv_sqrt = inv_sqrt
        dim = inv_sqrt.shape[0]
        self.conjugator = np.eye(dim, dtype=complex) if conjugator is None else conjugator
        self.lab_effect_norm = float(lab_effect_norm)
        self._cache: dict[frozenset[int], np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.inv_sqrt.shape[0]

    def effect(self, cells: Iterable[int]) -> np.ndarray:
        cells = frozenset(int(k) for k in cells)
        if not cells <= self.lab_cells:
            raise ValueError("cells must lie inside the laboratory region")
        if cells not in self._cache:
            A = self._raw_effect(cells)
            V = self.conjugator
            self._cache[cells] = hermitize(V @ self.inv_sqrt @ A @ self.inv_sqrt @ dag(V))
        return self._cache[cells]

    def complement_in_lab(self, cells: Iterable[int]) -> frozenset[int]:
        return self.lab_cells - frozenset(int(k) for k in cells)

    def validate(self, tol: float = DEFAULT_TOL, max_subsets: int = 256) -> CheckReport:
        """Normalization on the lab, in-lab additivity over 2-partitions, and
        effect bounds.

        All 2-partitions are enumerated when there are at most ``max_subsets``
        of them; larger laboratories fall back to stride-sampled subsets.
        """
        report = CheckReport(name="conditional_povm")
        eye = np.eye(self.dim)
        report.add("lab_normalization", op_norm(self.effect(self.lab_cells) - eye), tol)
        cells = sorted(self.lab_cells)
        if 1 << max(0, len(cells) - 1) <= max_subsets:
            partitions = [
                frozenset(c for i, c in enumerate(cells) if (r >> i) & 1)
                for r in range(1 << max(0, len(cells) - 1))
            ]
        else:
            partitions = _sample_subsets(self.lab_cells)
        additivity = 0.0
        bound = 0.0
        for left in partitions:
            right = self.lab_cells - left
            additivity = max(
                additivity,
                op_norm(self.effect(left) + self.effect(right) - self.effect(self.lab_cells)),
            )
            w = np.linalg.eigvalsh(self.effect(left))
            bound = max(bound, max(0.0, -float(w[0])), max(0.0, float(w[-1]) - 1.0))
        report.add("in_lab_additivity", additivity, tol)
        report.add("effect_bounds", bound, tol)
        return report


def build_conditional(
    sys: LatticeLocalizationSystem,
    lab_cells: Iterable[int],
    conjugator: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
) -> ConditionalPOVM:
    """Conditional POVM of a normalized lattice system on a laboratory.

    Refuses when A(lab) has a (numerical) kernel: the inverse square root is
    then meaningless, which is exactly the obstruction that rules out sharp
    systems with a proper laboratory.
    """
    lab = as_cells(lab_cells, sys.n)
    A0 = effect_of(sys, lab)
    # one eigendecomposition feeds the kernel check, the norm, and the
    # inverse square root
    w, V = eigh_checked(A0, tol)
    kmin, knorm = float(w[0]), float(max(abs(w[0]), abs(w[-1])))
    floor = KERNEL_FLOOR_FACTOR * max(knorm, np.finfo(float).tiny)
    if kmin <= floor:
        raise ValueError(
            f"laboratory effect has kernel within tolerance (min eigenvalue "
            f"{kmin:.3e} <= floor {floor:.3e}); conditional POVM not constructible"
        )
    if conjugator is not None and not is_unitary(conjugator, max(tol, 1e-9)):
        raise ValueError("conjugator must be unitary")
    inv_sqrt = (V * (1.0 / np.sqrt(w))) @ dag(V)
    return ConditionalPOVM(
        lab,
        lambda cells: effect_of(sys, cells),
        inv_sqrt,
        conjugator,
        lab_effect_norm=knorm,
    )


def build_conditional_from_unnormalized(
    family: Mapping[int, np.ndarray] | Callable[[frozenset[int]], np.ndarray],
    lab_cells: Iterable[int],
    n: int,
    tol: float = DEFAULT_TOL,
) -> ConditionalPOVM:
    """Conditional POVM from a merely additive family of positive operators.

    Normalization of the source family is NOT required; the sandwich is
    scale-invariant, and the report-level gentle condition uses the recorded
    ||T(lab)|| for the rescaling A(cells) = T(cells) / ||T(lab)||.

    ``family`` is either a per-cell mapping (additivity automatic) or a
    callable on cell sets, in which case additivity over disjoint splits of
    the laboratory is verified.
    """
    lab = as_cells(lab_cells, n)
    if isinstance(family, Mapping):
        missing = lab - set(int(k) for k in family)
        if missing:
            raise ValueError(f"family does not cover the laboratory cells {sorted(missing)}")
        mats = {int(k): as_matrix(M) for k, M in family.items()}
        dim = next(iter(mats.values())).shape[0]

        def raw(cells: frozenset[int]) -> np.ndarray:
            out = np.zeros((dim, dim), dtype=complex)
            for k in cells:
                out += mats[k]
            return out

    else:
        raw = lambda cells: as_matrix(family(cells))  # noqa: E731
        cells = sorted(lab)
        for split in range(1, max(2, len(cells))):
            left, right = frozenset(cells[:split]), frozenset(cells[split:])
            residual = op_norm(raw(left) + raw(right) - raw(lab))
            if residual > max(1.0, op_norm(raw(lab))) * tol * n:
                raise ValueError(
                    f"family is not additive on disjoint cells (residual {residual:.3e})"
                )

    T0 = raw(lab)
    floor = _kernel_floor(T0)
    kmin = kernel_min_eig(T0, tol)
    if kmin <= floor:
        raise ValueError(
            f"laboratory operator has kernel within tolerance (min eigenvalue "
            f"{kmin:.3e} <= floor {floor:.3e})"
        )
    inv_sqrt = psd_inv_sqrt(T0, floor, tol)
    return ConditionalPOVM(lab, raw, inv_sqrt, None, lab_effect_norm=op_norm(T0))


# ---------------------------------------------------------------------------
# gentle measurement bound
# ---------------------------------------------------------------------------

@dataclass
class GentleBoundReport:
    """State-disturbance bound for a high-probability effect.

    delta = 1 - tr(rho T)/||T||; the trace distance between rho and the
    conditioned state sqrt(T) rho sqrt(T) / tr(T rho) is bounded by
    2 sqrt(delta) + delta.
    """

    delta: float
    lhs_trace_dist: float
    rhs_bound: float

    @property
    def margin(self) -> float:
        return self.rhs_bound - self.lhs_trace_dist

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "lhs_trace_dist": self.lhs_trace_dist,
            "rhs_bound": self.rhs_bound,
            "margin": self.margin,
        }


def gentle_bound(T, rho, tol: float = DEFAULT_TOL) -> GentleBoundReport:
    """Evaluate both sides of the gentle-measurement inequality."""
    T = as_matrix(T)
    rho = as_matrix(rho)
    norm_T = op_norm(T)
    p = float(np.trace(rho @ T).real)
    if p <= tol:
        raise ValueError(f"tr(rho T) = {p:.3e} is not positive; bound undefined")
    delta = max(0.0, 1.0 - p / norm_T)
    root = psd_sqrt(T, tol)
    conditioned = root @ rho @ root / p
    lhs = trace_norm(rho - conditioned)
    rhs = 2.0 * math.sqrt(delta) + delta
    return GentleBoundReport(delta=delta, lhs_trace_dist=lhs, rhs_bound=rhs)


def conditional_prob_bound(
    sys: LatticeLocalizationSystem,
    cells: Iterable[int],
    lab_cells: Iterable[int],
    rho,
    tol: float = DEFAULT_TOL,
) -> CheckReport:
    """Compare tr(rho B(cells)) with the detection fraction
    tr(rho A(cells)) / tr(rho A(lab)) at the gentle bound.

    Also checks the exact identity tr(rho' B) = fraction for the conditioned
    state rho', and the operator-norm form |tr(rho' B) - tr(rho B)| <=
    (2 sqrt(delta) + delta) ||B||.
    """
    lab = as_cells(lab_cells, sys.n)
    cells = as_cells(cells, sys.n)
    if not cells <= lab:
        raise ValueError("cells must lie inside the laboratory")
    rho = as_matrix(rho)
    cond = build_conditional(sys, lab, tol=tol)
    A_lab = effect_of(sys, lab)
    A_cells = effect_of(sys, cells)
    p_lab = float(np.trace(rho @ A_lab).real)
    delta = 1.0 - p_lab
    report = CheckReport(name="conditional_prob_bound")
    report.add("delta", delta, tol=None, note="1 - tr(rho A(lab))")
    if delta >= 1.0 - tol:
        report.notes.append("vacuous: tr(rho A(lab)) ~ 0, bound carries no information")
        report.info_only = True
        return report
    fraction = float(np.trace(rho @ A_cells).real) / p_lab
    B = cond.effect(cells)
    prob_B = float(np.trace(rho @ B).real)
    bound = 2.0 * math.sqrt(max(0.0, delta)) + max(0.0, delta)
    report.add("conditional_fraction", fraction, tol=None)
    report.add("tr_rho_B", prob_B, tol=None)
    report.add("fraction_vs_B_difference", abs(prob_B - fraction), bound + 1e-9,
               note="gentle bound 2*sqrt(delta)+delta")
    if bound >= 1.0:
        report.notes.append(
            f"vacuous bound: 2*sqrt(delta)+delta = {bound:.3f} >= 1 exceeds any "
            "probability difference"
        )
    # conditioned state: sqrt(A_lab) rho sqrt(A_lab) / tr(A_lab rho)
    root = psd_sqrt(A_lab, tol)
    rho_cond = root @ rho @ root / p_lab
    exact = float(np.trace(rho_cond @ B).real)
    report.add("exact_conditional_identity", abs(exact - fraction), 1e-10,
               note="tr(rho' B) equals the fraction exactly, independent of delta")
    report.add(
        "operator_form_bound",
        abs(exact - prob_B),
        bound * max(op_norm(B), 1e-300) + 1e-9,
        note="|tr(rho' B) - tr(rho B)| <= (2*sqrt(delta)+delta) * ||B||",
    )
    return report


# ---------------------------------------------------------------------------
# conjugation reduction, cross-laboratory composition
# ---------------------------------------------------------------------------

def _sample_subsets(lab: frozenset[int], limit: int = 16) -> list[frozenset[int]]:
    cells = sorted(lab)
    out = [frozenset(), frozenset(cells), frozenset(cells[:1]), frozenset(cells[: len(cells) // 2])]
    for step in range(2, min(len(cells), limit)):
        out.append(frozenset(cells[::step]))
    seen: list[frozenset[int]] = []
    for s in out:
        if s not in seen:
            seen.append(s)
    return seen


def v_conjugation_reduction(
    sys: LatticeLocalizationSystem,
    lab_cells: Iterable[int],
    V: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> CheckReport:
    """Conjugating the conditional POVM by a unitary V equals building it
    from the V-transformed system; the energy spectrum is unchanged."""
    lab = as_cells(lab_cells, sys.n)
    V = as_matrix(V)
    if not is_unitary(V, max(tol, 1e-9)):
        raise ValueError("V must be unitary")
    cond_V = build_conditional(sys, lab, conjugator=V, tol=tol)
    transformed = LatticeLocalizationSystem(
        n=sys.n,
        a=sys.a,
        cell_effects=[hermitize(V @ E @ dag(V)) for E in sys.cell_effects],
        shift=V @ sys.shift @ dag(V),
        hamiltonian=hermitize(V @ sys.hamiltonian @ dag(V)),
        kind=sys.kind,
    )
    cond_T = build_conditional(transformed, lab, tol=tol)
    report = CheckReport(name="v_conjugation_reduction")
    worst = max(
        op_norm(cond_V.effect(cells) - cond_T.effect(cells))
        for cells in _sample_subsets(lab)
    )
    report.add("conjugation_vs_transformed_system", worst, 1e-10)
    w_orig = np.linalg.eigvalsh(hermitize(sys.hamiltonian))
    w_tran = np.linalg.eigvalsh(transformed.hamiltonian)
    report.add("energy_spectrum_preserved", float(np.max(np.abs(w_orig - w_tran))),
               tol * max(1.0, float(np.max(np.abs(w_orig)))))
    return report


def composition_identity_check(
    sys: LatticeLocalizationSystem,
    lab1_cells: Iterable[int],
    lab2_cells: Iterable[int],
    tol: float = DEFAULT_TOL,
) -> CheckReport:
    """Cross-laboratory composition of conditional POVMs.

    Verifies the exact relation expressing the union laboratory's conditional
    effects through the per-laboratory ones,

        B_union(D) = A(union)^{-1/2} ( sqrt(A(lab1)) B_lab1(D∩lab1) sqrt(A(lab1))
                     + sqrt(A(lab2)) B_lab2(D∩lab2) sqrt(A(lab2)) ) A(union)^{-1/2},

    and reports two additivity-failure magnitudes:

    * ``plain_additivity_gap``: ||B_union(D) - B_lab1(D∩lab1) - B_lab2(D∩lab2)||,
      the naive unweighted sum.  Positive generically — conditional
      probabilities given different conditioning events do not add, even
      classically.
    * ``weighted_additivity_gap``: the gap after weighting each laboratory
      term by the square root of its conditional weight B_union(lab_i).  This
      is the operator law of total probability; it vanishes identically for
      commuting (diagonal) models, so a nonzero value isolates the genuinely
      noncommutative part of the cross-laboratory obstruction.
    """
    lab1 = as_cells(lab1_cells, sys.n)
    lab2 = as_cells(lab2_cells, sys.n)
    if lab1 & lab2:
        raise ValueError("laboratories must be disjoint")
    union = lab1 | lab2
    cond1 = build_conditional(sys, lab1, tol=tol)
    cond2 = build_conditional(sys, lab2, tol=tol)
    cond_u = build_conditional(sys, union, tol=tol)

    A1 = effect_of(sys, lab1)
    A2 = effect_of(sys, lab2)
    Au = effect_of(sys, union)
    s1, s2 = psd_sqrt(A1, tol), psd_sqrt(A2, tol)
    inv_u = psd_inv_sqrt(Au, _kernel_floor(Au), tol)
    w1 = psd_sqrt(cond_u.effect(lab1), tol)
    w2 = psd_sqrt(cond_u.effect(lab2), tol)

    report = CheckReport(name="composition_identity")
    identity = 0.0
    plain = 0.0
    weighted = 0.0
    for cells in _sample_subsets(union):
        c1, c2 = cells & lab1, cells & lab2
        lhs = cond_u.effect(cells)
        b1, b2 = cond1.effect(c1), cond2.effect(c2)
        rhs = inv_u @ (s1 @ b1 @ s1 + s2 @ b2 @ s2) @ inv_u
        identity = max(identity, op_norm(lhs - rhs))
        if cells:
            plain = max(plain, op_norm(lhs - b1 - b2))
            weighted = max(weighted, op_norm(lhs - w1 @ b1 @ w1 - w2 @ b2 @ w2))
    report.add("identity_residual", identity, 1e-10)
    report.add("plain_additivity_gap", plain, tol=None,
               note="expected > 0: additivity fails across laboratories")
    report.add("weighted_additivity_gap", weighted, tol=None,
               note="0 for commuting models; > 0 flags the noncommutative obstruction")
    return report


def cross_lab_commutator(
    sys_a: LatticeLocalizationSystem,
    lab_a: Iterable[int],
    cells_a: Iterable[int],
    sys_b: LatticeLocalizationSystem,
    lab_b: Iterable[int],
    cells_b: Iterable[int],
    tol: float = DEFAULT_TOL,
) -> float:
    """||[B_labA(cellsA), B_labB(cellsB)]||, measurement only.

    No verdict is attached: whether causally separated laboratories' effects
    commute is left open, so the toolkit reports the magnitude and lets the
    caller correlate it with the laboratories' geometry.
    """
    if sys_a.n != sys_b.n:
        raise ValueError("systems must share one Hilbert space")
    B_a = build_conditional(sys_a, as_cells(lab_a, sys_a.n), tol=tol).effect(cells_a)
    B_b = build_conditional(sys_b, as_cells(lab_b, sys_b.n), tol=tol).effect(cells_b)
    return op_norm(commutator(B_a, B_b))
