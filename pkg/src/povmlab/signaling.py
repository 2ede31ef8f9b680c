"""No-signaling and relativistic-consistency deviation functionals.

The "for every state rho" quantifiers are discharged exactly: a functional
linear in rho attains its extreme over the state body at a spectral projector,
so each deviation reduces to a single matrix residual instead of state
sampling.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    as_matrix,
    commutator,
    dag,
    max_abs,
    op_norm,
)
from .measurement import DiscretePOVM, KrausInstrument, luders_instrument

RCC_CONVENTION_NOTE = (
    "sequential statistics use the unnormalized sub-state convention: the "
    "joint probability of (j then i) is tr(rho K†_j S_i K_j); the literal "
    "product form with a normalized conditional state carries a second "
    "factor equal to 1"
)


@dataclass
class DeviationReport:
    """Quantified deviations from the no-signaling / consistency equalities."""

    nsc_dev: float = 0.0
    rcc_dev: float = 0.0
    commutator_residual: float = 0.0
    kraus_commutator_residual: float = 0.0
    tol: float = DEFAULT_TOL
    scale: float = 1.0
    verdicts: dict[str, bool] = field(default_factory=dict)
    counterexample_candidate: bool = False
    notes: list[str] = field(default_factory=list)
    extras: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "nsc_dev": self.nsc_dev,
            "rcc_dev": self.rcc_dev,
            "commutator_residual": self.commutator_residual,
            "kraus_commutator_residual": self.kraus_commutator_residual,
            "tol": self.tol,
            "scale": self.scale,
            "verdicts": dict(self.verdicts),
            "counterexample_candidate": self.counterexample_candidate,
            "notes": list(self.notes),
            "extras": dict(self.extras),
        }


def nsc_deviation(instr: KrausInstrument, S) -> float:
    """Operator norm of sum_{jk} K†_{jk} S K_{jk} - S.

    This equals sup over states rho of |tr(rho' S) - tr(rho S)| for the
    non-selective post-state rho', because the expression is linear in rho and
    the supremum of |tr(rho X)| over states is the spectral radius of the
    Hermitian X.
    """
    S = as_matrix(S)
    if S.shape[0] != instr.dim:
        raise ValueError(f"dimension mismatch: effect {S.shape[0]}, instrument {instr.dim}")
    return op_norm(instr.dual_apply(S) - S)


def rcc_deviation(first: KrausInstrument, second: KrausInstrument) -> float:
    """Largest entrywise discrepancy between the Heisenberg-picture joint
    operators of the two measurement orders.

    For each outcome pair (j, i) the operator
    D = K†_j S_i K_j - L†_i T_j L_i governs the order dependence of the
    sequential statistics: D = 0 for all pairs iff the joint probabilities
    agree for every state.  Defined for efficient instruments only.
    """
    if not first.efficient or not second.efficient:
        raise ValueError("rcc deviation is defined for efficient instruments only")
    if first.dim != second.dim:
        raise ValueError("dimension mismatch between instruments")
    worst = 0.0
    for j in range(len(first)):
        K = first.families[j][0]
        Tj = first.effect(j)
        for i in range(len(second)):
            L = second.families[i][0]
            Si = second.effect(i)
            D = dag(K) @ Si @ K - dag(L) @ Tj @ L
            worst = max(worst, max_abs(D))
    return worst


def commutator_residual(T: DiscretePOVM, S: DiscretePOVM) -> float:
    """max over (j, i) of the operator norm of [T_j, S_i]."""
    if T.dim != S.dim:
        raise ValueError("dimension mismatch between POVMs")
    return max(op_norm(commutator(Tj, Si)) for Tj in T.effects for Si in S.effects)


def kraus_commutator_residual(instr: KrausInstrument, S) -> float:
    """max over Kraus operators of max(||[K, S]||, ||[K†, S]||)."""
    S = as_matrix(S)
    worst = 0.0
    for K in instr.all_kraus():
        worst = max(worst, op_norm(commutator(K, S)), op_norm(commutator(dag(K), S)))
    return worst


def luders_equivalence_check(
    T: DiscretePOVM, S: DiscretePOVM, tol: float = DEFAULT_TOL
) -> DeviationReport:
    """Test the commutativity <-> no-signaling/consistency equivalence for the
    Lüders measurements of two POVMs.

    In finite dimension every effect has discrete spectrum, so the equivalence
    applies unconditionally; a disagreement between the two sides at tolerance
    is flagged as a counterexample candidate, never silently passed.
    """
    instr_T = luders_instrument(T, tol)
    instr_S = luders_instrument(S, tol)
    nsc = max(nsc_deviation(instr_T, Si) for Si in S.effects)
    rcc = rcc_deviation(instr_T, instr_S)
    comm = commutator_residual(T, S)
    kraus_comm = max(
        kraus_commutator_residual(instr_T, Si) for Si in S.effects
    )
    scale = max(op_norm(Si) for Si in S.effects)
    report = DeviationReport(
        nsc_dev=nsc,
        rcc_dev=rcc,
        commutator_residual=comm,
        kraus_commutator_residual=kraus_comm,
        tol=tol,
        scale=scale,
        notes=[RCC_CONVENTION_NOTE],
    )
    commuting = comm <= tol
    deviations_small = nsc <= tol * scale and rcc <= tol * scale
    report.verdicts["commuting"] = commuting
    report.verdicts["deviations_small"] = deviations_small
    report.verdicts["biconditional"] = commuting == deviations_small
    report.counterexample_candidate = commuting != deviations_small
    return report


def beck_check(instr: KrausInstrument, S, tol: float = DEFAULT_TOL) -> DeviationReport:
    """Kraus-commutation test for general (possibly non-efficient)
    non-selective measurements.

    kappa = max_{jk} max(||[K_{jk}, S]||, ||[K†_{jk}, S]||) vanishing must
    force both d1 = nsc(S) and d2 = nsc(S^2) to vanish; kappa small also
    forces the induced effects to commute with S.
    """
    S = as_matrix(S)
    d1 = nsc_deviation(instr, S)
    d2 = nsc_deviation(instr, S @ S)
    kappa = kraus_commutator_residual(instr, S)
    effect_comm = max(op_norm(commutator(instr.effect(j), S)) for j in range(len(instr)))
    scale = max(op_norm(S), 1e-300)
    report = DeviationReport(
        nsc_dev=d1,
        rcc_dev=0.0,
        commutator_residual=effect_comm,
        kraus_commutator_residual=kappa,
        tol=tol,
        scale=scale,
        extras={"nsc_dev_squared": d2},
    )
    kraus_commuting = kappa <= tol
    deviations_small = d1 <= tol * scale and d2 <= tol * scale
    report.verdicts["kraus_commuting"] = kraus_commuting
    report.verdicts["deviations_small"] = deviations_small
    report.verdicts["biconditional"] = kraus_commuting == deviations_small
    report.verdicts["effects_commute_when_kraus_do"] = (not kraus_commuting) or (
        effect_comm <= tol
    )
    report.counterexample_candidate = not (
        report.verdicts["biconditional"]
        and report.verdicts["effects_commute_when_kraus_do"]
    )
    return report


# ---------------------------------------------------------------------------
# counterexample search: no-signaling for S but not for S^2
# ---------------------------------------------------------------------------

NOT_FOUND = "NOT_FOUND"


@dataclass
class SearchWitness:
    """Instrument/effect pair with nsc(S) ~ 0 but nsc(S^2) large."""

    instrument: KrausInstrument
    effect: np.ndarray
    d1: float
    d2: float
    evaluations: int

    def reverify(self) -> tuple[float, float]:
        return (
            nsc_deviation(self.instrument, self.effect),
            nsc_deviation(self.instrument, self.effect @ self.effect),
        )


def _level_fixing_instance(
    dim: int, rng: np.random.Generator
) -> tuple[list[list[np.ndarray]], np.ndarray]:
    """Random instrument/effect pair whose dual map fixes S exactly but mixes
    the squared levels.

    S is diagonal with levels s_1 > ... in a Haar-random basis.  One middle
    level is split between the extreme levels with the unique weight that
    preserves the S-expectation; strict convexity then shifts the S^2
    expectation.
    """
    levels = np.sort(rng.uniform(0.0, 1.0, size=dim))[::-1]
    levels[0] = max(levels[0], 0.9)
    levels[-1] = min(levels[-1], 0.1)
    hi, lo = 0, dim - 1
    mid = int(rng.integers(1, dim - 1))
    # keep the split well inside (0, 1) so d2 stays macroscopic
    levels[mid] = rng.uniform(0.35, 0.65) * (levels[hi] - levels[lo]) + levels[lo]
    alpha = (levels[mid] - levels[lo]) / (levels[hi] - levels[lo])

    keep = np.eye(dim, dtype=complex)
    keep[mid, mid] = 0.0
    up = np.zeros((dim, dim), dtype=complex)
    up[hi, mid] = np.sqrt(alpha)
    down = np.zeros((dim, dim), dtype=complex)
    down[lo, mid] = np.sqrt(1.0 - alpha)

    # Haar-random basis change (QR with phase fixing)
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, R = np.linalg.qr(G)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    families = [[Q @ K @ dag(Q)] for K in (keep, up, down)]
    S = Q @ np.diag(levels).astype(complex) @ dag(Q)
    return families, S


def heinosaari_wolf_search(
    dim: int,
    seed: int,
    budget: int,
    d1_max: float = 1e-9,
    d2_min: float = 1e-3,
):
    """Seeded search for an instrument and effect with nsc(S) <= d1_max while
    nsc(S^2) >= d2_min.

    Random restarts draw level-fixing instances; local perturbations of the
    level profile are accepted when they keep d1 at the floor and increase d2.
    Returns a :class:`SearchWitness` or the string ``NOT_FOUND`` once
    ``budget`` candidate evaluations are exhausted.  No claim of completeness.
    """
    if budget <= 0:
        return NOT_FOUND
    if dim < 3:
        # the level-splitting construction needs three distinct levels
        return NOT_FOUND
    rng = np.random.default_rng(np.random.SeedSequence([seed, dim]))
    evaluations = 0
    best: SearchWitness | None = None
    while evaluations < budget:
        families, S = _level_fixing_instance(dim, rng)
        instr = KrausInstrument(families)
        d1 = nsc_deviation(instr, S)
        d2 = nsc_deviation(instr, S @ S)
        evaluations += 1
        # hill-climb on a rescaled effect: shrinking toward the extremes
        # raises the convexity gap while leaving the fixed-point exactness
        for _ in range(3):
            if evaluations >= budget:
                break
            S_try = (S - 0.5 * np.eye(dim)) * rng.uniform(1.0, 1.4) + 0.5 * np.eye(dim)
            w = np.linalg.eigvalsh(0.5 * (S_try + dag(S_try)))
            if w[0] < 0.0 or w[-1] > 1.0:
                evaluations += 1
                continue
            d1_try = nsc_deviation(instr, S_try)
            d2_try = nsc_deviation(instr, S_try @ S_try)
            evaluations += 1
            if d1_try <= max(d1, d1_max) and d2_try > d2:
                S, d1, d2 = S_try, d1_try, d2_try
        if d1 <= d1_max and d2 >= d2_min:
            witness = SearchWitness(instr, S, d1, d2, evaluations)
            if best is None or (witness.d1, -witness.d2) < (best.d1, -best.d2):
                best = witness
            # a valid witness self-verifies; keep the best and stop early
            rd1, rd2 = witness.reverify()
            if rd1 <= d1_max and rd2 >= d2_min:
                return best
    return best if best is not None else NOT_FOUND
