"""povmlab: finite-dimensional verification toolkit for localization POVMs,
measurement causality, and conditional laboratory observables."""

__version__ = "0.1.0"

from .geometry import (
    CausalClass,
    FourVector,
    RegionUnion,
    SpacetimeBox,
    causally_separated,
    classify_vector,
    lab_contains,
    spatial_distance,
    translate_region,
)
from .linalg import op_norm, psd_sqrt, trace_norm
from .measurement import (
    DiscretePOVM,
    KrausInstrument,
    luders_instrument,
    nonselective_post_state,
    polar_kraus,
    selective_post_state,
    sequential_joint_prob,
    validate,
)
from .signaling import (
    DeviationReport,
    beck_check,
    commutator_residual,
    heinosaari_wolf_search,
    luders_equivalence_check,
    nsc_deviation,
    rcc_deviation,
)
from .lattice import (
    HCAuditReport,
    LatticeLocalizationSystem,
    build_alternating_system,
    build_frame_smeared_system,
    build_sharp_system,
    cc_residual,
    effect_of,
    hc_audit,
    ldp_minimal_region,
    microcausality_residual,
    projector_screening_identity,
)
from .conditional import (
    ConditionalPOVM,
    GentleBoundReport,
    build_conditional,
    build_conditional_from_unnormalized,
    composition_identity_check,
    conditional_prob_bound,
    cross_lab_commutator,
    gentle_bound,
    kernel_min_eig,
    v_conjugation_reduction,
)
from .reporting import CheckReport

__all__ = [
    "CausalClass",
    "CheckReport",
    "ConditionalPOVM",
    "DeviationReport",
    "DiscretePOVM",
    "FourVector",
    "GentleBoundReport",
    "HCAuditReport",
    "KrausInstrument",
    "LatticeLocalizationSystem",
    "RegionUnion",
    "SpacetimeBox",
    "beck_check",
    "build_alternating_system",
    "build_conditional",
    "build_conditional_from_unnormalized",
    "build_frame_smeared_system",
    "build_sharp_system",
    "causally_separated",
    "cc_residual",
    "classify_vector",
    "commutator_residual",
    "composition_identity_check",
    "conditional_prob_bound",
    "cross_lab_commutator",
    "effect_of",
    "gentle_bound",
    "hc_audit",
    "heinosaari_wolf_search",
    "kernel_min_eig",
    "lab_contains",
    "ldp_minimal_region",
    "luders_equivalence_check",
    "luders_instrument",
    "microcausality_residual",
    "nonselective_post_state",
    "nsc_deviation",
    "op_norm",
    "polar_kraus",
    "projector_screening_identity",
    "psd_sqrt",
    "rcc_deviation",
    "selective_post_state",
    "sequential_joint_prob",
    "spatial_distance",
    "trace_norm",
    "translate_region",
    "validate",
]
