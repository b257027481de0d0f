"""Moment-map tools for two-step nilpotent Lie algebras.

A structure tensor is a tuple of p skew-symmetric q x q matrices.  The
package evaluates the moment map of the GL(q) x GL(p) action, runs the
normalized gradient flow to distinguished (soliton) points, certifies
strata that contain none, decides indecomposability, and tabulates
generic moduli dimensions by type (p, q).
"""

from .tensor_core import (
    StructureTensor,
    GroupElement,
    new_tensor,
    is_type_pq,
    group_act,
    infinitesimal_act,
    inner,
    norm,
    random_tensor,
)
from .moment import (
    Subgroup,
    MomentImage,
    DistinguishedReport,
    DISTINGUISHED_TOL,
    moment,
    moment_oracle,
    distinguished_report,
    minimality_defect,
)
from .constructions import (
    FamilyKind,
    FamilySpec,
    RescaleResult,
    standard_blocks,
    heisenberg_j,
    soliton_23,
    b_blocks,
    jk_pair,
    concat,
    pad_concat,
    adjoin,
    rescale_match,
    build_family,
    build_minimal_D,
    d_tilde,
    sl_q_eigenvalue,
)
from .certification import (
    WPoint,
    Verdict,
    Condition,
    Certificate,
    SpreadResult,
    HDetectionReport,
    OrbitRelation,
    OrbitInvariant,
    coefficient_names,
    coefficient_values,
    value_matrix,
    replay_values,
    h_detection_check,
    minimize_spread,
    non_einstein_certificate,
    random_w_point,
    w_point_from_theta,
    orbit_separation_invariant,
    compare_orbit_invariants,
    middle_sign_flip,
)
from .flow import (
    FlowStatus,
    FlowResult,
    ScanOutcome,
    ScanSummary,
    RANK_COLLAPSE_TOL,
    flow_to_distinguished,
    scan_generic,
)
from .indecomposability import (
    Decomposition,
    KERNEL_TOL,
    common_kernel,
    pencil_nonsingular,
    structural_criteria,
    decomposition_search,
)
from .moduli import (
    ModuliSource,
    ModuliEntry,
    RegionLabel,
    RegionEntry,
    RegionBound,
    generic_moduli_dim,
    moduli_entry,
    concat_moduli_bound,
    non_einstein_region,
    classify_type,
    region_table,
)
from .kernels import backend_name, available_backends

__version__ = "0.1.0"

__all__ = [
    "StructureTensor", "GroupElement", "new_tensor", "is_type_pq",
    "group_act", "infinitesimal_act", "inner", "norm", "random_tensor",
    "Subgroup", "MomentImage", "DistinguishedReport", "DISTINGUISHED_TOL",
    "moment", "moment_oracle", "distinguished_report", "minimality_defect",
    "FamilyKind", "FamilySpec", "RescaleResult", "standard_blocks",
    "heisenberg_j", "soliton_23", "b_blocks", "jk_pair", "concat",
    "pad_concat", "adjoin", "rescale_match", "build_family",
    "build_minimal_D", "d_tilde", "sl_q_eigenvalue",
    "WPoint", "Verdict", "Condition", "Certificate", "SpreadResult",
    "HDetectionReport", "OrbitRelation", "OrbitInvariant",
    "coefficient_names", "coefficient_values", "value_matrix",
    "replay_values", "h_detection_check", "minimize_spread",
    "non_einstein_certificate", "random_w_point", "w_point_from_theta",
    "orbit_separation_invariant", "compare_orbit_invariants",
    "middle_sign_flip",
    "FlowStatus", "FlowResult", "ScanOutcome", "ScanSummary",
    "RANK_COLLAPSE_TOL", "flow_to_distinguished", "scan_generic",
    "Decomposition", "KERNEL_TOL", "common_kernel", "pencil_nonsingular",
    "structural_criteria", "decomposition_search",
    "ModuliSource", "ModuliEntry", "RegionLabel", "RegionEntry",
    "RegionBound", "generic_moduli_dim", "moduli_entry",
    "concat_moduli_bound", "non_einstein_region", "classify_type",
    "region_table",
    "backend_name", "available_backends",
    "__version__",
]
