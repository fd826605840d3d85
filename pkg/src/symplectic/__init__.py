"""
Numerical library for discrete symplectic systems and their self-adjoint extensions.
"""

from .core import (
    DiscreteInterval,
    MatrixSeq,
    Trajectory,
    canonical_skew,
    gram,
    semi_inner,
    semi_norm,
    skew_pairing,
    bracket_matrix,
    boundary_bracket,
    CheckResult,
    ValidationReport,
)
from .system import (
    SturmLiouvilleData,
    BlockSpecialData,
    SymplecticSystem,
    lambda_matrix,
    to_forward,
    reconstruct_psi,
    validate_hypothesis,
    sturm_liouville_blocks,
    from_block_special,
    from_sturm_liouville,
    sturm_liouville_state,
    block_data_of,
)
from .solver import (
    FundamentalMatrix,
    solve_ivp,
    fundamental,
    mapped_relation,
    recursion_residual,
    relation_residual,
    verify_lagrange,
    verify_wronskian,
    CanonicalTransform,
    canonical_transform,
    patching_bvp,
    glue_endpoints,
)
from .classify import (
    AtkinsonResult,
    SquareSummableEstimate,
    CriterionReport,
    ClassificationReport,
    check_atkinson,
    find_atkinson_interval,
    count_square_summable,
    limit_point_criterion,
    corollary_lpc,
    hinton_lewis,
    classify_system,
)
from .extensions import (
    BoundaryPair,
    ExtensionForm,
    Separated,
    Coupled,
    FGForm,
    UnitaryForm,
    GeneralML,
    OmegaMatrix,
    ExtensionReport,
    build_omega,
    build_upsilon,
    validate_extension,
    to_general_pair,
    membership,
    canonicalize_scalar,
    named_pair,
    from_fg,
    to_fg,
    from_unitary,
    to_unitary,
    equivalent,
    verify_gkn_set,
    gkn_set_from_pair,
    sample_minimal_pairs,
    krein_von_neumann,
)
from .spectral import (
    PolyMatrix,
    Spectrum,
    transfer_poly,
    characteristic_det,
    degree_bound,
    block_pencil,
    eigenvalues,
)

__all__ = [
    "DiscreteInterval",
    "MatrixSeq",
    "Trajectory",
    "canonical_skew",
    "gram",
    "semi_inner",
    "semi_norm",
    "skew_pairing",
    "bracket_matrix",
    "boundary_bracket",
    "CheckResult",
    "ValidationReport",
    "SturmLiouvilleData",
    "BlockSpecialData",
    "SymplecticSystem",
    "lambda_matrix",
    "to_forward",
    "reconstruct_psi",
    "validate_hypothesis",
    "sturm_liouville_blocks",
    "from_block_special",
    "from_sturm_liouville",
    "sturm_liouville_state",
    "block_data_of",
    "FundamentalMatrix",
    "solve_ivp",
    "fundamental",
    "mapped_relation",
    "recursion_residual",
    "relation_residual",
    "verify_lagrange",
    "verify_wronskian",
    "CanonicalTransform",
    "canonical_transform",
    "patching_bvp",
    "glue_endpoints",
    "AtkinsonResult",
    "SquareSummableEstimate",
    "CriterionReport",
    "ClassificationReport",
    "check_atkinson",
    "find_atkinson_interval",
    "count_square_summable",
    "limit_point_criterion",
    "corollary_lpc",
    "hinton_lewis",
    "classify_system",
    "BoundaryPair",
    "ExtensionForm",
    "Separated",
    "Coupled",
    "FGForm",
    "UnitaryForm",
    "GeneralML",
    "OmegaMatrix",
    "ExtensionReport",
    "build_omega",
    "build_upsilon",
    "validate_extension",
    "to_general_pair",
    "membership",
    "canonicalize_scalar",
    "named_pair",
    "from_fg",
    "to_fg",
    "from_unitary",
    "to_unitary",
    "equivalent",
    "verify_gkn_set",
    "gkn_set_from_pair",
    "sample_minimal_pairs",
    "krein_von_neumann",
    "PolyMatrix",
    "Spectrum",
    "transfer_poly",
    "characteristic_det",
    "degree_bound",
    "block_pencil",
    "eigenvalues",
]
