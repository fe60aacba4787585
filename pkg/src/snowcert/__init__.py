"""Rough-angle certificates and near-geodesic witnesses for finite metric spaces."""

__version__ = "0.1.0"

from .chains import (  # noqa: E402
    BestAlpha,
    Certificate,
    Chain,
    DiagnosticsRecord,
    SearchBudget,
    SraQuery,
    Witness,
    admissible,
    best_alpha,
    line_fitting_defect,
    sra_check,
    verify_witness,
    witness_diagnostics,
)
from .metric import (  # noqa: E402
    BiLipschitzConstant,
    DistanceMatrix,
    SnowflakeParams,
    product,
    rescale,
    rough_angle_triple_check,
    snowflake_transform,
    validate,
)

__all__ = [
    "BestAlpha",
    "BiLipschitzConstant",
    "Certificate",
    "Chain",
    "DiagnosticsRecord",
    "DistanceMatrix",
    "SearchBudget",
    "SnowflakeParams",
    "SraQuery",
    "Witness",
    "admissible",
    "best_alpha",
    "line_fitting_defect",
    "product",
    "rescale",
    "rough_angle_triple_check",
    "snowflake_transform",
    "sra_check",
    "validate",
    "verify_witness",
    "witness_diagnostics",
]
