"""Boundary-jet recovery from measurement data."""

from .gradient import GradientEstimate, recover_gradient, recover_gradient_field
from .lemmas import LemmaCheck, lemma_limits_check
from .recover import (
    GradientField,
    HessianEstimate,
    JetEstimate,
    RecoverySettings,
    recover_hessian,
    recover_jet,
)
from .tangency import (
    ArcFamily,
    BoundaryFrame,
    ExactFamily,
    TangentFamily,
    TangencyResult,
    build_family,
    check_convexity,
    estimate_ell_prime,
    find_tangent_xi_from_data,
    xi_for_velocity,
)

__all__ = [
    "ArcFamily",
    "BoundaryFrame",
    "ExactFamily",
    "GradientEstimate",
    "GradientField",
    "HessianEstimate",
    "JetEstimate",
    "LemmaCheck",
    "RecoverySettings",
    "TangencyResult",
    "TangentFamily",
    "build_family",
    "check_convexity",
    "estimate_ell_prime",
    "find_tangent_xi_from_data",
    "lemma_limits_check",
    "recover_gradient",
    "recover_gradient_field",
    "recover_hessian",
    "recover_jet",
    "xi_for_velocity",
]
