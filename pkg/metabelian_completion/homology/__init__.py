"""Mod-p homology of abelian groups with t-action and of their extensions by C."""

from .homfun import (
    GradedCModule,
    TwoColumnReport,
    h2_certificates,
    homology_lambda_gamma,
    homology_of_group,
    induced_map,
    two_column_semidirect,
)
from .chainres import (
    CoeffComplex,
    WangCone,
    equivariant_resolution,
    lift_chain_map,
    wang_cone_homology,
)

__all__ = [
    "GradedCModule",
    "TwoColumnReport",
    "h2_certificates",
    "homology_lambda_gamma",
    "homology_of_group",
    "induced_map",
    "two_column_semidirect",
    "CoeffComplex",
    "WangCone",
    "equivariant_resolution",
    "lift_chain_map",
    "wang_cone_homology",
]
