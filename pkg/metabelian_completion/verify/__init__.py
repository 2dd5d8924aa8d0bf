"""Verification harness: the group zoo, series quotients and theorem checks."""

from .zoo import ZOO, GroupSpec, ModuleSlices, load_group, load_module
from .lcs import LcsTerm, lcs_quotients, q_prenilpotence_index
from .epimorphism import EpiReport, matrix_congruent_to_one, verify_epimorphism
from .dwyer import DwyerReport, PruferReport, dwyer_filtration, prufer_remark
from .rational import rational_verify
from .service import VerificationService

__all__ = [
    "ZOO",
    "GroupSpec",
    "ModuleSlices",
    "load_group",
    "load_module",
    "LcsTerm",
    "lcs_quotients",
    "q_prenilpotence_index",
    "EpiReport",
    "matrix_congruent_to_one",
    "verify_epimorphism",
    "DwyerReport",
    "PruferReport",
    "dwyer_filtration",
    "prufer_remark",
    "rational_verify",
    "VerificationService",
]
