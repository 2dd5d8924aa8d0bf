"""
H_n(G, Z/p) -> H_n(Ĝ_R, Z/p) for G = M ⋊ C and R = Z or Z/p.

Both sides are assembled from two columns: H_*(M) with its t-action on one
side, and on the other the Λ⊗Γ homology of the stabilized completion,
read through the slices of the limit report. The map between them is induced
by M -> (stable stage), expressed in the basis of the limit slices.
Surjectivity comes from the four-lemma on the two columns; where that is
undecided, or at p = 2 with 2-torsion, exact chain maps decide.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .. import utils
from ..abgrp import FgAbGroup
from ..cmod import CompletionTower, LimitReport, Truncation, completion_tower
from ..errors import LiftFailure, SizeExceeded, Unsupported, UnsupportedAtTwo
from ..homology.chainres import CHAIN_BUDGET, ConeMap, chain_homology, equivariant_resolution, lift_chain_map
from ..homology.homfun import GradedCModule, homology_lambda_gamma, homology_of_group, induced_map, two_column_semidirect
from ..linalg import Rows, from_columns, mat_sub_identity, rank_mod_p, solve_mod_p
from ..utils import Flavor, Ring
from .zoo import GroupSpec, ModuleSlices

logger = utils.get_logger(__name__)

FORMULA = "formula"
CHAIN = "chain"
RATIONAL = "rational"


@dataclass(frozen=True)
class HomologyResult:
    """H_n(A ⋊ C, K) for n <= nmax with the route that produced it."""

    dims: Tuple[int, ...]
    route: str
    graded: Optional[GradedCModule] = field(default=None, compare=False, repr=False)


def matrix_congruent_to_one(a: Rows, p: int) -> bool:
    """a ≡ 1 mod p entrywise; for a lattice this is M(t - 1) ⊆ pM."""
    return all((x - (1 if i == j else 0)) % p == 0 for i, r in enumerate(a) for j, x in enumerate(r))


def _coinvariant_dim(action: Rows, dim: int, p: int) -> int:
    return dim - rank_mod_p(mat_sub_identity(action), p, dim) if dim else 0


def semidirect_homology(group: FgAbGroup, p: int, nmax: int, budget: int = CHAIN_BUDGET) -> HomologyResult:
    """H_*(A ⋊ C, Z/p) for an abelian group with action."""
    try:
        h = homology_of_group(group, p, nmax)
    except UnsupportedAtTwo:
        cone = chain_homology(group, p, nmax, budget)
        return HomologyResult(tuple(cone.homology_dims), CHAIN)
    return HomologyResult(two_column_semidirect(h).totals, FORMULA, h)


def group_homology(group: GroupSpec, p: int, nmax: int, budget: int = CHAIN_BUDGET) -> HomologyResult:
    """
    H_*(G, Z/p) for G = M ⋊ C.

    :raises UnsupportedAtTwo: p = 2, M has 2-torsion and is not finitely
        generated; ``partial`` holds H_0 and H_1
    """
    s = group.slices(p)
    if p == 2 and s.w_dim:
        fg = group.fg_group()
        if fg is None:
            partial = {"dims": [1, 1 + _coinvariant_dim([list(r) for r in s.v_action], s.v_dim, p)]}
            raise UnsupportedAtTwo("no chain route for %s at p = 2" % group.name, partial=partial)
        cone = chain_homology(fg, p, nmax, budget)
        return HomologyResult(tuple(cone.homology_dims), CHAIN)
    h = homology_lambda_gamma(s.v_action, s.w_action, p, nmax, s.v_dim, s.w_dim)
    return HomologyResult(two_column_semidirect(h).totals, FORMULA, h)


@dataclass(frozen=True)
class CompletionHomology:
    """H_*(M̂ ⋊ C, Z/p) read off a stabilized tower."""

    tower: CompletionTower
    stage: Truncation
    homology: HomologyResult

    @property
    def limit(self) -> LimitReport:
        return self.tower.limit

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.homology.dims


def stage_is_limit(stage: Truncation, limit: LimitReport, p: int) -> bool:
    """Whether the stable stage already is M̂ at p (no Z_p summand, same torsion)."""
    return (
        limit.zp_rank == 0
        and stage.group.rank == limit.z_rank
        and sorted(stage.group.p_exponents(p)) == sorted(limit.torsion_exponents)
    )


def completion_homology(
    group: GroupSpec,
    flavor: Flavor,
    p: int,
    nmax: int,
    cap: Optional[int] = None,
    budget: int = CHAIN_BUDGET,
) -> CompletionHomology:
    """
    Homology of M̂ ⋊ C through the limit slices of the I- or I_p-tower at p.

    :raises DepthExceeded: the tower does not stabilize
    :raises UnsupportedAtTwo: p = 2 with 2-torsion in the limit and no finite stage equal to it
    """
    tower = completion_tower(group.module, flavor, p, group.depth_cap if cap is None else cap)
    limit = tower.limit
    stage = tower.truncations[tower.report.index - 1]
    if p == 2 and limit.w_dim:
        if not stage_is_limit(stage, limit, p):
            raise UnsupportedAtTwo("2-torsion in M̂ without a finite model", partial=limit.to_dict())
        cone = chain_homology(stage.group, p, nmax, budget)
        return CompletionHomology(tower, stage, HomologyResult(tuple(cone.homology_dims), CHAIN))
    h = homology_lambda_gamma(limit.v_action, limit.w_action, p, nmax, limit.v_dim, limit.w_dim)
    return CompletionHomology(tower, stage, HomologyResult(two_column_semidirect(h).totals, FORMULA, h))


def limit_slice_maps(slices: ModuleSlices, completion: CompletionHomology) -> Tuple[Rows, Rows]:
    """Slice maps of M -> M̂ with W expressed in the basis of the limit W-slice."""
    stage, limit = completion.stage, completion.limit
    p = slices.p
    f_v, f_w_stage = slices.maps_into(stage.presentation.projection, stage.group)
    if not limit.w_dim:
        return f_v, []
    if not slices.w_dim:
        return f_v, [[] for _ in range(limit.w_dim)]
    dim = len(limit.w_basis[0])
    basis = from_columns([list(v) for v in limit.w_basis], dim)
    coords = solve_mod_p(basis, f_w_stage, p, limit.w_dim)
    if coords is None:
        raise LiftFailure("image of _pM leaves the W-slice of the limit")
    return f_v, coords


def chain_comparison(
    group: GroupSpec, completion: CompletionHomology, p: int, nmax: int, budget: int = CHAIN_BUDGET
) -> Optional[ConeMap]:
    """Exact map H_*(G) -> H_*(Ĝ) when M is f.g. and the stable stage is the limit."""
    stage = completion.stage
    if not stage_is_limit(stage, completion.limit, p):
        return None
    f = group.hom_to(stage.presentation.projection, stage.group)
    if f is None:
        return None
    try:
        source = equivariant_resolution(f.source, p, nmax, budget)
        target = equivariant_resolution(f.target, p, nmax, budget)
    except SizeExceeded as e:
        logger.warning("chain comparison for %s at p=%d skipped: %s", group.name, p, e)
        return None
    return lift_chain_map(f, source, target)


@dataclass(frozen=True)
class DegreeVerdict:
    n: int
    dim_g: int
    dim_ghat: int
    surjective: Optional[bool]
    split: Optional[bool]
    route: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "dimG": self.dim_g,
            "dimGhat": self.dim_ghat,
            "surjective": self.surjective,
            "split": self.split,
            "route": self.route,
        }


@dataclass(frozen=True)
class EpiReport:
    """Degree-wise verdicts on H_n(G, K) -> H_n(Ĝ_R, K)."""

    group: str
    ring: Ring
    p: int
    degrees: Tuple[DegreeVerdict, ...]
    stabilization: Dict[str, Any]
    iso_case: bool = False
    towers_agree: Optional[bool] = None
    tame: Optional[bool] = None
    notes: Tuple[str, ...] = ()

    @property
    def surjective(self) -> bool:
        return all(d.surjective is True for d in self.degrees)

    @property
    def dims_equal(self) -> bool:
        return all(d.dim_g == d.dim_ghat for d in self.degrees)

    @property
    def verified(self) -> bool:
        if not self.surjective:
            return False
        if any(d.dim_g < d.dim_ghat for d in self.degrees):
            return False
        if self.iso_case and not self.dims_equal:
            return False
        return self.towers_agree is not False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": self.group,
            "R": self.ring.value,
            "p": self.p,
            "degrees": [d.to_dict() for d in self.degrees],
            "stabilization": dict(self.stabilization),
            "iso_case": self.iso_case,
            "towers_agree": self.towers_agree,
            "tame": self.tame,
            "notes": list(self.notes),
            "verified": self.verified,
        }


def verify_epimorphism(
    group: GroupSpec,
    ring: Ring,
    p: int,
    nmax: Optional[int] = None,
    cap: Optional[int] = None,
    budget: int = CHAIN_BUDGET,
) -> EpiReport:
    """
    Check that H_n(G, Z/p) -> H_n(Ĝ_R, Z/p) is onto for n <= nmax.

    Args:
        group: G = M ⋊ C
        ring: Ring.Z (Ĝ_Z = M̂_I ⋊ C) or Ring.ZP (Ĝ_{Z/p} = M̂_{I_p} ⋊ Z_p)
        p: prime
        nmax: top degree (defaults to the group's nmax)
        cap: depth cap of the towers
        budget: chain-route size budget

    Returns:
        EpiReport; both towers are computed and must give the same homology

    Raises:
        DepthExceeded, UnsupportedAtTwo, Unsupported (for Ring.Q, see rational_verify)
    """
    if ring is Ring.Q:
        raise Unsupported("rational completions go through rational_verify")
    top = group.nmax if nmax is None else nmax
    tame = group.tame()
    if not tame:
        logger.warning("%s is not tame; completion claims are not covered", group.name)
    source = group_homology(group, p, top, budget)
    via_i = completion_homology(group, Flavor.I, p, top, cap, budget)
    via_ip = completion_homology(group, Flavor.IP, p, top, cap, budget)
    chosen = via_i if ring is Ring.Z else via_ip
    towers_agree = via_i.dims == via_ip.dims
    if not towers_agree:
        logger.warning("%s p=%d: I-tower %s and I_p-tower %s disagree", group.name, p, via_i.dims, via_ip.dims)

    surjective: List[Optional[bool]] = [None] * (top + 1)
    split: List[Optional[bool]] = [None] * (top + 1)
    routes = [FORMULA] * (top + 1)
    notes: List[str] = []
    if source.graded is not None and chosen.homology.graded is not None:
        f_v, f_w = limit_slice_maps(group.slices(p), chosen)
        comparison = induced_map(f_v, f_w, source.graded, chosen.homology.graded)
        report = two_column_semidirect(source.graded, comparison, chosen.homology.graded).comparison
        surjective = list(report.middle_surjective)
        split = list(report.split)
    if any(s is None for s in surjective):
        cone = chain_comparison(group, chosen, p, top, budget)
        if cone is None:
            notes.append("four-lemma undecided in degrees %s; no chain route" % [n for n, s in enumerate(surjective) if s is None])
        else:
            for n in range(top + 1):
                if surjective[n] is None:
                    surjective[n] = cone.is_surjective(n)
                    routes[n] = CHAIN
    degrees = tuple(
        DegreeVerdict(n, source.dims[n], chosen.dims[n], surjective[n], split[n], routes[n]) for n in range(top + 1)
    )
    stabilization = {
        "I": via_i.tower.report.index,
        "Ip": via_ip.tower.report.index,
        "I_last_depth": via_i.tower.report.last_depth,
        "Ip_last_depth": via_ip.tower.report.last_depth,
        "limit": chosen.limit.to_dict(),
    }
    epi = EpiReport(
        group=group.name,
        ring=ring,
        p=p,
        degrees=degrees,
        stabilization=stabilization,
        iso_case=group.iso_case(p),
        towers_agree=towers_agree,
        tame=tame,
        notes=tuple(notes),
    )
    logger.info("verify-epi %s R=%s p=%d: verified=%s", group.name, ring.value, p, epi.verified)
    return epi
