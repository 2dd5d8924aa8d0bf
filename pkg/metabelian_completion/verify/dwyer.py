"""
The Dwyer filtration Φ_i = Ker(H_2(G) -> H_2(G/γ_i)) of G = M ⋊ C.

With M finitely generated the maps are exact chain maps. For localized M the
group G -> G/γ_i has no chain model on the source side, and Φ_i is bracketed
through the two-column sequence: with α on H_0(C, H_2 M) and β on
H_1(C, H_1 M),

    ker α + max(0, ker β - coker α) <= dim Φ_i <= ker α + ker β.

The quotients G/γ_i are finite or free, so the inverse system of their H_2
is always computed exactly; its stable image is compared with H_2(G) and
with the completion route.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from .. import utils
from ..abgrp import AbHom, FgAbGroup, quotient
from ..errors import SizeExceeded, UnsupportedAtTwo
from ..homology.chainres import CHAIN_BUDGET, CoeffComplex, equivariant_resolution, lift_chain_map
from ..homology.homfun import GradedCModule, homology_lambda_gamma, homology_of_group, induced_map, induced_map_of
from ..linalg import Rows, kernel_image_mod_p, mat_sub_identity, mat_vec, rank_mod_p
from ..utils import Flavor, Ring
from .epimorphism import CHAIN, completion_homology, group_homology, semidirect_homology
from .lcs import LcsTerm, lcs_quotients
from .zoo import GroupSpec, ModuleSlices

logger = utils.get_logger(__name__)

INTERVAL = "interval"


@dataclass(frozen=True)
class DwyerStage:
    i: int
    h2_quotient: int
    phi_interval: Tuple[int, int]
    limit_image: Optional[int]
    route: str

    @property
    def phi(self) -> Optional[int]:
        lo, hi = self.phi_interval
        return lo if lo == hi else None

    @property
    def exact(self) -> bool:
        return self.phi is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "i": self.i,
            "h2_quotient": self.h2_quotient,
            "phi": self.phi,
            "phi_interval": list(self.phi_interval),
            "limit_image": self.limit_image,
            "route": self.route,
            "exact": self.exact,
        }


@dataclass(frozen=True)
class DwyerReport:
    group: str
    p: int
    ring: Ring
    h2_group: int
    stages: Tuple[DwyerStage, ...]
    stabilization_index: Optional[int]
    limit_dim: Optional[int]
    completion_h2: Optional[int] = None
    truncated_at: Optional[int] = None

    @property
    def mode(self) -> str:
        return CHAIN if all(s.route == CHAIN for s in self.stages) else INTERVAL

    @property
    def decreasing(self) -> bool:
        """Φ_{i+1} ⊆ Φ_i, checked on dimensions (upper bounds in interval mode)."""
        uppers = [s.phi_interval[1] for s in self.stages]
        lowers = [s.phi_interval[0] for s in self.stages]
        return all(lowers[k + 1] <= uppers[k] for k in range(len(self.stages) - 1))

    @property
    def stable_stage(self) -> Optional[DwyerStage]:
        for s in self.stages:
            if s.i == self.stabilization_index:
                return s
        return None

    @property
    def exact_sequence_holds(self) -> Optional[bool]:
        """dim H_2(G) = dim Φ_stab + dim lim H_2(G/γ_i)."""
        stage = self.stable_stage
        if stage is None or self.limit_dim is None:
            return None
        lo, hi = stage.phi_interval
        return lo <= self.h2_group - self.limit_dim <= hi

    @property
    def oracle_agrees(self) -> Optional[bool]:
        if self.completion_h2 is None or self.limit_dim is None:
            return None
        return self.completion_h2 == self.limit_dim

    @property
    def verified(self) -> bool:
        return bool(self.exact_sequence_holds) and self.decreasing and self.oracle_agrees is not False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": self.group,
            "R": self.ring.value,
            "p": self.p,
            "mode": self.mode,
            "exact": self.mode == CHAIN,
            "h2_group": self.h2_group,
            "stages": [s.to_dict() for s in self.stages],
            "stabilization_index": self.stabilization_index,
            "limit_dim": self.limit_dim,
            "completion_h2": self.completion_h2,
            "truncated_at": self.truncated_at,
            "decreasing": self.decreasing,
            "exact_sequence_holds": self.exact_sequence_holds,
            "oracle_agrees": self.oracle_agrees,
            "verified": self.verified,
        }


def _fixed_basis(action: Rows, dim: int, p: int) -> List[List[int]]:
    if not dim:
        return []
    return [list(v) for v in kernel_image_mod_p(mat_sub_identity(action), p, dim).kernel]


def _coinvariant_rank(f: Rows, target_action: Rows, dim: int, p: int) -> int:
    """Rank of the map into target coinvariants: rank [f | T-1] - rank(T-1)."""
    if not dim:
        return 0
    t_minus = mat_sub_identity(target_action)
    stacked = [list(f[i]) + list(t_minus[i]) for i in range(dim)]
    return rank_mod_p(stacked, p, len(stacked[0])) - rank_mod_p(t_minus, p, dim)


def two_column_interval(source: GradedCModule, target: GradedCModule, f2: Rows, f1: Rows) -> Tuple[int, int]:
    """Bounds on dim Ker(H_2(G) -> H_2(G')) from the maps on H_2(M) and H_1(M)."""
    p = source.p
    src2, tgt2 = source.dim(2), target.dim(2)
    coinv_src = src2 - (rank_mod_p(mat_sub_identity(source.action(2)), p, src2) if src2 else 0)
    coinv_tgt = tgt2 - (rank_mod_p(mat_sub_identity(target.action(2)), p, tgt2) if tgt2 else 0)
    rank_a = _coinvariant_rank(f2 if src2 else [[] for _ in range(tgt2)], target.action(2), tgt2, p)
    ker_a, coker_a = coinv_src - rank_a, coinv_tgt - rank_a
    fixed_src = _fixed_basis(source.action(1), source.dim(1), p)
    fixed_tgt = _fixed_basis(target.action(1), target.dim(1), p)
    images = [mat_vec(f1, v, p) for v in fixed_src] if target.dim(1) else []
    rank_b = rank_mod_p(images, p, target.dim(1)) if images else 0
    ker_b = len(fixed_src) - rank_b
    assert rank_b <= len(fixed_tgt)
    return ker_a + max(0, ker_b - coker_a), ker_a + ker_b


def _interval(
    group: GroupSpec, h2_group: int, h_m: Optional[GradedCModule], slices: ModuleSlices, term: LcsTerm, p: int, h2_n: int
) -> Tuple[int, int]:
    try:
        h_n = homology_of_group(term.group, p, 2)
    except UnsupportedAtTwo:
        h_n = None
    if h_m is None or h_n is None:
        logger.warning("%s i=%d p=%d: only the rank bound is available for Φ_i", group.name, term.i, p)
        return max(0, h2_group - h2_n), h2_group
    f_v, f_w = slices.maps_into(term.projection, term.group)
    f = induced_map(f_v, f_w, h_m, h_n)
    return two_column_interval(h_m, h_n, f.matrix(2), f.matrix(1))


def dwyer_filtration(
    group: GroupSpec,
    p: int,
    ring: Ring = Ring.Z,
    imax: Optional[int] = None,
    budget: int = CHAIN_BUDGET,
) -> DwyerReport:
    """
    Φ_i for 2 <= i <= imax, the stable image of lim H_2(G/γ_i) and the
    completion-route H_2(Ĝ_Z) it must agree with.

    Stages whose chain model exceeds the budget end the computation; the
    report then records ``truncated_at``.

    :raises UnsupportedAtTwo: H_2(G, Z/2) itself is out of reach
    """
    terms = lcs_quotients(group, ring, imax)
    h2_group = group_homology(group, p, 2, budget).dims[2]
    fg = group.is_finitely_generated
    complexes: Dict[int, CoeffComplex] = {}

    def complex_of(term: LcsTerm) -> CoeffComplex:
        if term.i not in complexes:
            complexes[term.i] = equivariant_resolution(term.group, p, 2, budget)
        return complexes[term.i]

    source_complex = equivariant_resolution(group.fg_group(), p, 2, budget) if fg else None
    slices = group.slices(p)
    h_m: Optional[GradedCModule] = None
    if not fg and not (p == 2 and slices.w_dim):
        h_m = homology_lambda_gamma(slices.v_action, slices.w_action, p, 2, slices.v_dim, slices.w_dim)

    computed: List[Tuple[LcsTerm, int, Tuple[int, int], str]] = []
    truncated_at: Optional[int] = None
    for term in terms:
        try:
            h2_n = semidirect_homology(term.group, p, 2, budget).dims[2]
            if fg:
                f = group.hom_to(term.projection, term.group)
                rank = lift_chain_map(f, source_complex, complex_of(term)).rank(2)
                computed.append((term, h2_n, (h2_group - rank, h2_group - rank), CHAIN))
            else:
                complex_of(term)
                computed.append((term, h2_n, _interval(group, h2_group, h_m, slices, term, p, h2_n), INTERVAL))
        except SizeExceeded as e:
            logger.warning("%s p=%d: Dwyer stages stop before i=%d: %s", group.name, p, term.i, e)
            truncated_at = term.i
            break

    stages: List[DwyerStage] = []
    if computed:
        last = computed[-1][0]
        for term, h2_n, interval, route in computed:
            transition = last.transition_to(term)
            image = lift_chain_map(transition, complex_of(last), complex_of(term)).rank(2)
            stages.append(DwyerStage(term.i, h2_n, interval, image, route))

    index: Optional[int] = None
    for pos, stage in enumerate(stages):
        if all(s.phi_interval == stage.phi_interval for s in stages[pos:]):
            index = stage.i
            break
    limit_dim = next((s.limit_image for s in stages if s.i == index), None)

    completion_h2: Optional[int] = None
    if ring is Ring.Z:
        try:
            completion_h2 = completion_homology(group, Flavor.I, p, 2, budget=budget).dims[2]
        except UnsupportedAtTwo as e:
            logger.warning("%s p=%d: no completion-route H_2: %s", group.name, p, e)
    report = DwyerReport(
        group=group.name,
        p=p,
        ring=ring,
        h2_group=h2_group,
        stages=tuple(stages),
        stabilization_index=index,
        limit_dim=limit_dim,
        completion_h2=completion_h2,
        truncated_at=truncated_at,
    )
    if report.mode != CHAIN:
        logger.warning("%s p=%d: Dwyer values are interval-mode", group.name, p)
    logger.debug("dwyer %s p=%d: %s", group.name, p, [s.phi_interval for s in stages])
    return report


# ---------------------------------------------------------------------------
# Z/p^∞ along inclusions


@dataclass(frozen=True)
class PruferReport:
    """H_2 of the cyclic groups Z/p^i under the inclusions Z/p^i -> Z/p^(i+1)."""

    p: int
    stages: int
    h2_dims: Tuple[int, ...]
    colimit_ranks: Tuple[int, ...]
    completion_images: Tuple[int, ...]

    @property
    def colimit_dim(self) -> int:
        tail = self.colimit_ranks[2:] or self.colimit_ranks
        return min(tail)

    @property
    def completion_dim(self) -> int:
        return max(self.completion_images) if self.completion_images else 0

    @property
    def holds(self) -> bool:
        return self.colimit_dim >= 1 and self.completion_dim == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "stages": self.stages,
            "h2_dims": list(self.h2_dims),
            "colimit_ranks": list(self.colimit_ranks),
            "colimit_dim": self.colimit_dim,
            "completion_images": list(self.completion_images),
            "completion_dim": self.completion_dim,
            "holds": self.holds,
        }


def _cyclic(p: int, i: int) -> FgAbGroup:
    return FgAbGroup(0, (p**i,))


def _inclusion(p: int, i: int, j: int) -> AbHom:
    return AbHom.build(_cyclic(p, i), _cyclic(p, j), [[p ** (j - i)]])


def prufer_remark(p: int, stages: int = 4) -> PruferReport:
    """
    Z/p^∞ as the union of the Z/p^i: the direct system of H_2(Z/p^i, Z/p)
    has a nonzero colimit, while every stage dies in (Z/p^N)/p^k for N >= i + k,
    so the Z/p-completion of the union is 0.

    :raises UnsupportedAtTwo: p = 2
    """
    if p == 2:
        raise UnsupportedAtTwo("the inclusion system is read through Λ⊗Γ, odd p only")
    homology = [homology_of_group(_cyclic(p, i), p, 2) for i in range(1, stages + 1)]
    h2_dims = tuple(h.dim(2) for h in homology)
    top = homology[-1]
    colimit = tuple(
        induced_map_of(_inclusion(p, i, stages), homology[i - 1], top).rank(2) for i in range(1, stages + 1)
    )
    images = []
    for k in range(1, stages + 1):
        n = stages + k
        pres = quotient(_cyclic(p, n), [[p**k]])
        image = pres.project(_inclusion(p, stages, n).apply([1]))
        images.append(sum(1 for x in pres.group.reduce(image) if x))
    report = PruferReport(p, stages, h2_dims, colimit, tuple(images))
    logger.debug("Z/%d^∞: colimit ranks %s, completion images %s", p, colimit, images)
    return report
