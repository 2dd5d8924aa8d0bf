"""
Lower central series quotients of G = M ⋊ C.

Since [G, G] = MI, the terms meet M in γ_i = MI^(i-1) for i >= 2 and
G/γ_i = (M/MI^(i-1)) ⋊ C. The rational series takes the isolator, i.e. the
preimage of the torsion of M/MI^(i-1), so its quotients are the free parts.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from .. import utils
from ..abgrp import AbHom, FgAbGroup
from ..cmod import LatticeModule, Truncation, rational_fitting, truncate
from ..errors import InfiniteRank, UnsupportedSeries
from ..linalg import hermite_basis, integer_kernel, lattice_index
from ..utils import Flavor, Ring
from .zoo import GroupSpec

logger = utils.get_logger(__name__)

Matrix = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class LcsTerm:
    """G/γ_i as (quotient module) ⋊ C, read through the truncation M/MI^(i-1)."""

    i: int
    ring: Ring
    truncation: Truncation
    group: FgAbGroup
    projection: Matrix
    gamma_basis: Optional[Matrix] = None

    @property
    def torsion_count(self) -> int:
        return len(self.truncation.group.torsion)

    def transition_to(self, lower: "LcsTerm") -> AbHom:
        """G/γ_j -> G/γ_i on the M-parts, j = self.i >= lower.i."""
        full = self.truncation.transition_to(lower.truncation)
        if self.ring is Ring.Z:
            return full
        k, k2 = self.torsion_count, lower.torsion_count
        matrix = [list(row[k:]) for row in full.matrix[k2:]]
        if not matrix:
            matrix = [[] for _ in range(lower.group.ngens)]
        return AbHom.build(self.group, lower.group, matrix)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "i": self.i,
            "ring": self.ring.value,
            "gamma": "M·I^%d" % (self.i - 1) if self.ring is Ring.Z else "isolator of M·I^%d" % (self.i - 1),
            "quotient": str(self.group),
            "rank": self.group.rank,
            "torsion": list(self.group.torsion),
            "action": self.group.action_matrix(),
        }
        if self.gamma_basis is not None:
            out["gamma_basis"] = [list(c) for c in self.gamma_basis]
            out["gamma_index"] = lattice_index(self.gamma_basis, self.truncation.presentation.ambient)
        return out


def _term(group: GroupSpec, ring: Ring, i: int) -> LcsTerm:
    trunc = truncate(group.module, Flavor.I, i - 1)
    pres = trunc.presentation
    k = len(trunc.group.torsion)
    if ring is Ring.Z:
        quotient, projection = trunc.group, pres.projection
    else:
        action = [list(r[k:]) for r in trunc.group.action_matrix()[k:]]
        quotient = FgAbGroup(trunc.group.rank, (), tuple(tuple(r) for r in action) if action else None)
        projection = pres.projection[k:]
    basis = None
    module = group.module
    if isinstance(module, LatticeModule):
        n = module.rank
        if ring is Ring.Z:
            data = module.ambient_data([(1, i - 1)])
            cols = hermite_basis(data.relations, n)
        else:
            rows = [list(r) for r in projection]
            cols = hermite_basis(integer_kernel(rows, n), n)
        basis = tuple(tuple(c) for c in cols)
    return LcsTerm(i, ring, trunc, quotient, tuple(tuple(r) for r in projection), basis)


def lcs_quotients(group: GroupSpec, ring: Ring = Ring.Z, imax: Optional[int] = None) -> List[LcsTerm]:
    """
    The quotients G/γ_i^R for 2 <= i <= imax.

    Args:
        group: G = M ⋊ C
        ring: Ring.Z or Ring.Q
        imax: last index (defaults to the group's imax)

    Returns:
        list of LcsTerm, index i first at 2

    Raises:
        UnsupportedSeries: for the Z/p series
    """
    if ring is Ring.ZP:
        raise UnsupportedSeries("the Z/p series is evaluated through M̂_{I_p} ⋊ Z_p, not as a subgroup series")
    top = group.imax if imax is None else imax
    terms = [_term(group, ring, i) for i in range(2, top + 1)]
    logger.debug("%s lower %s-central quotients: %s", group.name, ring.value, [str(t.group) for t in terms])
    return terms


@dataclass(frozen=True)
class PrenilpotenceReport:
    index: Optional[int]
    ranks: Tuple[int, ...]
    nilpotent_dim: int

    @property
    def consistent(self) -> bool:
        """The stable rational quotient is the nilpotent Fitting summand."""
        return self.index is not None and self.ranks[-1] == self.nilpotent_dim

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "ranks": list(self.ranks),
            "nilpotent_dim": self.nilpotent_dim,
            "consistent": self.consistent,
        }


def q_prenilpotence_index(group: GroupSpec, imax: Optional[int] = None) -> PrenilpotenceReport:
    """
    Least i from which the ranks of G/γ_i^Q stay constant up to imax.

    The index is None when the rank still moves at imax.
    """
    top = max(group.imax if imax is None else imax, 3)
    try:
        ranks = tuple(t.group.rank for t in lcs_quotients(group, Ring.Q, top))
    except InfiniteRank:
        logger.warning("%s: rational quotients have infinite rank", group.name)
        raise
    index: Optional[int] = None
    for pos in range(len(ranks) - 1):
        if all(r == ranks[pos] for r in ranks[pos:]):
            index = pos + 2
            break
    nilpotent = rational_fitting(group.module).nilpotent_dim
    return PrenilpotenceReport(index, ranks, nilpotent)
