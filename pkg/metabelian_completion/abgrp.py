"""
Finitely generated abelian groups in invariant-factor form.

Generators are ordered torsion first (d_1 | d_2 | ... , each >= 2) and free
after. Every group may carry an automorphism given by its matrix on these
generators; homomorphisms are matrices target x source.

>>> g = from_relation_matrix(2, IntMatrix.from_rows([[2, 4], [6, 8]])).group
>>> g.torsion, g.rank
((2, 4), 0)
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import factorint

from . import utils
from .errors import IllFormedHom, NotAnAutomorphism
from .linalg import (
    IntMatrix,
    Rows,
    block_diag,
    determinant,
    from_columns,
    hermite_basis,
    identity,
    integer_kernel,
    inverse_unimodular,
    lattice_contains,
    lattice_index,
    mat_mul,
    rank_mod_p,
    snf_rows,
)

logger = utils.get_logger(__name__)


@dataclass(frozen=True)
class FgAbGroup:
    rank: int
    torsion: Tuple[int, ...] = ()
    action: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        for i, d in enumerate(self.torsion):
            if d < 2:
                raise ValueError("torsion factors must be >= 2")
            if i and d % self.torsion[i - 1]:
                raise ValueError("torsion factors must form a divisibility chain")
        if self.action is not None:
            object.__setattr__(
                self, "action", tuple(tuple(r) for r in self.reduce_matrix(self.action))
            )
            _check_automorphism(self)

    @property
    def ngens(self) -> int:
        return len(self.torsion) + self.rank

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(self.torsion) + (0,) * self.rank

    @property
    def is_finite(self) -> bool:
        return self.rank == 0

    @property
    def order(self) -> int:
        if self.rank:
            return 0
        out = 1
        for d in self.torsion:
            out *= d
        return out

    @property
    def is_trivial(self) -> bool:
        return self.ngens == 0

    def relation_columns(self) -> List[List[int]]:
        n = self.ngens
        return [[d if i == j else 0 for i in range(n)] for j, d in enumerate(self.torsion)]

    def reduce(self, vec: Sequence[int]) -> List[int]:
        return [x % d if d else x for x, d in zip(vec, self.orders)]

    def reduce_matrix(self, m: Sequence[Sequence[int]]) -> Rows:
        return [[x % d if d else x for x in row] for row, d in zip(m, self.orders)]

    def action_matrix(self) -> Rows:
        if self.action is None:
            return identity(self.ngens)
        return [list(r) for r in self.action]

    def with_action(self, action: Sequence[Sequence[int]]) -> "FgAbGroup":
        return FgAbGroup(self.rank, self.torsion, tuple(tuple(r) for r in action))

    def elementary_divisors(self) -> Dict[int, List[int]]:
        """Prime -> list of exponents of the p-primary cyclic factors."""
        out: Dict[int, List[int]] = {}
        for d in self.torsion:
            for p, e in factorint(d).items():
                out.setdefault(p, []).append(e)
        return {p: sorted(v) for p, v in out.items()}

    def p_exponents(self, p: int) -> List[int]:
        return self.elementary_divisors().get(p, [])

    def __str__(self) -> str:
        parts = ["Z/%d" % d for d in self.torsion] + ["Z"] * self.rank
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class AbHom:
    source: FgAbGroup
    target: FgAbGroup
    matrix: Tuple[Tuple[int, ...], ...]

    @classmethod
    def build(cls, source: FgAbGroup, target: FgAbGroup, matrix: Sequence[Sequence[int]]):
        if len(matrix) != target.ngens or any(len(r) != source.ngens for r in matrix):
            raise IllFormedHom("matrix shape does not match source/target generators")
        reduced = target.reduce_matrix(matrix)
        hom = cls(source, target, tuple(tuple(r) for r in reduced))
        hom.validate()
        return hom

    @classmethod
    def identity(cls, group: FgAbGroup):
        return cls.build(group, group, identity(group.ngens))

    def to_list(self) -> Rows:
        return [list(r) for r in self.matrix]

    def validate(self):
        for j, d in enumerate(self.source.orders):
            if d == 0:
                continue
            for i, e in enumerate(self.target.orders):
                x = d * self.matrix[i][j]
                if (e and x % e) or (not e and x):
                    raise IllFormedHom(
                        "generator %d of order %d is not sent to an element of dividing order" % (j, d)
                    )

    def compose(self, first: "AbHom") -> "AbHom":
        """self ∘ first."""
        return AbHom.build(first.source, self.target, mat_mul(self.to_list(), first.to_list()))

    def apply(self, vec: Sequence[int]) -> List[int]:
        return self.target.reduce([sum(a * b for a, b in zip(r, vec)) for r in self.matrix])

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.matrix for x in r)


@dataclass(frozen=True)
class Presentation:
    """Cokernel of a relation matrix together with coordinate changes.

    projection: canonical coordinates from ambient coordinates.
    lift: ambient representatives of the canonical generators.
    """

    group: FgAbGroup
    projection: Tuple[Tuple[int, ...], ...]
    lift: Tuple[Tuple[int, ...], ...]
    ambient: int

    def project(self, vec: Sequence[int]) -> List[int]:
        return self.group.reduce([sum(a * b for a, b in zip(r, vec)) for r in self.projection])

    def projection_hom(self, source: FgAbGroup) -> AbHom:
        return AbHom.build(source, self.group, [list(r) for r in self.projection])


@dataclass(frozen=True)
class RankProfile:
    d_q: int
    d_p: int
    big_d: int
    dim_mod_p: int


@dataclass(frozen=True)
class SliceMaps:
    quotient: Tuple[Tuple[int, ...], ...]
    torsion: Tuple[Tuple[int, ...], ...]
    p: int


def _check_automorphism(group: FgAbGroup):
    a = [list(r) for r in group.action]
    k, n = len(group.torsion), group.ngens
    if len(a) != n or any(len(r) != n for r in a):
        raise NotAnAutomorphism("action matrix has the wrong shape")
    try:
        AbHom(group, group, tuple(tuple(r) for r in a)).validate()
    except IllFormedHom as e:
        raise NotAnAutomorphism(str(e))
    free_block = [r[k:] for r in a[k:]]
    if free_block:
        if abs(determinant(free_block)) != 1:
            raise NotAnAutomorphism("action is not invertible on the free part")
    if k:
        tors_cols = [[a[i][j] for i in range(k)] for j in range(k)]
        rels = [[group.torsion[j] if i == j else 0 for i in range(k)] for j in range(k)]
        if lattice_index(hermite_basis(tors_cols + rels, k), k) != 1:
            raise NotAnAutomorphism("action is not surjective on the torsion subgroup")


def from_relation_matrix(
    ngens: int,
    relations: IntMatrix,
    action: Optional[Sequence[Sequence[int]]] = None,
) -> Presentation:
    """
    Cokernel of an ngens x r relation matrix (relations are columns).

    :param ngens: number of ambient generators
    :param relations: IntMatrix with ngens rows
    :param action: optional ambient endomorphism preserving the relations
    :return: Presentation carrying the group and both coordinate changes
    """
    rels = relations.to_list() if relations.nrows else []
    r = relations.ncols if relations.nrows else 0
    if ngens == 0:
        return Presentation(FgAbGroup(0, (), () if action is not None else None), (), (), 0)
    if r == 0:
        u, diagonal = identity(ngens), ()
    else:
        u, _, diagonal = snf_rows(rels, ngens, r)
    diag = list(diagonal) + [0] * (ngens - len(diagonal))
    torsion_idx = [i for i, d in enumerate(diag) if d >= 2]
    free_idx = [i for i, d in enumerate(diag) if d == 0]
    kept = torsion_idx + free_idx
    u_inv = inverse_unimodular(u)
    projection = [u[i][:] for i in kept]
    lift = [[u_inv[row][i] for i in kept] for row in range(ngens)]
    torsion = tuple(diag[i] for i in torsion_idx)
    bare = FgAbGroup(len(free_idx), torsion)
    projection = bare.reduce_matrix(projection)
    induced = None
    if action is not None:
        induced = mat_mul(mat_mul(projection, [list(x) for x in action]), lift)
        induced = tuple(tuple(x) for x in bare.reduce_matrix(induced))
    group = FgAbGroup(len(free_idx), torsion, induced)
    logger.debug("presented %d generators / %d relations as %s", ngens, r, group)
    return Presentation(
        group=group,
        projection=tuple(tuple(x) for x in projection),
        lift=tuple(tuple(x) for x in lift),
        ambient=ngens,
    )


def direct_sum(groups: Sequence[FgAbGroup]) -> Presentation:
    """Direct sum renormalized to invariant-factor form; ambient = concatenated generators."""
    n = sum(g.ngens for g in groups)
    rels: List[List[int]] = []
    offset = 0
    for g in groups:
        for col in g.relation_columns():
            rels.append([0] * offset + col + [0] * (n - offset - g.ngens))
        offset += g.ngens
    action = None
    if all(g.action is not None for g in groups) and groups:
        action = block_diag([g.action_matrix() for g in groups])
    relation_matrix = IntMatrix.from_rows(from_columns(rels, n), len(rels)) if rels else IntMatrix.zeros(n, 0)
    return from_relation_matrix(n, relation_matrix, action)


def quotient(group: FgAbGroup, gens: Sequence[Sequence[int]]) -> Presentation:
    """A / <gens>, generators given as columns in A's coordinates."""
    n = group.ngens
    cols = group.relation_columns() + [list(g) for g in gens]
    relation_matrix = IntMatrix.from_rows(from_columns(cols, n), len(cols)) if cols else IntMatrix.zeros(n, 0)
    action = group.action_matrix() if group.action is not None else None
    return from_relation_matrix(n, relation_matrix, action)


def subgroup(group: FgAbGroup, gens: Sequence[Sequence[int]]) -> Tuple[Presentation, AbHom]:
    """Abstract group generated by ``gens`` and its inclusion into ``group``."""
    n, m = group.ngens, len(gens)
    rels = group.relation_columns()
    stacked = [[g[i] for g in gens] + [-c[i] for c in rels] for i in range(n)]
    kernel = [v[:m] for v in integer_kernel(stacked, m + len(rels))] if n else [
        [1 if i == j else 0 for i in range(m)] for j in range(m)
    ]
    relation_matrix = IntMatrix.from_rows(from_columns(kernel, m), len(kernel)) if kernel else IntMatrix.zeros(m, 0)
    pres = from_relation_matrix(m, relation_matrix)
    incl = mat_mul(from_columns([list(g) for g in gens], n), [list(r) for r in pres.lift]) if m else [
        [] for _ in range(n)
    ]
    if not pres.group.ngens:
        incl = [[] for _ in range(n)]
    return pres, AbHom.build(pres.group, group, incl)


def kernel_generators(f: AbHom) -> List[List[int]]:
    """Generators (source coordinates) of Ker f."""
    n, m = f.source.ngens, f.target.ngens
    rels = f.target.relation_columns()
    stacked = [list(f.matrix[i]) + [-c[i] for c in rels] for i in range(m)]
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    gens = [v[:n] for v in integer_kernel(stacked, n + len(rels))]
    return gens + f.source.relation_columns()


def in_multiple(group: FgAbGroup, vec: Sequence[int], n: int) -> bool:
    """Whether vec lies in n·A."""
    k = group.ngens
    if k == 0:
        return True
    gens = [[n if i == j else 0 for i in range(k)] for j in range(k)] + group.relation_columns()
    basis = hermite_basis(gens, k)
    return lattice_contains(basis, list(vec))


def rank_profile(a: FgAbGroup, p: int) -> RankProfile:
    d_q = a.rank
    d_p = sum(1 for d in a.torsion if d % p == 0)
    # A/p is the cokernel of the relations reduced mod p
    relations = a.relation_columns()
    dim_mod_p = a.ngens - (rank_mod_p(relations, p, a.ngens) if relations else 0)
    profile = RankProfile(d_q=d_q, d_p=d_p, big_d=d_q + d_p, dim_mod_p=dim_mod_p)
    assert profile.dim_mod_p <= profile.big_d
    return profile


def quotient_slice_indices(a: FgAbGroup, p: int) -> List[int]:
    return [i for i, d in enumerate(a.orders) if d == 0 or d % p == 0]


def torsion_slice_indices(a: FgAbGroup, p: int) -> List[int]:
    return [i for i, d in enumerate(a.orders) if d and d % p == 0]


def slice_maps(
    matrix: Sequence[Sequence[int]],
    source_orders: Sequence[int],
    target_orders: Sequence[int],
    p: int,
) -> SliceMaps:
    """Slice maps of a matrix between diagonal groups given by generator orders.

    Orders are 0 for Z, d for Z/d; an order of 1 marks a dead generator.
    """
    qa = [j for j, d in enumerate(source_orders) if d == 0 or d % p == 0]
    qb = [i for i, d in enumerate(target_orders) if d == 0 or d % p == 0]
    quotient_map = [[matrix[i][j] % p for j in qa] for i in qb]
    ta = [j for j, d in enumerate(source_orders) if d and d % p == 0]
    tb = [i for i, d in enumerate(target_orders) if d and d % p == 0]
    torsion_map = [[0] * len(ta) for _ in tb]
    for col, j in enumerate(ta):
        scale = source_orders[j] // p
        for i, e in enumerate(target_orders):
            c = scale * matrix[i][j]
            if i in tb:
                c %= e
                step = e // p
                if c % step:
                    raise IllFormedHom("p-torsion element mapped outside the p-torsion")
                torsion_map[tb.index(i)][col] = (c // step) % p
            elif (e and c % e) or (not e and c):
                raise IllFormedHom("p-torsion element mapped outside the p-torsion")
    return SliceMaps(
        quotient=tuple(tuple(r) for r in quotient_map),
        torsion=tuple(tuple(r) for r in torsion_map),
        p=p,
    )


def induced_on_slices(f: AbHom, p: int) -> SliceMaps:
    """
    Maps induced by f on A/p -> B/p and on the p-torsion _pA -> _pB.

    :param f: well-formed homomorphism
    :param p: prime
    :return: SliceMaps, both matrices over Z/p
    """
    f.validate()
    return slice_maps(f.matrix, f.source.orders, f.target.orders, p)


def action_slices(group: FgAbGroup, p: int) -> SliceMaps:
    """The action of t on both p-slices of a group with action."""
    return induced_on_slices(AbHom.build(group, group, group.action_matrix()), p)


def p_primary(group: FgAbGroup, p: int) -> Tuple[FgAbGroup, AbHom, AbHom]:
    """p-primary torsion plus free part, with projection and inclusion.

    Cyclic factors Z/d map onto Z/p^v (v = v_p(d)) by reduction; the inclusion
    sends 1 to the CRT idempotent u (u = 1 mod p^v, u = 0 mod d/p^v).
    """
    factors, keep, units = [], [], []
    for i, d in enumerate(group.torsion):
        pv = 1
        while d % (pv * p) == 0:
            pv *= p
        if pv > 1:
            rest = d // pv
            u = rest * pow(rest, -1, pv) % d if rest > 1 else 1
            factors.append(pv)
            keep.append(i)
            units.append(u)
    k = len(group.torsion)
    free = list(range(k, k + group.rank))
    order = sorted(range(len(factors)), key=lambda t: factors[t])
    factors = [factors[t] for t in order]
    keep = [keep[t] for t in order]
    units = [units[t] for t in order]
    n_new = len(factors) + group.rank
    proj = [[0] * group.ngens for _ in range(n_new)]
    incl = [[0] * n_new for _ in range(group.ngens)]
    for row, (i, u) in enumerate(zip(keep, units)):
        proj[row][i] = 1
        incl[i][row] = u
    for t, i in enumerate(free):
        proj[len(factors) + t][i] = 1
        incl[i][len(factors) + t] = 1
    action = None
    if group.action is not None:
        action = mat_mul(mat_mul(proj, group.action_matrix()), incl)
    bare = FgAbGroup(group.rank, tuple(factors))
    if action is not None:
        bare = bare.with_action(bare.reduce_matrix(action))
    return bare, AbHom.build(group, bare, proj), AbHom.build(bare, group, incl)


def divisibility_depth(stages: Sequence[FgAbGroup], transitions: Sequence[AbHom], n: int) -> Dict[int, Optional[int]]:
    """
    For each prime power p^v || n, the least stage index i (0-based) with
    Ker(A_L -> A_i) ⊆ p^v A_L at the last stage L; None if no such i.

    transitions[j] maps stages[j+1] -> stages[j].
    """
    last = len(stages) - 1
    composites: List[AbHom] = [None] * (last + 1)  # type: ignore
    composites[last] = AbHom.identity(stages[last])
    for i in range(last - 1, -1, -1):
        composites[i] = transitions[i].compose(composites[i + 1])
    out: Dict[int, Optional[int]] = {}
    for prime, e in factorint(n).items():
        q = prime**e
        out[prime] = None
        for i in range(last + 1):
            gens = kernel_generators(composites[i])
            if all(in_multiple(stages[last], g, q) for g in gens):
                out[prime] = i
                break
    return out


def limit_slices(transitions: Sequence[AbHom], p: int) -> Dict[str, List[int]]:
    """Slice dimensions along a tower and the ranks of the transition slice maps."""
    quotient_ranks, torsion_ranks = [], []
    for t in transitions:
        s = induced_on_slices(t, p)
        quotient_ranks.append(rank_mod_p([list(r) for r in s.quotient], p, len(s.quotient[0]) if s.quotient else 0))
        torsion_ranks.append(rank_mod_p([list(r) for r in s.torsion], p, len(s.torsion[0]) if s.torsion else 0))
    return {"quotient_ranks": quotient_ranks, "torsion_ranks": torsion_ranks}
