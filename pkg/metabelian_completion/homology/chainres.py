"""
Chain-level homology of M ⋊ C with Z/p coefficients.

The free Z[M]-resolution of Z is the tensor product, over the cyclic factors
of M, of the periodic resolutions of Z/d (differentials g - 1 and the norm
N = 1 + g + ... + g^(d-1)) and of the length-one resolutions of Z. Elements
of the resolution are dictionaries {(group element, degree word): coefficient}.
The automorphism a is lifted to a chain map τ through the explicit contracting
homotopy, coefficient maps are lifted the same way, and the Wang cone of 1 - τ
computes H_*(M ⋊ C, Z/p) together with exact induced maps.

Only the p-primary part and the free part of M are resolved; the prime-to-p
torsion does not contribute to Z/p homology.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

from .. import utils
from ..abgrp import AbHom, FgAbGroup, p_primary
from ..errors import LiftFailure, ShapeMismatch, SizeExceeded
from ..linalg import (
    Rows,
    from_columns,
    kernel_image_mod_p,
    rank_mod_p,
    solve_mod_p,
    subspace_basis,
    zeros,
)
from ..utils import DEFAULTS

logger = utils.get_logger(__name__)

Word = Tuple[int, ...]
Element = Dict[Tuple[Word, Word], int]
Matrix = Tuple[Tuple[int, ...], ...]

CHAIN_BUDGET = DEFAULTS["chain_budget"]


def _factor_differential(order: int, k: int) -> List[Tuple[int, int, int]]:
    """d(e_k) on one factor as (exponent, degree, coefficient) terms."""
    if order == 0 or k % 2 == 1:
        return [(1, k - 1, 1), (0, k - 1, -1)]
    return [(u, k - 1, 1) for u in range(order)]


def _factor_homotopy(order: int, s: int, k: int) -> List[Tuple[int, int, int]]:
    """Contracting homotopy on the Z-basis element g^s e_k of one factor."""
    if order == 0:
        if k:
            return []
        if s >= 0:
            return [(u, 1, 1) for u in range(s)]
        return [(u, 1, -1) for u in range(s, 0)]
    if k % 2 == 0:
        return [(u, k + 1, 1) for u in range(s)]
    return [(0, k + 1, 1)] if s == order - 1 else []


def _add(target: Element, key: Tuple[Word, Word], c: int):
    v = target.get(key, 0) + c
    if v:
        target[key] = v
    else:
        target.pop(key, None)


class Resolution:
    """The tensor-product resolution of Z over Z[M] for M in invariant-factor form."""

    def __init__(self, group: FgAbGroup):
        self.group = group
        self.orders = group.orders
        self.zero = (0,) * len(self.orders)
        self._bases: Dict[int, List[Word]] = {}
        self._index: Dict[int, Dict[Word, int]] = {}

    def basis(self, n: int) -> List[Word]:
        """Degree words k with |k| = n; free factors only reach degree 1."""
        if n not in self._bases:
            out: List[Word] = []

            def extend(prefix: Word, left: int):
                j = len(prefix)
                if j == len(self.orders):
                    if left == 0:
                        out.append(prefix)
                    return
                top = left if self.orders[j] else min(left, 1)
                for kj in range(top + 1):
                    extend(prefix + (kj,), left - kj)

            if n >= 0:
                extend((), n)
            self._bases[n] = out
        return self._bases[n]

    def reduce(self, s: Sequence[int]) -> Word:
        return tuple(x % d if d else x for x, d in zip(s, self.orders))

    def shift(self, element: Element, s: Word) -> Element:
        out: Element = {}
        for (g, k), c in element.items():
            _add(out, (self.reduce([x + y for x, y in zip(g, s)]), k), c)
        return out

    def differential(self, k: Word) -> Element:
        out: Element = {}
        for j, kj in enumerate(k):
            if kj == 0:
                continue
            sign = -1 if sum(k[:j]) % 2 else 1
            for u, kk, c in _factor_differential(self.orders[j], kj):
                s = list(self.zero)
                s[j] = u
                _add(out, (self.reduce(s), k[:j] + (kk,) + k[j + 1 :]), sign * c)
        return out

    def apply_differential(self, element: Element) -> Element:
        out: Element = {}
        for (g, k), c in element.items():
            for key, v in self.shift(self.differential(k), g).items():
                _add(out, key, c * v)
        return out

    def homotopy(self, element: Element) -> Element:
        """H = h ⊗ 1 + σε ⊗ H_rest, applied Z-linearly."""
        out: Element = {}
        r = len(self.orders)
        for (g, k), c in element.items():
            for j in range(r):
                if j and k[j - 1]:
                    break
                for u, kk, coef in _factor_homotopy(self.orders[j], g[j], k[j]):
                    s = self.zero[:j] + (u,) + g[j + 1 :]
                    _add(out, (self.reduce(s), k[:j] + (kk,) + k[j + 1 :]), c * coef)
        return out

    def augment(self, element: Element, n: int, p: int) -> List[int]:
        """Image in C_n = P_n ⊗_{Z[M]} Z/p, in basis(n) coordinates."""
        if n not in self._index:
            self._index[n] = {k: i for i, k in enumerate(self.basis(n))}
        index = self._index[n]
        vec = [0] * len(index)
        for (_, k), c in element.items():
            vec[index[k]] = (vec[index[k]] + c) % p
        return vec


def _semilinear(lifts: Dict[Word, Element], element: Element, hom: AbHom, target: Resolution) -> Element:
    """Σ c · hom(g) · lifts[k] over the terms c·g·e_k of element."""
    out: Element = {}
    for (g, k), c in element.items():
        image = tuple(hom.apply(g))
        for key, v in target.shift(lifts[k], image).items():
            _add(out, key, c * v)
    return out


def _lift(
    source: Resolution,
    target: Resolution,
    hom: AbHom,
    top: int,
) -> List[Dict[Word, Element]]:
    """A chain map P(source) -> P(target), hom-semilinear, lifting the identity of Z."""
    lifts: List[Dict[Word, Element]] = [{source.zero: {(target.zero, target.zero): 1}}]
    for n in range(1, top + 1):
        level: Dict[Word, Element] = {}
        for k in source.basis(n):
            down = _semilinear(lifts[n - 1], source.differential(k), hom, target)
            level[k] = target.homotopy(down)
            if target.apply_differential(level[k]) != down:
                raise LiftFailure("lift does not commute with the differential in degree %d" % n)
        lifts.append(level)
    return lifts


def _matrix(lifts: Dict[Word, Element], source: Resolution, target: Resolution, n_src: int, n_tgt: int, p: int) -> Rows:
    cols = [target.augment(lifts[k], n_tgt, p) for k in source.basis(n_src)]
    return from_columns(cols, len(target.basis(n_tgt)))


def _freeze(rows: Rows) -> Matrix:
    return tuple(tuple(r) for r in rows)


@dataclass
class CoeffComplex:
    """C_* = P ⊗_{Z[M]} Z/p in degrees 0..nmax+1 with the lift τ of the action."""

    p: int
    nmax: int
    group: FgAbGroup
    primary: FgAbGroup
    projection: AbHom
    inclusion: AbHom
    dims: Tuple[int, ...]
    differentials: Tuple[Matrix, ...]
    tau: Tuple[Matrix, ...]
    provenance: str
    resolution: Resolution = field(repr=False, compare=False)
    tau_lifts: List[Dict[Word, Element]] = field(repr=False, compare=False)

    def differential(self, n: int) -> Rows:
        """d_n: C_n -> C_{n-1}; an empty matrix outside 1..nmax+1."""
        if 1 <= n <= self.nmax + 1:
            return [list(r) for r in self.differentials[n - 1]]
        return zeros(self.dim(n - 1), self.dim(n))

    def tau_matrix(self, n: int) -> Rows:
        return [list(r) for r in self.tau[n]]

    def dim(self, n: int) -> int:
        return self.dims[n] if 0 <= n < len(self.dims) else 0


def equivariant_resolution(group: FgAbGroup, p: int, nmax: int, budget: int = CHAIN_BUDGET) -> CoeffComplex:
    """
    Args:
        group: M with its automorphism (finite, free, or a mix of both)
        p: prime
        nmax: top homology degree of interest
        budget: largest allowed order of the p-primary torsion

    Returns:
        CoeffComplex with d² = 0 and dτ = τd checked

    Raises:
        SizeExceeded, LiftFailure
    """
    primary, proj, incl = p_primary(group, p)
    torsion_order = 1
    for d in primary.torsion:
        torsion_order *= d
    if torsion_order > budget:
        raise SizeExceeded("p-primary part of order %d exceeds the budget %d" % (torsion_order, budget))
    res = Resolution(primary)
    action = AbHom.build(primary, primary, primary.action_matrix())
    lifts = _lift(res, res, action, nmax)
    dims = tuple(len(res.basis(n)) for n in range(nmax + 2))
    differentials = []
    for n in range(1, nmax + 2):
        cols = [res.augment(res.differential(k), n - 1, p) for k in res.basis(n)]
        differentials.append(_freeze(from_columns(cols, dims[n - 1])))
    tau = tuple(_freeze(_matrix(lifts[n], res, res, n, n, p)) for n in range(nmax + 1))
    if not primary.torsion:
        provenance = "koszul"
    elif primary.rank:
        provenance = "mixed"
    else:
        provenance = "cyclic"
    complex_ = CoeffComplex(
        p=p,
        nmax=nmax,
        group=group,
        primary=primary,
        projection=proj,
        inclusion=incl,
        dims=dims,
        differentials=tuple(differentials),
        tau=tau,
        provenance=provenance,
        resolution=res,
        tau_lifts=lifts,
    )
    _check_complex(complex_)
    logger.debug("resolution of %s at p=%d (%s): dims %s", group, p, provenance, dims)
    return complex_


def _mul(a: Rows, b: Rows, p: int, inner: int, nrows: int, ncols: int) -> Rows:
    if not inner:
        return zeros(nrows, ncols)
    out = zeros(nrows, ncols)
    for i in range(nrows):
        for j in range(ncols):
            out[i][j] = sum(a[i][t] * b[t][j] for t in range(inner)) % p
    return out


def _check_complex(c: CoeffComplex):
    p = c.p
    for n in range(2, c.nmax + 2):
        dd = _mul(c.differential(n - 1), c.differential(n), p, c.dim(n - 1), c.dim(n - 2), c.dim(n))
        if any(any(r) for r in dd):
            raise LiftFailure("d² != 0 in degree %d" % n)
    for n in range(1, c.nmax + 1):
        lhs = _mul(c.differential(n), c.tau_matrix(n), p, c.dim(n), c.dim(n - 1), c.dim(n))
        rhs = _mul(c.tau_matrix(n - 1), c.differential(n), p, c.dim(n - 1), c.dim(n - 1), c.dim(n))
        if lhs != rhs:
            raise LiftFailure("τ is not a chain map in degree %d" % n)


# ---------------------------------------------------------------------------
# Wang cone


def _block(blocks: Sequence[Sequence[Rows]], row_dims: Sequence[int], col_dims: Sequence[int]) -> Rows:
    out = zeros(sum(row_dims), sum(col_dims))
    r0 = 0
    for bi, rd in enumerate(row_dims):
        c0 = 0
        for bj, cd in enumerate(col_dims):
            blk = blocks[bi][bj]
            for i in range(rd):
                for j in range(cd):
                    out[r0 + i][c0 + j] = blk[i][j]
            c0 += cd
        r0 += rd
    return out


def _rank(rows: Rows, ncols: int, p: int) -> int:
    return rank_mod_p(rows, p, ncols) if rows and ncols else 0


@dataclass
class WangCone:
    """cone(1 - τ): K_n = C_n ⊕ C_{n-1}, ∂(x, y) = (dx + (1 - τ)y, -dy)."""

    p: int
    nmax: int
    complex: CoeffComplex
    dims: Tuple[int, ...]
    boundaries: Tuple[Matrix, ...]
    homology_dims: Tuple[int, ...]

    def boundary(self, n: int) -> Rows:
        return [list(r) for r in self.boundaries[n]]

    def cycles(self, n: int) -> List[List[int]]:
        if not self.dims[n]:
            return []
        if n == 0 or not self.dims[n - 1]:
            return [[1 if i == j else 0 for i in range(self.dims[n])] for j in range(self.dims[n])]
        return [list(v) for v in kernel_image_mod_p(self.boundary(n), self.p, self.dims[n]).kernel]

    def boundary_basis(self, n: int) -> List[List[int]]:
        """Basis of Im(∂_{n+1}) inside K_n."""
        if not self.dims[n] or not self.dims[n + 1]:
            return []
        rows = self.boundary(n + 1)
        cols = [[rows[i][j] for i in range(self.dims[n])] for j in range(self.dims[n + 1])]
        return subspace_basis(cols, self.p, self.dims[n])

    def homology_basis(self, n: int) -> List[List[int]]:
        """Cycle representatives completing the boundary basis to a basis of cycles."""
        bounds = self.boundary_basis(n)
        reps, span = [], list(bounds)
        for z in self.cycles(n):
            if _rank(span + [z], self.dims[n], self.p) > len(span):
                span.append(z)
                reps.append(z)
        return reps

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "dims": list(self.homology_dims), "provenance": self.complex.provenance}


def wang_cone_homology(c: CoeffComplex) -> WangCone:
    """H_n(M ⋊ C, Z/p) for n <= nmax from the cone of 1 - τ."""
    p = c.p
    top = c.nmax + 1
    kdims = tuple(c.dim(n) + c.dim(n - 1) for n in range(top + 1))
    boundaries: List[Matrix] = [()]
    for n in range(1, top + 1):
        one_minus_tau = [
            [((1 if i == j else 0) - x) % p for j, x in enumerate(row)] for i, row in enumerate(c.tau_matrix(n - 1))
        ]
        neg_d = [[(-x) % p for x in r] for r in c.differential(n - 1)]
        rows = _block(
            [
                [c.differential(n), one_minus_tau],
                [zeros(c.dim(n - 2), c.dim(n)), neg_d],
            ],
            [c.dim(n - 1), c.dim(n - 2)],
            [c.dim(n), c.dim(n - 1)],
        )
        boundaries.append(_freeze(rows))
    ranks = [0] + [_rank([list(r) for r in boundaries[n]], kdims[n], p) for n in range(1, top + 1)]
    homology = tuple(kdims[n] - ranks[n] - (ranks[n + 1] if n + 1 <= top else 0) for n in range(c.nmax + 1))
    logger.debug("Wang cone at p=%d: %s", p, homology)
    return WangCone(p, c.nmax, c, kdims, tuple(boundaries), homology)


def chain_homology(group: FgAbGroup, p: int, nmax: int, budget: int = CHAIN_BUDGET) -> WangCone:
    return wang_cone_homology(equivariant_resolution(group, p, nmax, budget))


# ---------------------------------------------------------------------------
# induced maps


@dataclass
class ConeMap:
    """Chain map of Wang cones assembled from a lift φ and a homotopy h."""

    source: WangCone
    target: WangCone
    matrices: Tuple[Matrix, ...]

    def matrix(self, n: int) -> Rows:
        return [list(r) for r in self.matrices[n]]

    def _image_of_cycles(self, n: int) -> List[List[int]]:
        m = self.matrix(n)
        return [[sum(r[j] * z[j] for j in range(len(z))) % self.source.p for r in m] for z in self.source.cycles(n)]

    def rank(self, n: int) -> int:
        """rank of H_n(Φ) = rank([ΦZ | B']) - rank(B')."""
        p, dim = self.source.p, self.target.dims[n]
        bounds = self.target.boundary_basis(n)
        images = self._image_of_cycles(n)
        return _rank(bounds + images, dim, p) - len(bounds)

    def kernel_dim(self, n: int) -> int:
        return self.source.homology_dims[n] - self.rank(n)

    def is_surjective(self, n: int) -> bool:
        return self.rank(n) == self.target.homology_dims[n]

    def is_injective(self, n: int) -> bool:
        return self.kernel_dim(n) == 0

    def homology_matrix(self, n: int) -> Rows:
        """H_n(Φ) in the homology bases of both cones."""
        p, dim = self.source.p, self.target.dims[n]
        bounds = self.target.boundary_basis(n)
        reps = self.target.homology_basis(n)
        src_reps = self.source.homology_basis(n)
        if not reps:
            return []
        if not src_reps:
            return [[] for _ in reps]
        basis = from_columns(bounds + reps, dim)
        m = self.matrix(n)
        images = [[sum(r[j] * z[j] for j in range(len(z))) % p for r in m] for z in src_reps]
        x = solve_mod_p(basis, from_columns(images, dim), p, len(bounds) + len(reps))
        if x is None:
            raise LiftFailure("cycle image is not a cycle in degree %d" % n)
        return x[len(bounds) :]


def lift_chain_map(f: AbHom, source: CoeffComplex, target: CoeffComplex) -> ConeMap:
    """
    Lift a coefficient map intertwining the two actions to a map of Wang cones.

    φ lifts f through the resolutions; h satisfies τ'φ - φτ = d'h + hd and the
    cone map is (x, y) -> (φx + hy, φy).

    :raises ShapeMismatch: when source/target complexes use different p or nmax
    :raises LiftFailure: when f does not intertwine the actions
    """
    if source.p != target.p or source.nmax != target.nmax:
        raise ShapeMismatch("complexes differ in p or nmax")
    p, nmax = source.p, source.nmax
    f_p = target.projection.compose(f.compose(source.inclusion))
    a = AbHom.build(source.primary, source.primary, source.primary.action_matrix())
    a2 = AbHom.build(target.primary, target.primary, target.primary.action_matrix())
    if f_p.compose(a).matrix != a2.compose(f_p).matrix:
        raise LiftFailure("coefficient map does not intertwine the actions")
    fa = f_p.compose(a)
    res, res2 = source.resolution, target.resolution
    phi = _lift(res, res2, f_p, nmax)
    homotopies: List[Dict[Word, Element]] = []
    for n in range(nmax):
        level: Dict[Word, Element] = {}
        for k in res.basis(n):
            e = {(res.zero, k): 1}
            lhs = _semilinear(target.tau_lifts[n], phi[n][k], a2, res2)
            rhs = _semilinear(phi[n], source.tau_lifts[n][k], f_p, res2)
            diff = dict(lhs)
            for key, c in rhs.items():
                _add(diff, key, -c)
            if n:
                for key, c in _semilinear(homotopies[n - 1], res.apply_differential(e), fa, res2).items():
                    _add(diff, key, -c)
            level[k] = res2.homotopy(diff)
            if res2.apply_differential(level[k]) != diff:
                raise LiftFailure("homotopy identity fails in degree %d" % n)
        homotopies.append(level)
    src_cone, tgt_cone = wang_cone_homology(source), wang_cone_homology(target)
    matrices = []
    for n in range(nmax + 1):
        phi_n = _matrix(phi[n], res, res2, n, n, p)
        if n:
            phi_m = _matrix(phi[n - 1], res, res2, n - 1, n - 1, p)
            h_m = _matrix(homotopies[n - 1], res, res2, n - 1, n, p)
        else:
            phi_m, h_m = [], []
        rows = _block(
            [
                [phi_n, h_m or zeros(target.dim(n), source.dim(n - 1))],
                [zeros(target.dim(n - 1), source.dim(n)), phi_m or zeros(target.dim(n - 1), source.dim(n - 1))],
            ],
            [target.dim(n), target.dim(n - 1)],
            [source.dim(n), source.dim(n - 1)],
        )
        matrices.append(_freeze(rows))
    return ConeMap(src_cone, tgt_cone, tuple(matrices))


def induced_h2_rank(f: AbHom, p: int, nmax: int = 2, budget: int = CHAIN_BUDGET) -> Tuple[int, int, int]:
    """(dim H_2 source, dim H_2 target, rank of H_2(f)) on the chain route."""
    src = equivariant_resolution(f.source, p, nmax, budget)
    tgt = equivariant_resolution(f.target, p, nmax, budget)
    cone = lift_chain_map(f, src, tgt)
    return cone.source.homology_dims[2], cone.target.homology_dims[2], cone.rank(2)

