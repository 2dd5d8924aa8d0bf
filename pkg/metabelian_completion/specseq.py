"""
Spectral sequences of bounded first-quadrant double complexes over Z/p.

A double complex C_{k,l} (0 <= k < width, 0 <= l < height) carries a
horizontal differential d_h of bidegree (-1, 0) and a vertical one d_v of
bidegree (0, -1) with d_h d_v + d_v d_h = 0. Filtering the total complex by
columns gives the spectral sequence with E^0 = C, d_0 = d_v and d_r of
bidegree (-r, r-1). Pages are computed directly from the filtration:

    E^r_{s,n-s} = (Z^r_s + F_{s-1}) / (D Z^{r-1}_{s+r-1} + F_{s-1}),
    Z^r_s = {x in F_s T_n : Dx in F_{s-r} T_{n-1}},

so every page comes with representatives and its differential is read off
from D. Morphisms of double complexes induce maps on every page and on total
homology, which is what the comparison checks below test.
"""

import random
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from . import utils
from .errors import MgcError, NotAMorphism, ShapeMismatch
from .linalg import (
    Rows,
    from_columns,
    inverse_mod_p,
    kernel_image_mod_p,
    mat_mul,
    mat_vec,
    rank_mod_p,
    solve_mod_p,
    subspace_basis,
    transpose,
    zeros,
)

logger = utils.get_logger(__name__)

Bidegree = Tuple[int, int]


def _is_zero(m: Rows, p: int) -> bool:
    return all(x % p == 0 for r in m for x in r)


def _equal(a: Rows, b: Rows, p: int) -> bool:
    """Entrywise equality mod p, reading absent rows and columns as zero."""
    for i in range(max(len(a), len(b))):
        ra = a[i] if i < len(a) else []
        rb = b[i] if i < len(b) else []
        for j in range(max(len(ra), len(rb))):
            x = ra[j] if j < len(ra) else 0
            y = rb[j] if j < len(rb) else 0
            if (x - y) % p:
                return False
    return True


def _shape(m: Rows) -> Tuple[int, int]:
    return len(m), len(m[0]) if m else 0


def in_region(k: int, l: int, r: int, n: int) -> bool:
    """Cells (k, l) where the comparison hypothesis is imposed on page r."""
    return (r - 1) * k <= r * (n - l)


def second_page_region(n: int, width: int, height: int) -> List[Bidegree]:
    """Cells with k <= 2(n - l) inside a width x height grid."""
    return [
        (k, l)
        for k in range(width)
        for l in range(height)  # noqa: E741
        if k <= 2 * (n - l)
    ]


@dataclass(frozen=True)
class DoubleComplex:
    """Bounded double complex over Z/p.

    ``dh[(k, l)]`` is the matrix of d_h : C_{k,l} -> C_{k-1,l} and
    ``dv[(k, l)]`` that of d_v : C_{k,l} -> C_{k,l-1}; missing entries are zero.
    """

    p: int
    width: int
    height: int
    dims: Dict[Bidegree, int]
    dh: Dict[Bidegree, Rows] = field(default_factory=dict)
    dv: Dict[Bidegree, Rows] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        p: int,
        dims: Dict[Bidegree, int],
        dh: Optional[Dict[Bidegree, Rows]] = None,
        dv: Optional[Dict[Bidegree, Rows]] = None,
        width: Optional[int] = None,
        height: Optional[int] = None,
    ) -> "DoubleComplex":
        """
        Validate shapes and the relations d_h^2 = d_v^2 = d_h d_v + d_v d_h = 0.

        :raises ShapeMismatch: a differential has the wrong shape or leaves the grid
        :raises ValueError: the differentials do not form a double complex
        """
        dims = {b: d for b, d in dims.items() if d}
        if width is None:
            width = max((k for k, _ in dims), default=-1) + 1
        if height is None:
            height = max((l for _, l in dims), default=-1) + 1
        if any(k < 0 or l < 0 or k >= width or l >= height for k, l in dims):
            raise ShapeMismatch("double complex leaves the first-quadrant grid")
        dc = cls(
            p,
            width,
            height,
            dims,
            {b: [[x % p for x in r] for r in m] for b, m in (dh or {}).items()},
            {b: [[x % p for x in r] for r in m] for b, m in (dv or {}).items()},
        )
        for (k, l), m in dc.dh.items():
            if _shape(m) != (dc.dim(k - 1, l), dc.dim(k, l)) and not _is_zero(m, p):
                raise ShapeMismatch("d_h at %s has shape %s" % ((k, l), _shape(m)))
        for (k, l), m in dc.dv.items():
            if _shape(m) != (dc.dim(k, l - 1), dc.dim(k, l)) and not _is_zero(m, p):
                raise ShapeMismatch("d_v at %s has shape %s" % ((k, l), _shape(m)))
        for k in range(width):
            for l in range(height):  # noqa: E741
                hh = mat_mul(dc.horizontal(k - 1, l), dc.horizontal(k, l), p)
                vv = mat_mul(dc.vertical(k, l - 1), dc.vertical(k, l), p)
                hv = mat_mul(dc.horizontal(k, l - 1), dc.vertical(k, l), p)
                vh = mat_mul(dc.vertical(k - 1, l), dc.horizontal(k, l), p)
                anti = _equal(hv, [[-x for x in r] for r in vh], p)
                if not (_is_zero(hh, p) and _is_zero(vv, p) and anti):
                    raise ValueError("differentials at %s do not form a double complex" % ((k, l),))
        return dc

    def dim(self, k: int, l: int) -> int:  # noqa: E741
        return self.dims.get((k, l), 0)

    def _matrix(self, table: Dict[Bidegree, Rows], k: int, l: int, tk: int, tl: int) -> Rows:  # noqa: E741
        m = table.get((k, l))
        if m is None or self.dim(tk, tl) == 0 or self.dim(k, l) == 0:
            return zeros(self.dim(tk, tl), self.dim(k, l))
        return m

    def horizontal(self, k: int, l: int) -> Rows:  # noqa: E741
        return self._matrix(self.dh, k, l, k - 1, l)

    def vertical(self, k: int, l: int) -> Rows:  # noqa: E741
        return self._matrix(self.dv, k, l, k, l - 1)

    @property
    def top_degree(self) -> int:
        return self.width + self.height - 2

    def cells(self) -> Iterable[Bidegree]:
        for k in range(self.width):
            for l in range(self.height):  # noqa: E741
                yield k, l

    def blocks(self, n: int) -> List[Tuple[int, int, int]]:
        """(column k, offset, dimension) of the summands of the total degree n."""
        out = []
        offset = 0
        for k in range(max(0, n - self.height + 1), min(n, self.width - 1) + 1):
            d = self.dim(k, n - k)
            out.append((k, offset, d))
            offset += d
        return out

    def total_dim(self, n: int) -> int:
        return sum(d for _, _, d in self.blocks(n))

    def filtration_indices(self, n: int, s: int) -> List[int]:
        """Coordinates of F_s T_n, the columns k <= s."""
        return [off + i for k, off, d in self.blocks(n) if k <= s for i in range(d)]

    def total_differential(self, n: int) -> Rows:
        """D = d_h + d_v : T_n -> T_{n-1}."""
        out = zeros(self.total_dim(n - 1), self.total_dim(n))
        target = {k: off for k, off, _ in self.blocks(n - 1)}
        for k, off, d in self.blocks(n):
            l = n - k  # noqa: E741
            pieces = []
            if k - 1 in target:
                pieces.append((target[k - 1], self.horizontal(k, l)))
            if l - 1 >= 0 and k in target:
                pieces.append((target[k], self.vertical(k, l)))
            for row0, m in pieces:
                for i, row in enumerate(m):
                    for j, x in enumerate(row):
                        if x:
                            out[row0 + i][off + j] = (out[row0 + i][off + j] + x) % self.p
        return out

    def homology_dims(self) -> Dict[int, int]:
        """Total homology by brute force: dim T_n - rank D_n - rank D_{n+1}."""
        ranks = {}
        for n in range(self.top_degree + 2):
            d = self.total_differential(n)
            ranks[n] = rank_mod_p(d, self.p, self.total_dim(n)) if d else 0
        return {
            n: self.total_dim(n) - ranks[n] - ranks[n + 1]
            for n in range(self.top_degree + 1)
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "width": self.width,
            "height": self.height,
            "dims": {"%d,%d" % b: d for b, d in sorted(self.dims.items())},
        }


# ---------------------------------------------------------------------------
# page computation


def _units(indices: Sequence[int], dim: int) -> List[List[int]]:
    return [[1 if i == j else 0 for i in range(dim)] for j in indices]


def _extend(base: List[List[int]], candidates: Sequence[Sequence[int]], p: int, dim: int) -> List[List[int]]:
    """Vectors among candidates completing a basis of span(base) to one of span(base + candidates)."""
    chosen: List[List[int]] = []
    rank = rank_mod_p(base, p, dim) if base else 0
    for c in candidates:
        if rank_mod_p(base + chosen + [list(c)], p, dim) > rank:
            chosen.append(list(c))
            rank += 1
    return chosen


def _coefficients(cols: Sequence[Sequence[int]], vec: Sequence[int], p: int, dim: int) -> Optional[List[int]]:
    if dim == 0:
        return [0] * len(cols)
    if not cols:
        return [] if all(x % p == 0 for x in vec) else None
    x = solve_mod_p(from_columns(cols, dim), [[v] for v in vec], p, len(cols))
    if x is None:
        return None
    return [row[0] for row in x]


def _cycles_to_depth(dc: DoubleComplex, r: int, s: int, n: int) -> List[List[int]]:
    """Basis of Z^r_s in T_n."""
    dim = dc.total_dim(n)
    support = dc.filtration_indices(n, s)
    if not support:
        return []
    allowed = set(dc.filtration_indices(n - 1, s - r))
    rows = [i for i in range(dc.total_dim(n - 1)) if i not in allowed]
    if not rows:
        return _units(support, dim)
    d = dc.total_differential(n)
    sub = [[d[i][j] for j in support] for i in rows]
    out = []
    for vec in kernel_image_mod_p(sub, dc.p, len(support)).kernel:
        full = [0] * dim
        for j, x in zip(support, vec):
            full[j] = x
        out.append(full)
    return out


@dataclass
class _PageCell:
    n: int
    dim: int
    representatives: List[List[int]]
    denominator: List[List[int]]

    def coordinates(self, vec: Sequence[int], p: int) -> Optional[List[int]]:
        coefs = _coefficients(self.representatives + self.denominator, vec, p, self.dim)
        if coefs is None:
            return None
        return coefs[: len(self.representatives)]


def _page_cell(dc: DoubleComplex, r: int, k: int, l: int) -> _PageCell:  # noqa: E741
    n, p = k + l, dc.p
    dim = dc.total_dim(n)
    lower = _units(dc.filtration_indices(n, k - 1), dim)
    # representatives must be genuine Z^r_s cycles, not cycles modulo F_{s-1}
    cycles = _cycles_to_depth(dc, r, k, n)
    d_up = dc.total_differential(n + 1)
    boundaries = [mat_vec(d_up, z, p) for z in _cycles_to_depth(dc, r - 1, k + r - 1, n + 1)]
    denominator = subspace_basis(boundaries + lower, p, dim)
    return _PageCell(n, dim, _extend(denominator, cycles, p, dim), denominator)


def _page_data(dc: DoubleComplex, r: int) -> Dict[Bidegree, _PageCell]:
    return {(k, l): _page_cell(dc, r, k, l) for k, l in dc.cells()}


def _page_differential(dc: DoubleComplex, data: Dict[Bidegree, _PageCell], r: int, k: int, l: int) -> Rows:  # noqa: E741
    source = data[(k, l)]
    target = data.get((k - r, l + r - 1))
    ncols = len(source.representatives)
    if target is None:
        return zeros(0, ncols)
    out = zeros(len(target.representatives), ncols)
    if not ncols or not target.representatives:
        return out
    d = dc.total_differential(source.n)
    for j, x in enumerate(source.representatives):
        coefs = target.coordinates(mat_vec(d, x, dc.p), dc.p)
        if coefs is None:
            raise MgcError("page differential d_%d at %s left its target" % (r, (k, l)))
        for i, c in enumerate(coefs):
            out[i][j] = c
    return out


@dataclass(frozen=True)
class SpectralPage:
    """Page E^r with its differential d_r keyed by source cell."""

    r: int
    dims: Dict[Bidegree, int]
    differentials: Dict[Bidegree, Rows]

    def dim(self, k: int, l: int) -> int:  # noqa: E741
        return self.dims.get((k, l), 0)

    def total(self, n: int) -> int:
        return sum(d for (k, l), d in self.dims.items() if k + l == n)

    def to_dict(self) -> Dict[str, Any]:
        return {"r": self.r, "dims": {"%d,%d" % b: d for b, d in sorted(self.dims.items()) if d}}


@dataclass(frozen=True)
class Abutment:
    """Total homology with the dimensions of F_s H_n for s = 0 .. width-1."""

    dims: Dict[int, int]
    filtration: Dict[int, Tuple[int, ...]]

    def graded(self, n: int) -> List[int]:
        steps = (0,) + self.filtration[n]
        return [b - a for a, b in zip(steps, steps[1:])]


@dataclass(frozen=True)
class SpectralSequence:
    complex: DoubleComplex
    pages: List[SpectralPage]
    infinity: SpectralPage
    abutment: Abutment
    squares_zero: bool
    pages_consistent: bool
    converged: bool

    @property
    def checks_passed(self) -> bool:
        return self.squares_zero and self.pages_consistent and self.converged

    def page(self, r: int) -> SpectralPage:
        return self.pages[r]


def _make_page(dc: DoubleComplex, r: int) -> SpectralPage:
    data = _page_data(dc, r)
    return SpectralPage(
        r,
        {b: len(c.representatives) for b, c in data.items()},
        {(k, l): _page_differential(dc, data, r, k, l) for k, l in data},
    )


def _abutment(dc: DoubleComplex) -> Abutment:
    p = dc.p
    dims = dc.homology_dims()
    filtration = {}
    for n in range(dc.top_degree + 1):
        dim = dc.total_dim(n)
        d_up = dc.total_differential(n + 1)
        boundaries = subspace_basis(
            [list(c) for c in transpose(d_up, dc.total_dim(n + 1))], p, dim
        ) if dim else []
        steps = []
        for s in range(dc.width):
            cycles = _cycles_to_depth(dc, s + 1, s, n)
            steps.append(len(subspace_basis(cycles + boundaries, p, dim)) - len(boundaries) if dim else 0)
        filtration[n] = tuple(steps)
    return Abutment(dims, filtration)


def _squares_zero(page: SpectralPage, p: int) -> bool:
    r = page.r
    for (k, l), d in page.differentials.items():
        after = page.differentials.get((k - r, l + r - 1))
        if after is None or not d or not after:
            continue
        if not _is_zero(mat_mul(after, d, p), p):
            return False
    return True


def _next_page_dims(page: SpectralPage, p: int) -> Dict[Bidegree, int]:
    r = page.r
    ranks = {
        b: rank_mod_p(d, p, len(d[0])) if d and d[0] else 0
        for b, d in page.differentials.items()
    }
    return {
        (k, l): dim - ranks.get((k, l), 0) - ranks.get((k + r, l - r + 1), 0)
        for (k, l), dim in page.dims.items()
    }


def pages_from_double_complex(dc: DoubleComplex, rmax: int) -> SpectralSequence:
    """
    Pages E^0 .. E^rmax of the column filtration together with the abutment.

    The page E^r for r = width + height + 1 serves as E^infinity; its
    total-degree sums and the filtration quotients of total homology are
    compared and the result is recorded in ``converged``.

    :param dc: bounded double complex
    :param rmax: last page to return
    :return: SpectralSequence with the consistency flags filled in
    """
    pages = [_make_page(dc, r) for r in range(rmax + 1)]
    r_inf = dc.width + dc.height + 1
    infinity = pages[r_inf] if r_inf <= rmax else _make_page(dc, r_inf)
    squares_zero = all(_squares_zero(pg, dc.p) for pg in pages)
    consistent = all(
        _next_page_dims(a, dc.p) == b.dims for a, b in zip(pages, pages[1:])
    )
    abutment = _abutment(dc)
    converged = all(
        abutment.graded(n) == [infinity.dim(s, n - s) for s in range(dc.width)]
        for n in range(dc.top_degree + 1)
    )
    if not (squares_zero and consistent and converged):
        logger.error(
            "spectral sequence checks failed: squares_zero=%s consistent=%s converged=%s",
            squares_zero,
            consistent,
            converged,
        )
    logger.debug("pages up to %d of %s", rmax, dc.to_dict()["dims"])
    return SpectralSequence(dc, pages, infinity, abutment, squares_zero, consistent, converged)


# ---------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True)
class BicomplexMorphism:
    source: DoubleComplex
    target: DoubleComplex
    maps: Dict[Bidegree, Rows]

    @classmethod
    def build(cls, source: DoubleComplex, target: DoubleComplex, maps: Dict[Bidegree, Rows]) -> "BicomplexMorphism":
        """
        :raises NotAMorphism: grids or primes differ, a component has the wrong
            shape, or the maps do not commute with d_h and d_v
        """
        p = source.p
        if (p, source.width, source.height) != (target.p, target.width, target.height):
            raise NotAMorphism("source and target live on different grids")
        f = cls(source, target, {b: [[x % p for x in r] for r in m] for b, m in maps.items()})
        for (k, l), m in f.maps.items():
            if _shape(m) != (target.dim(k, l), source.dim(k, l)) and not _is_zero(m, p):
                raise NotAMorphism("component at %s has shape %s" % ((k, l), _shape(m)))
        for k, l in source.cells():
            lhs_h = mat_mul(f.component(k - 1, l), source.horizontal(k, l), p)
            rhs_h = mat_mul(target.horizontal(k, l), f.component(k, l), p)
            lhs_v = mat_mul(f.component(k, l - 1), source.vertical(k, l), p)
            rhs_v = mat_mul(target.vertical(k, l), f.component(k, l), p)
            if not (_equal(lhs_h, rhs_h, p) and _equal(lhs_v, rhs_v, p)):
                raise NotAMorphism("maps do not commute with the differentials at %s" % ((k, l),))
        return f

    @classmethod
    def identity(cls, dc: DoubleComplex) -> "BicomplexMorphism":
        return cls.build(
            dc,
            dc,
            {b: [[1 if i == j else 0 for j in range(d)] for i in range(d)] for b, d in dc.dims.items()},
        )

    def component(self, k: int, l: int) -> Rows:  # noqa: E741
        m = self.maps.get((k, l))
        if m is None or not self.source.dim(k, l) or not self.target.dim(k, l):
            return zeros(self.target.dim(k, l), self.source.dim(k, l))
        return m

    def total(self, n: int) -> Rows:
        out = zeros(self.target.total_dim(n), self.source.total_dim(n))
        target = {k: off for k, off, _ in self.target.blocks(n)}
        for k, off, _ in self.source.blocks(n):
            for i, row in enumerate(self.component(k, n - k)):
                for j, x in enumerate(row):
                    out[target[k] + i][off + j] = x
        return out


def _page_map(f: BicomplexMorphism, src: Dict[Bidegree, _PageCell], tgt: Dict[Bidegree, _PageCell], k: int, l: int) -> Rows:  # noqa: E741
    a, b = src[(k, l)], tgt[(k, l)]
    out = zeros(len(b.representatives), len(a.representatives))
    if not a.representatives or not b.representatives:
        return out
    total = f.total(a.n)
    for j, x in enumerate(a.representatives):
        coefs = b.coordinates(mat_vec(total, x, f.source.p), f.source.p)
        if coefs is None:
            raise NotAMorphism("map does not preserve the page filtration at %s" % ((k, l),))
        for i, c in enumerate(coefs):
            out[i][j] = c
    return out


def _is_iso(m: Rows, nrows: int, ncols: int, p: int) -> bool:
    if nrows != ncols:
        return False
    return ncols == 0 or rank_mod_p(m, p, ncols) == ncols


def page_isomorphisms(f: BicomplexMorphism, r: int) -> Dict[Bidegree, bool]:
    """Whether f^r_{k,l} is an isomorphism, for every cell of the grid."""
    src, tgt = _page_data(f.source, r), _page_data(f.target, r)
    out = {}
    for k, l in f.source.cells():
        m = _page_map(f, src, tgt, k, l)
        out[(k, l)] = _is_iso(m, len(tgt[(k, l)].representatives), len(src[(k, l)].representatives), f.source.p)
    return out


def homology_map_rank(f: BicomplexMorphism, n: int) -> int:
    """Rank of the induced map H_n -> H'_n."""
    p = f.source.p
    dim_t = f.target.total_dim(n)
    if not dim_t:
        return 0
    cycles = _cycles_to_depth(f.source, n + f.source.width + 1, f.source.width - 1, n)
    total = f.total(n)
    images = [mat_vec(total, z, p) for z in cycles]
    d_up = f.target.total_differential(n + 1)
    boundaries = subspace_basis(
        [list(c) for c in transpose(d_up, f.target.total_dim(n + 1))], p, dim_t
    )
    return len(subspace_basis(images + boundaries, p, dim_t)) - len(boundaries)


def homology_isomorphisms(f: BicomplexMorphism) -> Dict[int, bool]:
    src, tgt = f.source.homology_dims(), f.target.homology_dims()
    return {
        n: src[n] == tgt[n] and homology_map_rank(f, n) == src[n]
        for n in range(f.source.top_degree + 1)
    }


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome of checking the comparison lemma for one morphism at (r, n).

    ``violation`` is True when the hypothesis holds but some phi_m with m <= n
    fails to be an isomorphism. ``witness`` is the least degree above n where
    phi fails although the hypothesis holds.
    """

    r: int
    n: int
    hypothesis: bool
    failing_cells: Tuple[Bidegree, ...]
    iso: Dict[int, bool]
    violation: bool
    witness: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r": self.r,
            "n": self.n,
            "hypothesis": self.hypothesis,
            "failing_cells": [list(b) for b in self.failing_cells],
            "iso": {str(m): v for m, v in sorted(self.iso.items())},
            "violation": self.violation,
            "witness": self.witness,
        }


def _verdict(r: int, n: int, failing: List[Bidegree], iso: Dict[int, bool]) -> ComparisonVerdict:
    hypothesis = not failing
    violation = hypothesis and not all(v for m, v in iso.items() if m <= n)
    witness = None
    if hypothesis:
        witness = next((m for m in sorted(iso) if m > n and not iso[m]), None)
    if violation:
        logger.error("comparison lemma violated at r=%d n=%d: %s", r, n, iso)
    return ComparisonVerdict(r, n, hypothesis, tuple(failing), iso, violation, witness)


def compare_morphism(f: BicomplexMorphism, r: int, n: int) -> ComparisonVerdict:
    """
    Check the homological comparison lemma for f at page r and degree n.

    The hypothesis asks f^r_{k,l} to be an isomorphism for every (k, l) with
    (r-1)k <= r(n-l); the conclusion asks phi_m : H_m -> H'_m to be an
    isomorphism for m <= n.
    """
    pages = page_isomorphisms(f, r)
    failing = [b for b, ok in sorted(pages.items()) if in_region(b[0], b[1], r, n) and not ok]
    return _verdict(r, n, failing, homology_isomorphisms(f))


# ---------------------------------------------------------------------------
# cohomological variant


def dualize(dc: DoubleComplex) -> DoubleComplex:
    """
    The cochain bicomplex Hom(C, Z/p), reindexed so that it is homological.

    Cell (k, l) of the dual sits at (width-1-k, height-1-l); the column
    filtration of the result is the dual column filtration, so its pages are
    the cohomological pages E_r^{k,l} with d_r of bidegree (r, 1-r).
    """
    w, h = dc.width, dc.height
    dims, dh, dv = {}, {}, {}
    for k, l in dc.cells():
        kk, ll = w - 1 - k, h - 1 - l
        dims[(kk, ll)] = dc.dim(k, l)
        if k + 1 < w:
            dh[(kk, ll)] = transpose(dc.horizontal(k + 1, l), dc.dim(k + 1, l))
        if l + 1 < h:
            dv[(kk, ll)] = transpose(dc.vertical(k, l + 1), dc.dim(k, l + 1))
    return DoubleComplex.build(dc.p, dims, dh, dv, width=w, height=h)


def dualize_morphism(f: BicomplexMorphism) -> BicomplexMorphism:
    """f* : Hom(C', Z/p) -> Hom(C, Z/p) on the reindexed duals."""
    w, h = f.source.width, f.source.height
    maps = {
        (w - 1 - k, h - 1 - l): transpose(f.component(k, l), f.source.dim(k, l))
        for k, l in f.source.cells()
    }
    return BicomplexMorphism.build(dualize(f.target), dualize(f.source), maps)


def compare_morphism_cohomological(f: BicomplexMorphism, r: int, n: int) -> ComparisonVerdict:
    """Cohomological comparison lemma for the dual morphism f*.

    Cells and degrees in the verdict are cohomological: (k, l) refers to
    E_r^{k,l} and ``iso[m]`` to phi^m : H^m(C') -> H^m(C).
    """
    g = dualize_morphism(f)
    w, h = f.source.width, f.source.height
    pages = page_isomorphisms(g, r)
    failing = [
        (k, l)
        for k, l in f.source.cells()
        if in_region(k, l, r, n) and not pages[(w - 1 - k, h - 1 - l)]
    ]
    top = f.source.top_degree
    iso = {top - m: ok for m, ok in homology_isomorphisms(g).items()}
    return _verdict(r, n, failing, iso)


# ---------------------------------------------------------------------------
# random bicomplexes and morphisms


@dataclass(frozen=True)
class Cell:
    """Elementary bicomplex on one basis vector per position.

    Differential entries are (source index, target index, coefficient).
    """

    positions: Tuple[Bidegree, ...]
    dh: Tuple[Tuple[int, int, int], ...] = ()
    dv: Tuple[Tuple[int, int, int], ...] = ()

    def targets(self, i: int) -> List[int]:
        return [t for s, t, _ in self.dh + self.dv if s == i]

    def closure(self, chosen: Iterable[int]) -> Set[int]:
        """Smallest set containing chosen and closed under the differentials."""
        out = set(chosen)
        todo = list(out)
        while todo:
            for t in self.targets(todo.pop()):
                if t not in out:
                    out.add(t)
                    todo.append(t)
        return out


def point_cell(k: int, l: int) -> Cell:  # noqa: E741
    return Cell(((k, l),))


def square_cell(k: int, l: int) -> Cell:  # noqa: E741
    """Acyclic square on (k,l), (k-1,l), (k,l-1), (k-1,l-1)."""
    return Cell(
        ((k, l), (k - 1, l), (k, l - 1), (k - 1, l - 1)),
        dh=((0, 1, 1), (2, 3, -1)),
        dv=((0, 2, 1), (1, 3, 1)),
    )


def zigzag_cell(k: int, l: int, r: int) -> Cell:  # noqa: E741
    """Staircase whose only nonzero differential is d_r from (k, l) to (k-r, l+r-1)."""
    if r == 0:
        return Cell(((k, l), (k, l - 1)), dv=((0, 1, 1),))
    positions = [(k, l)]
    dh, dv = [], []
    previous = 0
    for i in range(1, r):
        positions += [(k - i, l + i - 1), (k - i, l + i)]
        u, w = len(positions) - 2, len(positions) - 1
        dh.append((previous, u, 1))
        dv.append((w, u, -1))
        previous = w
    positions.append((k - r, l + r - 1))
    dh.append((previous, len(positions) - 1, 1))
    return Cell(tuple(positions), tuple(dh), tuple(dv))


def _fits(cell: Cell, width: int, height: int) -> bool:
    return all(0 <= k < width and 0 <= l < height for k, l in cell.positions)


def assemble(
    cells: Sequence[Cell],
    p: int,
    width: int,
    height: int,
    keep: Optional[Set[Tuple[int, int]]] = None,
) -> Tuple[DoubleComplex, Dict[Tuple[int, int], Tuple[Bidegree, int]]]:
    """
    Direct sum of cells, optionally restricted to the generators in ``keep``.

    Restricting to a downward-closed set gives a sub-bicomplex, to the
    complement of one the quotient bicomplex.

    :return: the double complex and the coordinates (bidegree, index) of
        every kept generator (cell index, generator index)
    """
    dims: Dict[Bidegree, int] = {}
    coords: Dict[Tuple[int, int], Tuple[Bidegree, int]] = {}
    for ci, cell in enumerate(cells):
        for gi, pos in enumerate(cell.positions):
            if keep is not None and (ci, gi) not in keep:
                continue
            coords[(ci, gi)] = (pos, dims.get(pos, 0))
            dims[pos] = dims.get(pos, 0) + 1
    dh: Dict[Bidegree, Rows] = {}
    dv: Dict[Bidegree, Rows] = {}
    for ci, cell in enumerate(cells):
        for table, entries in ((dh, cell.dh), (dv, cell.dv)):
            for s, t, c in entries:
                if (ci, s) not in coords or (ci, t) not in coords:
                    continue
                (src, i), (tgt, j) = coords[(ci, s)], coords[(ci, t)]
                m = table.setdefault(src, zeros(dims[tgt], dims[src]))
                m[j][i] = (m[j][i] + c) % p
    return DoubleComplex.build(p, dims, dh, dv, width=width, height=height), coords


def random_invertible(rng: random.Random, d: int, p: int) -> Rows:
    while True:
        m = [[rng.randrange(p) for _ in range(d)] for _ in range(d)]
        if d == 0 or rank_mod_p(m, p, d) == d:
            return m


def change_basis(dc: DoubleComplex, bases: Dict[Bidegree, Rows]) -> DoubleComplex:
    """Conjugate the differentials by the given invertible matrices per cell."""
    p = dc.p
    inverses = {b: inverse_mod_p(g, p) for b, g in bases.items() if g}

    def conj(m: Rows, src: Bidegree, tgt: Bidegree) -> Rows:
        if not m or not m[0]:
            return m
        return mat_mul(mat_mul(bases[tgt], m, p), inverses[src], p)

    dh = {(k, l): conj(dc.horizontal(k, l), (k, l), (k - 1, l)) for k, l in dc.dims if (k, l) in dc.dh}
    dv = {(k, l): conj(dc.vertical(k, l), (k, l), (k, l - 1)) for k, l in dc.dims if (k, l) in dc.dv}
    return DoubleComplex.build(p, dc.dims, dh, dv, width=dc.width, height=dc.height)


def random_cells(rng: random.Random, size: int, count: Optional[int] = None) -> List[Cell]:
    """Random points, squares and staircases inside a size x size grid."""
    count = count if count is not None else rng.randint(1, size + 2)
    cells: List[Cell] = []
    while len(cells) < count:
        k, l = rng.randrange(size), rng.randrange(size)  # noqa: E741
        kind = rng.choice(("point", "zigzag", "square"))
        if kind == "point":
            cell = point_cell(k, l)
        elif kind == "square":
            cell = square_cell(k, l)
        else:
            cell = zigzag_cell(k, l, rng.randint(0, 3))
        if _fits(cell, size, size):
            cells.append(cell)
    return cells


def random_double_complex(rng: random.Random, size: int, p: int) -> DoubleComplex:
    dc, _ = assemble(random_cells(rng, size), p, size, size)
    bases = {b: random_invertible(rng, d, p) for b, d in sorted(dc.dims.items())}
    return change_basis(dc, bases)


def random_morphism(rng: random.Random, size: int, p: int) -> BicomplexMorphism:
    """
    Inclusion of a random sub-bicomplex or projection onto a random quotient,
    built from a direct sum of cells, with independent random bases on both
    sides.
    """
    cells = random_cells(rng, size)
    chosen: Set[Tuple[int, int]] = set()
    for ci, cell in enumerate(cells):
        roll = rng.random()
        if roll < 0.5:
            continue
        if roll < 0.75:
            part = set(range(len(cell.positions)))
        else:
            picks = [gi for gi in range(len(cell.positions)) if rng.random() < 0.5]
            part = cell.closure(picks)
        chosen |= {(ci, gi) for gi in part}
    everything = {(ci, gi) for ci, cell in enumerate(cells) for gi in range(len(cell.positions))}
    if rng.random() < 0.5:
        src_keep, tgt_keep = chosen, everything
    else:
        src_keep, tgt_keep = everything, everything - chosen
    source, scoords = assemble(cells, p, size, size, src_keep)
    target, tcoords = assemble(cells, p, size, size, tgt_keep)
    maps = {b: zeros(target.dim(*b), d) for b, d in source.dims.items()}
    for g in src_keep & tgt_keep:
        (b, i), (_, j) = scoords[g], tcoords[g]
        maps[b][j][i] = 1
    gs = {b: random_invertible(rng, d, p) for b, d in sorted(source.dims.items())}
    hs = {b: random_invertible(rng, d, p) for b, d in sorted(target.dims.items())}
    moved = {}
    for b, m in maps.items():
        if not m or not m[0]:
            moved[b] = m
            continue
        moved[b] = mat_mul(mat_mul(hs[b], m, p), inverse_mod_p(gs[b], p), p)
    return BicomplexMorphism.build(change_basis(source, gs), change_basis(target, hs), moved)


@dataclass(frozen=True)
class FuzzReport:
    seeds: int
    size: int
    r: int
    n: int
    p: int
    attempts: int
    accepted: int
    violations: Tuple[int, ...]
    witnesses: Tuple[Tuple[int, int], ...]

    @property
    def passed(self) -> bool:
        return self.accepted == self.seeds and not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seeds": self.seeds,
            "size": self.size,
            "r": self.r,
            "n": self.n,
            "p": self.p,
            "attempts": self.attempts,
            "accepted": self.accepted,
            "violations": list(self.violations),
            "witnesses": [{"seed": s, "degree": m} for s, m in self.witnesses],
            "passed": self.passed,
        }


def fuzz_comparison(
    seeds: int = 200,
    size: int = 4,
    r: int = 2,
    n: int = 2,
    p: int = 3,
    seed: int = 0,
    max_attempts: Optional[int] = None,
) -> FuzzReport:
    """
    Run the comparison lemma on random morphisms until ``seeds`` of them
    satisfy the hypothesis at (r, n).

    Seeds seed, seed+1, ... are tried in order so every accepted case and
    witness can be reproduced from its seed alone.
    """
    cap = max_attempts if max_attempts is not None else 50 * seeds
    accepted = attempts = 0
    violations: List[int] = []
    witnesses: List[Tuple[int, int]] = []
    while accepted < seeds and attempts < cap:
        s = seed + attempts
        attempts += 1
        verdict = compare_morphism(random_morphism(random.Random(s), size, p), r, n)
        if not verdict.hypothesis:
            continue
        accepted += 1
        if verdict.violation:
            violations.append(s)
        if verdict.witness is not None:
            witnesses.append((s, verdict.witness))
            logger.debug("seed %d: phi_%d fails outside the region", s, verdict.witness)
    if accepted < seeds:
        logger.warning("only %d of %d seeds satisfied the hypothesis", accepted, seeds)
    return FuzzReport(seeds, size, r, n, p, attempts, accepted, tuple(violations), tuple(witnesses))


__all__ = [
    "Abutment",
    "BicomplexMorphism",
    "Cell",
    "ComparisonVerdict",
    "DoubleComplex",
    "FuzzReport",
    "SpectralPage",
    "SpectralSequence",
    "assemble",
    "change_basis",
    "compare_morphism",
    "compare_morphism_cohomological",
    "dualize",
    "dualize_morphism",
    "fuzz_comparison",
    "homology_isomorphisms",
    "homology_map_rank",
    "in_region",
    "page_isomorphisms",
    "pages_from_double_complex",
    "point_cell",
    "random_double_complex",
    "random_morphism",
    "second_page_region",
    "square_cell",
    "zigzag_cell",
]
