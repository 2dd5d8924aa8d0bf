"""
H_*(A, Z/p) for abelian groups with a t-action, through the model

    H_n(A, Z/p) = ⊕_{a + 2b = n} Λ^a(A/p) ⊗ Γ^b(_pA)

together with induced maps, the two-column assembly for A ⋊ C and the H_2
certificates coming from Λ²(A/p) ↣ H_2(A, Z/p) ↠ _pA.
"""

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .. import utils
from ..abgrp import AbHom, FgAbGroup, action_slices, induced_on_slices
from ..errors import NotAnAutomorphism, ShapeMismatch, UnsupportedAtTwo
from ..linalg import (
    Rows,
    determinant,
    identity,
    kernel_image_mod_p,
    kron,
    mat_mul,
    mat_sub_identity,
    rank_mod_p,
    solve_mod_p,
    transpose,
    zeros,
)

logger = utils.get_logger(__name__)

# (exterior word, divided-power word)
Label = Tuple[Tuple[int, ...], Tuple[int, ...]]
Matrix = Tuple[Tuple[int, ...], ...]

SECTION_SEARCH_LIMIT = 4096


def _freeze(rows: Rows) -> Matrix:
    return tuple(tuple(r) for r in rows)


def _rows(m: Sequence[Sequence[int]]) -> Rows:
    return [list(r) for r in m]


def exterior_basis(dim: int, a: int) -> List[Tuple[int, ...]]:
    return list(combinations(range(dim), a))


def divided_basis(dim: int, b: int) -> List[Tuple[int, ...]]:
    return list(combinations_with_replacement(range(dim), b))


def _gamma_dim(w_dim: int, b: int) -> int:
    # Γ^0 is the ground field even when W = 0
    return comb(w_dim + b - 1, b) if b else 1


def degree_blocks(v_dim: int, w_dim: int, n: int) -> List[Tuple[int, int]]:
    """The (a, b) with a + 2b = n contributing to H_n."""
    return [(n - 2 * b, b) for b in range(n // 2 + 1) if n - 2 * b <= v_dim and (b == 0 or w_dim)]


def lambda_gamma_dim(v_dim: int, w_dim: int, n: int) -> int:
    return sum(comb(v_dim, a) * _gamma_dim(w_dim, b) for a, b in degree_blocks(v_dim, w_dim, n))


def exterior_power(f: Sequence[Sequence[int]], a: int, p: int, src: int, tgt: int) -> Rows:
    """Λ^a(f) on the basis of increasing words; entries are a x a minors."""
    rows_b, cols_b = exterior_basis(tgt, a), exterior_basis(src, a)
    out = zeros(len(rows_b), len(cols_b))
    for j, s in enumerate(cols_b):
        for i, t in enumerate(rows_b):
            if a == 0:
                out[i][j] = 1
                continue
            minor = [[f[r][c] for c in s] for r in t]
            out[i][j] = determinant(minor) % p
    return out


def symmetric_power(g: Sequence[Sequence[int]], k: int, p: int, src: int, tgt: int) -> Rows:
    """Sym^k(g) on monomials (sorted index words), expanded over Z then reduced."""
    rows_b, cols_b = divided_basis(tgt, k), divided_basis(src, k)
    index = {m: i for i, m in enumerate(rows_b)}
    out = zeros(len(rows_b), len(cols_b))
    for j, word in enumerate(cols_b):
        poly: Dict[Tuple[int, ...], int] = {(): 1}
        for x in word:
            nxt: Dict[Tuple[int, ...], int] = {}
            for mono, c in poly.items():
                for i in range(tgt):
                    if g[i][x] % p:
                        key = tuple(sorted(mono + (i,)))
                        nxt[key] = (nxt.get(key, 0) + c * g[i][x]) % p
            poly = nxt
        for mono, c in poly.items():
            out[index[mono]][j] = c % p
    return out


def divided_power(f: Sequence[Sequence[int]], b: int, p: int, src: int, tgt: int) -> Rows:
    """Γ^b(f), the transpose of Sym^b(f^T) in the dual monomial bases."""
    ft = transpose(_rows(f), src) if tgt else [[] for _ in range(src)]
    return transpose(symmetric_power(ft, b, p, tgt, src), len(divided_basis(tgt, b)))


def _degree_map(
    f_v: Sequence[Sequence[int]],
    f_w: Sequence[Sequence[int]],
    n: int,
    p: int,
    src: Tuple[int, int],
    tgt: Tuple[int, int],
) -> Rows:
    src_blocks = degree_blocks(src[0], src[1], n)
    tgt_blocks = degree_blocks(tgt[0], tgt[1], n)
    src_dim = lambda_gamma_dim(src[0], src[1], n)
    tgt_dim = lambda_gamma_dim(tgt[0], tgt[1], n)
    out = zeros(tgt_dim, src_dim)
    c0 = 0
    for a, b in src_blocks:
        width = comb(src[0], a) * _gamma_dim(src[1], b)
        r0 = 0
        for a2, b2 in tgt_blocks:
            height = comb(tgt[0], a2) * _gamma_dim(tgt[1], b2)
            if (a2, b2) == (a, b):
                block = kron(
                    exterior_power(f_v, a, p, src[0], tgt[0]),
                    divided_power(f_w, b, p, src[1], tgt[1]),
                    p,
                )
                for i in range(height):
                    for j in range(width):
                        out[r0 + i][c0 + j] = block[i][j]
            r0 += height
        c0 += width
    return out


@dataclass(frozen=True)
class GradedCModule:
    """H_0..H_nmax over Z/p with the action of t in every degree."""

    p: int
    nmax: int
    v_dim: int
    w_dim: int
    v_action: Matrix
    w_action: Matrix
    actions: Tuple[Matrix, ...]
    labels: Tuple[Tuple[Label, ...], ...]

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(len(lab) for lab in self.labels)

    def dim(self, n: int) -> int:
        return self.dims[n] if 0 <= n <= self.nmax else 0

    def action(self, n: int) -> Rows:
        return _rows(self.actions[n])

    @property
    def d_p(self) -> int:
        return self.v_dim

    def bound_holds(self) -> bool:
        """dim H_n <= (n+1)^(D_p - 1) in every computed degree."""
        return all(d * (n + 1) <= (n + 1) ** self.d_p for n, d in enumerate(self.dims))

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "dims": list(self.dims), "v_dim": self.v_dim, "w_dim": self.w_dim}


def _labels(v_dim: int, w_dim: int, n: int) -> Tuple[Label, ...]:
    out = []
    for a, b in degree_blocks(v_dim, w_dim, n):
        for s in exterior_basis(v_dim, a):
            for m in divided_basis(w_dim, b):
                out.append((s, m))
    return tuple(out)


def homology_lambda_gamma(
    v_action: Sequence[Sequence[int]],
    w_action: Sequence[Sequence[int]],
    p: int,
    nmax: int,
    v_dim: Optional[int] = None,
    w_dim: Optional[int] = None,
) -> GradedCModule:
    """
    Args:
        v_action: action of t on V = A/p
        w_action: action of t on W = _pA
        p: prime
        nmax: top degree
        v_dim, w_dim: slice dimensions (needed only when a slice is empty)

    Returns:
        GradedCModule with H_n = ⊕ Λ^a(V) ⊗ Γ^b(W)

    Raises:
        UnsupportedAtTwo: p = 2 with W != 0
    """
    dv = len(v_action) if v_dim is None else v_dim
    dw = len(w_action) if w_dim is None else w_dim
    if p == 2 and dw:
        raise UnsupportedAtTwo("Λ⊗Γ model is not used at p = 2 with 2-torsion coefficients")
    for name, m, d in (("V", v_action, dv), ("W", w_action, dw)):
        if len(m) != d or any(len(r) != d for r in m):
            raise ShapeMismatch("%s action has the wrong shape" % name)
        if d and rank_mod_p(_rows(m), p, d) < d:
            raise NotAnAutomorphism("t is not invertible on %s" % name)
    actions = tuple(
        _freeze(_degree_map(v_action, w_action, n, p, (dv, dw), (dv, dw))) for n in range(nmax + 1)
    )
    labels = tuple(_labels(dv, dw, n) for n in range(nmax + 1))
    graded = GradedCModule(
        p=p,
        nmax=nmax,
        v_dim=dv,
        w_dim=dw,
        v_action=_freeze([[x % p for x in r] for r in v_action]),
        w_action=_freeze([[x % p for x in r] for r in w_action]),
        actions=actions,
        labels=labels,
    )
    logger.debug("Λ⊗Γ homology p=%d V=%d W=%d: %s", p, dv, dw, graded.dims)
    return graded


def homology_of_group(group: FgAbGroup, p: int, nmax: int) -> GradedCModule:
    """H_*(A, Z/p) of a group with action, read off its two slices."""
    slices = action_slices(group, p)
    dv = sum(1 for d in group.orders if d == 0 or d % p == 0)
    dw = sum(1 for d in group.torsion if d % p == 0)
    return homology_lambda_gamma(slices.quotient, slices.torsion, p, nmax, dv, dw)


@dataclass(frozen=True)
class GradedMap:
    p: int
    source_dims: Tuple[int, ...]
    target_dims: Tuple[int, ...]
    matrices: Tuple[Matrix, ...]

    def matrix(self, n: int) -> Rows:
        return _rows(self.matrices[n])

    def rank(self, n: int) -> int:
        return rank_mod_p(self.matrix(n), self.p, self.source_dims[n]) if self.target_dims[n] else 0

    def is_surjective(self, n: int) -> bool:
        return self.rank(n) == self.target_dims[n]

    def is_injective(self, n: int) -> bool:
        return self.rank(n) == self.source_dims[n]

    def kernel_dim(self, n: int) -> int:
        return self.source_dims[n] - self.rank(n)

    def compose(self, first: "GradedMap") -> "GradedMap":
        """self ∘ first."""
        if first.target_dims != self.source_dims:
            raise ShapeMismatch("graded maps are not composable")
        matrices = []
        for n in range(len(self.matrices)):
            if not self.target_dims[n]:
                matrices.append(())
            elif not self.source_dims[n]:
                matrices.append(_freeze(zeros(self.target_dims[n], first.source_dims[n])))
            else:
                matrices.append(_freeze(mat_mul(self.matrix(n), first.matrix(n), self.p)))
        return GradedMap(self.p, first.source_dims, self.target_dims, tuple(matrices))


def induced_map(
    f_v: Sequence[Sequence[int]],
    f_w: Sequence[Sequence[int]],
    source: GradedCModule,
    target: GradedCModule,
) -> GradedMap:
    """
    The map H_*(A) -> H_*(B) induced by slice maps A/p -> B/p and _pA -> _pB.

    :raises ShapeMismatch: when the slice maps do not fit source and target
    """
    if source.p != target.p or source.nmax != target.nmax:
        raise ShapeMismatch("source and target use different p or nmax")
    for name, f, src, tgt in (
        ("V", f_v, source.v_dim, target.v_dim),
        ("W", f_w, source.w_dim, target.w_dim),
    ):
        if len(f) != tgt or any(len(r) != src for r in f):
            raise ShapeMismatch("%s slice map must be %d x %d" % (name, tgt, src))
    p = source.p
    f_v = [[x % p for x in r] for r in f_v]
    f_w = [[x % p for x in r] for r in f_w]
    matrices = tuple(
        _freeze(_degree_map(f_v, f_w, n, p, (source.v_dim, source.w_dim), (target.v_dim, target.w_dim)))
        for n in range(source.nmax + 1)
    )
    return GradedMap(p, source.dims, target.dims, matrices)


def induced_map_of(f: AbHom, source: GradedCModule, target: GradedCModule) -> GradedMap:
    slices = induced_on_slices(f, source.p)
    return induced_map(slices.quotient, slices.torsion, source, target)


def intertwines(f: GradedMap, source: GradedCModule, target: GradedCModule) -> bool:
    p = source.p
    for n in range(source.nmax + 1):
        if not source.dims[n] or not target.dims[n]:
            continue
        lhs = mat_mul(f.matrix(n), source.action(n), p)
        rhs = mat_mul(target.action(n), f.matrix(n), p)
        if lhs != rhs:
            return False
    return True


# ---------------------------------------------------------------------------
# two-column assembly


@dataclass(frozen=True)
class ComparisonReport:
    left_surjective: Tuple[bool, ...]
    right_surjective: Tuple[bool, ...]
    middle_surjective: Tuple[Optional[bool], ...]
    split: Tuple[Optional[bool], ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "left_surjective": list(self.left_surjective),
            "right_surjective": list(self.right_surjective),
            "middle_surjective": list(self.middle_surjective),
            "split": list(self.split),
        }


@dataclass(frozen=True)
class TwoColumnReport:
    """dim H_n(M ⋊ C) = dim H_0(C, H_n(M)) + dim H_1(C, H_{n-1}(M))."""

    p: int
    coinvariants: Tuple[int, ...]
    invariants: Tuple[int, ...]
    totals: Tuple[int, ...]
    comparison: Optional[ComparisonReport] = None

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "p": self.p,
            "coinvariants": list(self.coinvariants),
            "invariants": list(self.invariants),
            "totals": list(self.totals),
        }
        if self.comparison is not None:
            out["comparison"] = self.comparison.to_dict()
        return out


def _fixed_rank(h: GradedCModule, n: int) -> int:
    d = h.dim(n)
    return rank_mod_p(mat_sub_identity(h.action(n)), h.p, d) if d else 0


def _fixed_basis(h: GradedCModule, n: int) -> List[List[int]]:
    d = h.dim(n)
    if not d:
        return []
    return [list(v) for v in kernel_image_mod_p(mat_sub_identity(h.action(n)), h.p, d).kernel]


def _left_surjective(f: GradedMap, target: GradedCModule, n: int) -> bool:
    d = target.dim(n)
    if not d:
        return True
    t_minus = mat_sub_identity(target.action(n))
    f_n = f.matrix(n) if f.source_dims[n] else [[] for _ in range(d)]
    stacked = [list(f_n[i]) + list(t_minus[i]) for i in range(d)]
    return rank_mod_p(stacked, target.p, len(stacked[0])) == d


def _right_surjective(f: GradedMap, source: GradedCModule, target: GradedCModule, n: int) -> bool:
    if n == 0:
        return True
    wanted = target.dim(n - 1) - _fixed_rank(target, n - 1)
    if not wanted:
        return True
    basis = _fixed_basis(source, n - 1)
    if not basis:
        return False
    images = [[sum(r[j] * v[j] for j in range(len(v))) % source.p for r in f.matrix(n - 1)] for v in basis]
    return rank_mod_p(images, source.p, target.dim(n - 1)) == wanted


def equivariant_section(
    f: Sequence[Sequence[int]],
    t_source: Sequence[Sequence[int]],
    t_target: Sequence[Sequence[int]],
    p: int,
) -> Optional[Rows]:
    """
    A matrix s with f s = id and t_source s = s t_target over Z/p, or None.

    Unknowns are vec(s) in column-major order: vec(A X B) = (B^T ⊗ A) vec(X).
    """
    d_src, d_tgt = len(t_source), len(t_target)
    if d_tgt == 0:
        return [[] for _ in range(d_src)]
    if d_src == 0:
        return None
    f_rows, ts, tt = _rows(f), _rows(t_source), _rows(t_target)
    eq_section = kron(identity(d_tgt), f_rows, p)
    commute = [
        [(x - y) % p for x, y in zip(r1, r2)]
        for r1, r2 in zip(kron(identity(d_tgt), ts, p), kron(transpose(tt, d_tgt), identity(d_src), p))
    ]
    system = eq_section + commute
    rhs = [[1 if i == j else 0] for j in range(d_tgt) for i in range(d_tgt)] + [[0] for _ in commute]
    x = solve_mod_p(system, rhs, p, d_src * d_tgt)
    if x is None:
        return None
    return [[x[j * d_src + i][0] for j in range(d_tgt)] for i in range(d_src)]


def two_column_semidirect(
    h: GradedCModule,
    comparison: Optional[GradedMap] = None,
    target: Optional[GradedCModule] = None,
) -> TwoColumnReport:
    """
    Assemble H_*(M ⋊ C, Z/p) from H_*(M, Z/p) with its t-action.

    With a comparison map F: H_*(M) -> H_*(M') (and target H_*(M')) the
    report also states surjectivity of the two outer maps, the four-lemma
    verdict on the middle map (True, False, or None when undetermined) and
    whether F admits a t-equivariant section in each degree.
    """
    coinv = tuple(h.dim(n) - _fixed_rank(h, n) for n in range(h.nmax + 1))
    inv = tuple(0 if n == 0 else h.dim(n - 1) - _fixed_rank(h, n - 1) for n in range(h.nmax + 1))
    totals = tuple(c + i for c, i in zip(coinv, inv))
    report = None
    if comparison is not None:
        if target is None:
            raise ShapeMismatch("a comparison map needs its target module")
        left, right, middle, split = [], [], [], []
        for n in range(h.nmax + 1):
            lsurj = _left_surjective(comparison, target, n)
            rsurj = _right_surjective(comparison, h, target, n)
            left.append(lsurj)
            right.append(rsurj)
            middle.append(True if lsurj and rsurj else (False if not rsurj else None))
            if h.dim(n) * target.dim(n) > SECTION_SEARCH_LIMIT:
                split.append(None)
            else:
                section = equivariant_section(comparison.matrix(n), h.action(n), target.action(n), h.p)
                split.append(section is not None)
        report = ComparisonReport(tuple(left), tuple(right), tuple(middle), tuple(split))
    logger.debug("two-column p=%d totals %s", h.p, totals)
    return TwoColumnReport(h.p, coinv, inv, totals, report)


# ---------------------------------------------------------------------------
# H_2 certificates


@dataclass(frozen=True)
class H2Certificate:
    h1_map: Matrix
    lambda_kernel: int
    lambda_cokernel: int
    torsion_kernel: int
    torsion_cokernel: int
    surjective: Optional[bool]
    kernel_interval: Tuple[int, int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "h1_map": [list(r) for r in self.h1_map],
            "lambda_kernel": self.lambda_kernel,
            "lambda_cokernel": self.lambda_cokernel,
            "torsion_kernel": self.torsion_kernel,
            "torsion_cokernel": self.torsion_cokernel,
            "surjective": self.surjective,
            "kernel_interval": list(self.kernel_interval),
        }


def h2_certificates(f: AbHom, p: int) -> H2Certificate:
    """
    Bounds on H_2(f, Z/p) from the natural sequence Λ²(A/p) ↣ H_2(A) ↠ _pA.

    With α on Λ², γ on _p and δ: Ker γ -> Coker α the connecting map,
    dim Ker H_2(f) = ker α + ker γ - rank δ and rank δ <= min(ker γ, coker α).
    """
    slices = induced_on_slices(f, p)
    dv = sum(1 for d in f.source.orders if d == 0 or d % p == 0)
    dv2 = sum(1 for d in f.target.orders if d == 0 or d % p == 0)
    dw = sum(1 for d in f.source.torsion if d % p == 0)
    dw2 = sum(1 for d in f.target.torsion if d % p == 0)
    lam = exterior_power(slices.quotient, 2, p, dv, dv2)
    lam_rank = rank_mod_p(lam, p, comb(dv, 2)) if lam else 0
    tor_rank = rank_mod_p(_rows(slices.torsion), p, dw) if slices.torsion else 0
    ker_a, coker_a = comb(dv, 2) - lam_rank, comb(dv2, 2) - lam_rank
    ker_g, coker_g = dw - tor_rank, dw2 - tor_rank
    if coker_a == 0 and coker_g == 0:
        surjective: Optional[bool] = True
    elif coker_g or coker_a > ker_g:
        surjective = False
    else:
        surjective = None
    interval = (ker_a + max(0, ker_g - coker_a), ker_a + ker_g)
    return H2Certificate(
        h1_map=_freeze([list(r) for r in slices.quotient]),
        lambda_kernel=ker_a,
        lambda_cokernel=coker_a,
        torsion_kernel=ker_g,
        torsion_cokernel=coker_g,
        surjective=surjective,
        kernel_interval=interval,
    )

