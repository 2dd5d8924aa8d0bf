"""
Exact linear algebra over Z, Q, Z/p and the chain rings Z/p^N.

Matrices are stored as tuples of integer rows. Smith normal forms, Hermite
bases of lattices and the Z/p elimination routines are written directly on
Python integers; rational characteristic polynomials and rational null spaces
go through sympy.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import sympy

from . import utils
from .errors import SingularMatrix

logger = utils.get_logger(__name__)

Rows = List[List[int]]


@dataclass(frozen=True)
class IntMatrix:
    """Integer matrix with exact entries."""

    nrows: int
    ncols: int
    entries: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: Optional[int] = None):
        rows = [tuple(int(x) for x in r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
        return cls(len(rows), ncols, tuple(rows))

    @classmethod
    def identity(cls, n: int):
        return cls.from_rows(identity(n), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int):
        return cls.from_rows([[0] * ncols for _ in range(nrows)], ncols)

    def to_list(self) -> Rows:
        return [list(r) for r in self.entries]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix.from_rows(
            mat_mul(self.to_list(), other.to_list()), other.ncols
        )

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows(transpose(self.to_list(), self.ncols), self.nrows)

    def column(self, j: int) -> List[int]:
        return [r[j] for r in self.entries]


@dataclass(frozen=True)
class ModMatrix:
    """Matrix over Z/p^N with entries reduced into [0, p^N)."""

    p: int
    precision: int
    nrows: int
    ncols: int
    entries: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[int]],
        p: int,
        precision: int = 1,
        ncols: Optional[int] = None,
    ):
        q = p**precision
        rows = [tuple(int(x) % q for x in r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        return cls(p, precision, len(rows), ncols, tuple(rows))

    @property
    def modulus(self) -> int:
        return self.p**self.precision

    def to_list(self) -> Rows:
        return [list(r) for r in self.entries]

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        return ModMatrix.from_rows(
            mat_mul(self.to_list(), other.to_list(), self.modulus),
            self.p,
            self.precision,
            other.ncols,
        )


@dataclass(frozen=True)
class SnfResult:
    """U·M·V = D with unimodular U, V and D = diag(diagonal)."""

    U: Union[IntMatrix, ModMatrix]
    V: Union[IntMatrix, ModMatrix]
    diagonal: Tuple[int, ...]
    nrows: int
    ncols: int
    modulus: Optional[int] = None

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    def diagonal_matrix(self) -> Rows:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for i, d in enumerate(self.diagonal):
            out[i][i] = d
        return out


@dataclass(frozen=True)
class KernelImage:
    kernel: Tuple[Tuple[int, ...], ...]
    image: Tuple[Tuple[int, ...], ...]
    rank: int


@dataclass(frozen=True)
class FittingResult:
    """Fitting data of b on Z^k / L0; subgroups are Hermite lattice bases."""

    exponent: int
    image: Tuple[Tuple[int, ...], ...]
    kernel: Tuple[Tuple[int, ...], ...]
    base: Tuple[Tuple[int, ...], ...]
    module_order: int
    image_order: int
    kernel_order: int
    is_direct: bool


@dataclass(frozen=True)
class CharpolyReport:
    coefficients: Tuple[sympy.Rational, ...]
    integral: bool
    inverse_coefficients: Optional[Tuple[sympy.Rational, ...]] = None
    inverse_integral: Optional[bool] = None

    def as_expr(self, inverse: bool = False):
        x = sympy.Symbol("x")
        coeffs = self.inverse_coefficients if inverse else self.coefficients
        return sympy.Poly(list(coeffs), x).as_expr()


# ---------------------------------------------------------------------------
# plain list helpers


def identity(n: int) -> Rows:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros(nrows: int, ncols: int) -> Rows:
    return [[0] * ncols for _ in range(nrows)]


def transpose(a: Rows, ncols: Optional[int] = None) -> Rows:
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def mat_mul(a: Rows, b: Rows, modulus: Optional[int] = None) -> Rows:
    if not a:
        return []
    inner = len(b)
    ncols = len(b[0]) if b else 0
    out = []
    for row in a:
        new = [0] * ncols
        for k in range(inner):
            x = row[k]
            if x:
                bk = b[k]
                for j in range(ncols):
                    if bk[j]:
                        new[j] += x * bk[j]
        if modulus is not None:
            new = [v % modulus for v in new]
        out.append(new)
    return out


def mat_vec(a: Rows, v: Sequence[int], modulus: Optional[int] = None) -> List[int]:
    out = [sum(x * y for x, y in zip(row, v)) for row in a]
    if modulus is not None:
        out = [x % modulus for x in out]
    return out


def mat_add(a: Rows, b: Rows, modulus: Optional[int] = None) -> Rows:
    out = [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
    if modulus is not None:
        out = [[x % modulus for x in r] for r in out]
    return out


def mat_scale(a: Rows, c: int) -> Rows:
    return [[c * x for x in r] for r in a]


def mat_sub_identity(a: Rows) -> Rows:
    return [[x - (1 if i == j else 0) for j, x in enumerate(r)] for i, r in enumerate(a)]


def mat_pow(a: Rows, e: int, modulus: Optional[int] = None) -> Rows:
    result = identity(len(a))
    base = [list(r) for r in a]
    while e > 0:
        if e & 1:
            result = mat_mul(result, base, modulus)
        base = mat_mul(base, base, modulus)
        e >>= 1
    return result


def block_diag(blocks: Sequence[Rows], sizes: Optional[Sequence[Tuple[int, int]]] = None) -> Rows:
    if sizes is None:
        sizes = [(len(b), len(b[0]) if b else 0) for b in blocks]
    total_r = sum(r for r, _ in sizes)
    total_c = sum(c for _, c in sizes)
    out = zeros(total_r, total_c)
    r0 = c0 = 0
    for b, (r, c) in zip(blocks, sizes):
        for i in range(r):
            for j in range(c):
                out[r0 + i][c0 + j] = b[i][j]
        r0 += r
        c0 += c
    return out


def kron(a: Rows, b: Rows, modulus: Optional[int] = None) -> Rows:
    ra, ca = len(a), len(a[0]) if a else 0
    rb, cb = len(b), len(b[0]) if b else 0
    out = zeros(ra * rb, ca * cb)
    for i in range(ra):
        for j in range(ca):
            x = a[i][j]
            if not x:
                continue
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k][j * cb + l] = x * b[k][l]
    if modulus is not None:
        out = [[v % modulus for v in r] for r in out]
    return out


def columns(a: Rows, ncols: Optional[int] = None) -> List[List[int]]:
    return transpose(a, ncols)


def from_columns(cols: Sequence[Sequence[int]], nrows: int) -> Rows:
    if not cols:
        return [[] for _ in range(nrows)]
    return [[c[i] for c in cols] for i in range(nrows)]


def determinant(a: Rows) -> int:
    if not a:
        return 1
    return int(sympy.Matrix(a).det())


def p_valuation(x: int, p: int, cap: Optional[int] = None) -> int:
    if x == 0:
        return cap if cap is not None else 10**9
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Smith normal form


def _swap_rows(a: Rows, i: int, j: int):
    a[i], a[j] = a[j], a[i]


def _swap_cols(a: Rows, i: int, j: int):
    for row in a:
        row[i], row[j] = row[j], row[i]


def _add_row(a: Rows, dst: int, src: int, c: int, modulus: Optional[int] = None):
    rs, rd = a[src], a[dst]
    for k in range(len(rd)):
        if rs[k]:
            rd[k] += c * rs[k]
            if modulus is not None:
                rd[k] %= modulus


def _add_col(a: Rows, dst: int, src: int, c: int, modulus: Optional[int] = None):
    for row in a:
        if row[src]:
            row[dst] += c * row[src]
            if modulus is not None:
                row[dst] %= modulus


def _snf_integer(m: Rows, nrows: int, ncols: int):
    a = [list(r) for r in m]
    u = identity(nrows)
    v = identity(ncols)
    t = 0
    while t < min(nrows, ncols):
        # pivot: smallest absolute value, ties by row-major position
        pos = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j] and (pos is None or abs(a[i][j]) < abs(a[pos[0]][pos[1]])):
                    pos = (i, j)
        if pos is None:
            break
        _swap_rows(a, t, pos[0])
        _swap_rows(u, t, pos[0])
        _swap_cols(a, t, pos[1])
        _swap_cols(v, t, pos[1])
        while True:
            clean = True
            for i in range(t + 1, nrows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    _add_row(a, i, t, -q)
                    _add_row(u, i, t, -q)
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, ncols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    _add_col(a, j, t, -q)
                    _add_col(v, j, t, -q)
                    if a[t][j]:
                        clean = False
            if not clean:
                best = (t, t)
                for i in range(t + 1, nrows):
                    if a[i][t] and abs(a[i][t]) < abs(a[best[0]][best[1]]):
                        best = (i, t)
                for j in range(t + 1, ncols):
                    if a[t][j] and abs(a[t][j]) < abs(a[best[0]][best[1]]):
                        best = (t, j)
                if best[0] != t:
                    _swap_rows(a, t, best[0])
                    _swap_rows(u, t, best[0])
                elif best[1] != t:
                    _swap_cols(a, t, best[1])
                    _swap_cols(v, t, best[1])
                continue
            offender = None
            for i in range(t + 1, nrows):
                for j in range(t + 1, ncols):
                    if a[i][j] % a[t][t]:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            _add_row(a, t, offender, 1)
            _add_row(u, t, offender, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    diagonal = tuple(a[i][i] for i in range(min(nrows, ncols)))
    return u, v, diagonal


def _snf_local(m: Rows, nrows: int, ncols: int, p: int, precision: int):
    q = p**precision
    a = [[x % q for x in r] for r in m]
    u = identity(nrows)
    v = identity(ncols)
    t = 0
    while t < min(nrows, ncols):
        # pivot: smallest p-valuation, ties by row-major position
        pos, best = None, precision
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j]:
                    val = p_valuation(a[i][j], p)
                    if val < best:
                        pos, best = (i, j), val
        if pos is None:
            break
        _swap_rows(a, t, pos[0])
        _swap_rows(u, t, pos[0])
        _swap_cols(a, t, pos[1])
        _swap_cols(v, t, pos[1])
        unit = a[t][t] // p**best
        inv = pow(unit, -1, q)
        a[t] = [x * inv % q for x in a[t]]
        u[t] = [x * inv % q for x in u[t]]
        pivot = p**best
        for i in range(t + 1, nrows):
            if a[i][t]:
                c = a[i][t] // pivot
                _add_row(a, i, t, -c, q)
                _add_row(u, i, t, -c, q)
        for j in range(t + 1, ncols):
            if a[t][j]:
                c = a[t][j] // pivot
                _add_col(a, j, t, -c, q)
                _add_col(v, j, t, -c, q)
        t += 1
    diagonal = tuple(a[i][i] % q for i in range(min(nrows, ncols)))
    return u, v, diagonal


def smith_normal_form(m: Union[IntMatrix, ModMatrix]) -> SnfResult:
    """
    Smith normal form with transforms.

    Over Z the diagonal is non-negative with d_1 | d_2 | ... and zeros last.
    Over Z/p^N the diagonal entries are powers p^v (v < N) followed by zeros.

    Args:
        m: IntMatrix or ModMatrix, possibly empty

    Returns:
        SnfResult with U·m·V = diag(diagonal)
    """
    rows = m.to_list()
    if isinstance(m, ModMatrix):
        u, v, diagonal = _snf_local(rows, m.nrows, m.ncols, m.p, m.precision)
        logger.debug("local SNF %dx%d mod %d: %s", m.nrows, m.ncols, m.modulus, diagonal)
        return SnfResult(
            U=ModMatrix.from_rows(u, m.p, m.precision, m.nrows),
            V=ModMatrix.from_rows(v, m.p, m.precision, m.ncols),
            diagonal=diagonal,
            nrows=m.nrows,
            ncols=m.ncols,
            modulus=m.modulus,
        )
    u, v, diagonal = _snf_integer(rows, m.nrows, m.ncols)
    logger.debug("integer SNF %dx%d: %s", m.nrows, m.ncols, diagonal)
    return SnfResult(
        U=IntMatrix.from_rows(u, m.nrows),
        V=IntMatrix.from_rows(v, m.ncols),
        diagonal=diagonal,
        nrows=m.nrows,
        ncols=m.ncols,
    )


def snf_rows(rows: Rows, nrows: int, ncols: int):
    """List-level integer SNF used by the group layer: (U, V, diagonal)."""
    return _snf_integer(rows, nrows, ncols)


def integer_kernel(a: Rows, ncols: int) -> List[List[int]]:
    """Z-basis of {x in Z^ncols : a x = 0}."""
    nrows = len(a)
    if nrows == 0:
        return identity(ncols)
    _, v, diagonal = _snf_integer(a, nrows, ncols)
    rank = sum(1 for d in diagonal if d)
    return [[v[i][j] for i in range(ncols)] for j in range(rank, ncols)]


def inverse_unimodular(a: Rows) -> Rows:
    inv = sympy.Matrix(a).inv()
    return [[int(x) for x in inv.row(i)] for i in range(inv.rows)]


# ---------------------------------------------------------------------------
# lattices


def hermite_basis(gens: Sequence[Sequence[int]], dim: int) -> List[List[int]]:
    """Canonical echelon basis (as columns) of the Z-span of ``gens`` in Z^dim.

    Pivot rows strictly increase, pivots are positive, and entries to the left
    of a pivot in its row are reduced into [0, pivot).
    """
    cols = [list(c) for c in gens if any(c)]
    pc = 0
    for r in range(dim):
        while True:
            nz = [j for j in range(pc, len(cols)) if cols[j][r]]
            if not nz:
                break
            j0 = min(nz, key=lambda j: (abs(cols[j][r]), j))
            cols[pc], cols[j0] = cols[j0], cols[pc]
            piv = cols[pc][r]
            others = [j for j in range(pc + 1, len(cols)) if cols[j][r]]
            if not others:
                break
            for j in others:
                q = cols[j][r] // piv
                cols[j] = [x - q * y for x, y in zip(cols[j], cols[pc])]
        if pc < len(cols) and cols[pc][r]:
            if cols[pc][r] < 0:
                cols[pc] = [-x for x in cols[pc]]
            piv = cols[pc][r]
            for j in range(pc):
                q = cols[j][r] // piv
                if q:
                    cols[j] = [x - q * y for x, y in zip(cols[j], cols[pc])]
            pc += 1
    return cols[:pc]


def lattice_index(basis: Sequence[Sequence[int]], dim: int) -> int:
    """Index in Z^dim of a full-rank Hermite basis; 0 when not full rank."""
    if len(basis) < dim:
        return 0
    index = 1
    for j, col in enumerate(basis):
        index *= col[j]
    return abs(index)


def coordinates(basis: Sequence[Sequence[int]], vec: Sequence[int]) -> Optional[List[int]]:
    """Integer coordinates of vec in a full-rank lower-triangular Hermite basis."""
    dim = len(vec)
    coeffs = []
    for r in range(dim):
        rest = vec[r] - sum(c * basis[j][r] for j, c in enumerate(coeffs))
        if rest % basis[r][r]:
            return None
        coeffs.append(rest // basis[r][r])
    return coeffs


def lattice_contains(basis: Sequence[Sequence[int]], vec: Sequence[int]) -> bool:
    return coordinates(basis, vec) is not None


# ---------------------------------------------------------------------------
# Z/p elimination


def rref_mod_p(rows: Sequence[Sequence[int]], p: int, ncols: Optional[int] = None):
    """Reduced row echelon form over Z/p; returns (rows, pivot columns)."""
    a = [[x % p for x in r] for r in rows]
    if ncols is None:
        ncols = len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(a)) if a[i][c]), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [x * inv % p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank_mod_p(rows: Sequence[Sequence[int]], p: int, ncols: Optional[int] = None) -> int:
    if not rows:
        return 0
    return len(rref_mod_p(rows, p, ncols)[1])


def kernel_image_mod_p(m: Union[ModMatrix, Rows], p: Optional[int] = None, ncols: Optional[int] = None) -> KernelImage:
    """
    Kernel and image of a matrix over Z/p.

    :param m: ModMatrix with precision 1, or a list of rows together with p
    :param p: prime modulus when m is a plain list
    :return: KernelImage with echelonized bases and the rank
    """
    if isinstance(m, ModMatrix):
        p, rows, ncols = m.p, m.to_list(), m.ncols
    else:
        rows = [list(r) for r in m]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
    reduced, pivots = rref_mod_p(rows, p, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    kernel = []
    for f in free:
        vec = [0] * ncols
        vec[f] = 1
        for row, pc in zip(reduced, pivots):
            vec[pc] = (-row[f]) % p
        kernel.append(tuple(vec))
    image_rows, _ = rref_mod_p(transpose(rows, ncols), p, len(rows))
    return KernelImage(
        kernel=tuple(kernel),
        image=tuple(tuple(r) for r in image_rows),
        rank=len(pivots),
    )


def solve_mod_p(a: Rows, b: Rows, p: int, ncols: Optional[int] = None) -> Optional[Rows]:
    """Solve a·x = b over Z/p (b may have several columns); None if inconsistent."""
    nrows = len(a)
    if ncols is None:
        ncols = len(a[0]) if a else 0
    nrhs = len(b[0]) if b and b[0] is not None else 0
    aug = [list(a[i]) + list(b[i]) for i in range(nrows)]
    reduced, pivots = rref_mod_p(aug, p, ncols + nrhs)
    x = zeros(ncols, nrhs)
    for row, pc in zip(reduced, pivots):
        if pc >= ncols:
            return None
        for j in range(nrhs):
            x[pc][j] = row[ncols + j]
    return x


def inverse_mod_p(a: Rows, p: int) -> Rows:
    n = len(a)
    x = solve_mod_p(a, identity(n), p, n)
    if x is None or rank_mod_p(a, p, n) < n:
        raise SingularMatrix("matrix not invertible mod %d" % p)
    return x


def subspace_basis(vectors: Sequence[Sequence[int]], p: int, dim: int) -> List[List[int]]:
    """Echelon basis of the span of vectors in (Z/p)^dim."""
    if not vectors:
        return []
    return rref_mod_p(vectors, p, dim)[0]


# ---------------------------------------------------------------------------
# Fitting decomposition over Z/p^N


def stable_fitting(b: ModMatrix, relations: Optional[IntMatrix] = None) -> FittingResult:
    """
    Fitting decomposition of b acting on Z^k / (p^N Z^k + relations).

    Returns the least n >= 1 with Im(b^n) = Im(b^(n+1)) together with Hermite
    bases of the lattices covering Im(b^n) and Ker(b^n).
    """
    k, q = b.nrows, b.modulus
    base_gens = [[q if i == j else 0 for i in range(k)] for j in range(k)]
    if relations is not None:
        base_gens += [list(c) for c in columns(relations.to_list(), relations.ncols)]
    base = hermite_basis(base_gens, k)
    module_order = lattice_index(base, k)
    bmat = b.to_list()
    for col in columns(mat_mul(bmat, from_columns(base, k)), len(base)):
        if not lattice_contains(base, col):
            raise ValueError("endomorphism does not preserve the relations")

    def image_lattice(power: Rows):
        return hermite_basis(columns(power, k) + base, k)

    bound = b.precision * max(k, 1) + 1
    power = [r[:] for r in bmat]
    current = image_lattice(power)
    n = 1
    while True:
        nxt_power = mat_mul(power, bmat, q)
        nxt = image_lattice(nxt_power)
        if lattice_index(nxt, k) == lattice_index(current, k):
            break
        power, current = nxt_power, nxt
        n += 1
        assert n <= bound, "Fitting exponent exceeded the length bound"
    image = current
    # kernel: x with b^n x in the base lattice
    stacked = [list(power[i]) + [-c[i] for c in base] for i in range(k)]
    kernel_vectors = [v[:k] for v in integer_kernel(stacked, k + len(base))]
    kernel = hermite_basis(kernel_vectors + base, k)
    image_order = module_order // lattice_index(image, k)
    kernel_order = module_order // lattice_index(kernel, k)
    total = hermite_basis(image + kernel, k)
    is_direct = image_order * kernel_order == module_order and lattice_index(total, k) == 1
    logger.debug(
        "stable_fitting k=%d mod %d: n=%d |Im|=%d |Ker|=%d", k, q, n, image_order, kernel_order
    )
    return FittingResult(
        exponent=n,
        image=tuple(tuple(c) for c in image),
        kernel=tuple(tuple(c) for c in kernel),
        base=tuple(tuple(c) for c in base),
        module_order=module_order,
        image_order=image_order,
        kernel_order=kernel_order,
        is_direct=is_direct,
    )


def fitting_projection(result: FittingResult) -> Rows:
    """Integer matrix of the projection onto Im along Ker (defined modulo the base)."""
    image = [list(c) for c in result.image]
    kernel = [list(c) for c in result.kernel]
    k = len(image[0]) if image else len(kernel[0])
    gens = from_columns(image + kernel, k)
    u, v, diagonal = _snf_integer(gens, k, len(image) + len(kernel))
    proj_cols = []
    for j in range(k):
        e = [1 if i == j else 0 for i in range(k)]
        y = mat_vec(u, e)
        c = [0] * (len(image) + len(kernel))
        for i, d in enumerate(diagonal):
            c[i] = y[i] // d
        coeffs = mat_vec(v, c)
        proj_cols.append(
            [sum(coeffs[t] * image[t][i] for t in range(len(image))) for i in range(k)]
        )
    return from_columns(proj_cols, k)


def congruent_mod_lattice(a: Rows, b: Rows, base: Sequence[Sequence[int]]) -> bool:
    k = len(a)
    diff = [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
    return all(lattice_contains(base, col) for col in columns(diff, k))


# ---------------------------------------------------------------------------
# rational matrices


def as_rational_matrix(m) -> sympy.Matrix:
    if isinstance(m, sympy.MatrixBase):
        return sympy.Matrix(m)
    if isinstance(m, IntMatrix):
        m = m.to_list()
    return sympy.Matrix([[sympy.Rational(x) for x in row] for row in m])


def _coeffs(matrix: sympy.Matrix) -> Tuple[sympy.Rational, ...]:
    x = sympy.Symbol("x")
    return tuple(sympy.Rational(c) for c in matrix.charpoly(x).all_coeffs())


def charpoly_rational(m, inverse: bool = True) -> CharpolyReport:
    """
    Characteristic polynomial over Q with integrality verdicts.

    Args:
        m: square matrix (rows of ints/Rationals, IntMatrix or sympy Matrix)
        inverse: also report the characteristic polynomial of m^-1

    Returns:
        CharpolyReport, coefficients leading first
    """
    matrix = as_rational_matrix(m)
    coeffs = _coeffs(matrix)
    integral = all(c.q == 1 for c in coeffs)
    if not inverse:
        return CharpolyReport(coefficients=coeffs, integral=integral)
    if matrix.det() == 0:
        raise SingularMatrix("characteristic polynomial of the inverse requested for a singular matrix")
    inv_coeffs = _coeffs(matrix.inv())
    return CharpolyReport(
        coefficients=coeffs,
        integral=integral,
        inverse_coefficients=inv_coeffs,
        inverse_integral=all(c.q == 1 for c in inv_coeffs),
    )


def rational_nullspace(m: sympy.Matrix) -> List[sympy.Matrix]:
    return m.nullspace()


def rational_columnspace(m: sympy.Matrix) -> List[sympy.Matrix]:
    return m.columnspace()
