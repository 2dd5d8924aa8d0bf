"""
Modules over the group ring Z[C] = Z[t, t^-1] of an infinite cyclic group.

A C-module is given structurally (lattice, localized lattice, finite group,
direct sum) or, for truncation only, as a raw Laurent presentation. This
module computes the truncations

    M/MI^i,   M/MI_p^i,   M/(MI^i + p^N M)

as abelian groups with a t-action, strings them into completion towers with
stabilization reports, and splits M (x) Q along its Fitting decomposition.

Structured kinds are truncated directly on their ambient lattice Z^n: the
ideal I^i is generated by (t-1)^i and I_p^i by the p^(i-k) (t-1)^k, so the
relation lattice is spanned by the columns of the corresponding matrices.
Raw presentations go through the Kronecker route t = 1 + s over Z[s]/(s^i).
"""

from dataclasses import dataclass
from functools import reduce
from typing import Any, Dict, List, Optional, Sequence, Tuple

import sympy
from sympy import binomial, factorint, isprime

from . import utils
from .abgrp import (
    AbHom,
    FgAbGroup,
    Presentation,
    action_slices,
    divisibility_depth,
    from_relation_matrix,
    induced_on_slices,
    quotient_slice_indices,
    torsion_slice_indices,
)
from .errors import (
    DepthExceeded,
    InfiniteRank,
    NonUnitDenominator,
    NotAnAutomorphism,
    SpecFormatError,
    Unsupported,
)
from .linalg import (
    IntMatrix,
    ModMatrix,
    Rows,
    block_diag,
    charpoly_rational,
    columns,
    congruent_mod_lattice,
    coordinates,
    determinant,
    fitting_projection,
    from_columns,
    identity,
    kernel_image_mod_p,
    mat_mul,
    mat_sub_identity,
    rank_mod_p,
    rational_columnspace,
    rational_nullspace,
    snf_rows,
    solve_mod_p,
    stable_fitting,
)
from .utils import DEFAULTS, Flavor

logger = utils.get_logger(__name__)

# A Laurent polynomial as sorted (exponent, coefficient) pairs.
Laurent = Tuple[Tuple[int, int], ...]
# Ideal generators c·(t-1)^k as (c, k) pairs.
Generators = List[Tuple[int, int]]

DEPTH_CAP = DEFAULTS["depth_cap"]
PRECISION = DEFAULTS["precision"]


def _laurent(coeffs: Dict[int, int]) -> Laurent:
    return tuple(sorted((int(e), int(c)) for e, c in coeffs.items() if c))


def _strip(x: int, m: int) -> int:
    """Remove from |x| every prime dividing m."""
    x = abs(x)
    for prime in factorint(m):
        while x and x % prime == 0:
            x //= prime
    return x


def _is_smooth(x: int, m: int) -> bool:
    return x != 0 and _strip(x, m) == 1


@dataclass
class _AmbientData:
    ambient: int
    relations: List[List[int]]
    action: Rows


@dataclass(frozen=True)
class LaurentPresentation:
    """Generators e_1..e_g and relators, each a column of g Laurent polynomials."""

    generators: int
    relators: Tuple[Tuple[Laurent, ...], ...]

    def to_spec(self) -> Dict[str, Any]:
        return {
            "kind": "raw",
            "generators": self.generators,
            "relators": [[{str(e): c for e, c in poly} for poly in r] for r in self.relators],
        }


class CModule:
    """Common interface of the structured kinds and raw presentations."""

    kind = "abstract"
    structured = True

    def presentation(self) -> Optional[LaurentPresentation]:
        raise NotImplementedError

    def rational_action(self) -> sympy.Matrix:
        raise NotImplementedError

    def torsion_finite(self) -> Optional[bool]:
        return True

    def slice_bound(self, p: int) -> Optional[int]:
        raise NotImplementedError

    def ambient_data(self, gens: Generators) -> _AmbientData:
        raise NotImplementedError

    def reduction_data(self, p: int, precision: int) -> _AmbientData:
        """M/p^N M on the ambient lattice."""
        return self.ambient_data([(p**precision, 0)])

    def to_spec(self) -> Dict[str, Any]:
        raise NotImplementedError


def _generator_columns(a: Rows, gens: Generators, modulus: Optional[int] = None) -> List[List[int]]:
    n = len(a)
    step = mat_sub_identity(a)
    top = max(k for _, k in gens)
    powers = [identity(n)]
    for _ in range(top):
        powers.append(mat_mul(powers[-1], step, modulus))
    cols = []
    for c, k in gens:
        cols.extend([c * x for x in col] for col in columns(powers[k], n))
    return cols


@dataclass(frozen=True)
class LatticeModule(CModule):
    """Z^n with t acting through a ∈ GL_n(Z)."""

    matrix: Tuple[Tuple[int, ...], ...]

    kind = "lattice"

    def __post_init__(self):
        n = len(self.matrix)
        if n == 0 or any(len(r) != n for r in self.matrix):
            raise NotAnAutomorphism("lattice matrix must be square and non-empty")
        if abs(determinant(self.rows())) != 1:
            raise NotAnAutomorphism("lattice matrix is not invertible over Z")

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def rows(self) -> Rows:
        return [list(r) for r in self.matrix]

    def presentation(self) -> LaurentPresentation:
        n = self.rank
        relators = []
        for j in range(n):
            col = []
            for i in range(n):
                coeffs = {0: -self.matrix[i][j]}
                if i == j:
                    coeffs[1] = 1
                col.append(_laurent(coeffs))
            relators.append(tuple(col))
        return LaurentPresentation(n, tuple(relators))

    def rational_action(self) -> sympy.Matrix:
        return sympy.Matrix(self.rows())

    def slice_bound(self, p: int) -> int:
        return self.rank

    def ambient_data(self, gens: Generators) -> _AmbientData:
        a = self.rows()
        return _AmbientData(self.rank, _generator_columns(a, gens), a)

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": "lattice", "matrix": self.rows()}


@dataclass(frozen=True)
class LocalizedModule(CModule):
    """
    Z[1/m]^n with t acting through a matrix over Z[1/m].

    Without an explicit matrix the module is Z[1/m] with t = t_num/t_den.
    """

    m: int
    t_num: int = 1
    t_den: int = 1
    matrix: Optional[Tuple[Tuple[sympy.Rational, ...], ...]] = None

    kind = "localized"

    def __post_init__(self):
        if self.m < 1:
            raise SpecFormatError("m must be a positive integer")
        if self.t_den == 0:
            raise NonUnitDenominator("t has denominator 0")
        t = sympy.Rational(self.t_num, self.t_den)
        object.__setattr__(self, "t_num", int(t.p))
        object.__setattr__(self, "t_den", int(t.q))
        action = self.rational_action()
        if action.rows != action.cols or action.rows == 0:
            raise SpecFormatError("localized matrix must be square and non-empty")
        for q in action:
            if not _is_smooth(sympy.Rational(q).q, self.m):
                raise NonUnitDenominator("entry %s is not in Z[1/%d]" % (q, self.m))
        det = sympy.Rational(action.det())
        if not (_is_smooth(det.p, self.m) and _is_smooth(det.q, self.m)):
            raise NotAnAutomorphism("det %s is not a unit of Z[1/%d]" % (det, self.m))
        if self.rank == 1:
            for prime in factorint(self.m):
                if det.p % prime and det.q % prime:
                    raise Unsupported(
                        "Z[1/%d] is not finitely generated over Z[C] when t = %s" % (self.m, det)
                    )

    @property
    def rank(self) -> int:
        return len(self.matrix) if self.matrix is not None else 1

    def presentation(self) -> Optional[LaurentPresentation]:
        if self.matrix is not None:
            return None
        relator = _laurent({1: self.t_den, 0: -self.t_num})
        return LaurentPresentation(1, ((relator,),))

    def rational_action(self) -> sympy.Matrix:
        if self.matrix is None:
            return sympy.Matrix([[sympy.Rational(self.t_num, self.t_den)]])
        return sympy.Matrix([[sympy.Rational(x) for x in row] for row in self.matrix])

    def slice_bound(self, p: int) -> int:
        return 0 if self.m % p == 0 else self.rank

    def ambient_data(self, gens: Generators) -> _AmbientData:
        n = self.rank
        action = self.rational_action()
        step = action - sympy.eye(n)
        top = max(k for _, k in gens)
        powers = [sympy.eye(n)]
        for _ in range(top):
            powers.append(powers[-1] * step)
        cols = []
        for c, k in gens:
            for j in range(n):
                col = [sympy.Rational(c * powers[k][i, j]) for i in range(n)]
                den = reduce(sympy.ilcm, [x.q for x in col], 1)
                cols.append([int(x * den) for x in col])
        _, _, diagonal = snf_rows(from_columns(cols, n), n, len(cols))
        stripped = [_strip(d, self.m) for d in diagonal if d]
        if len(stripped) < n:
            raise InfiniteRank("quotient contains a copy of Z[1/%d]" % self.m)
        exponent = max(stripped)
        if exponent == 1:
            return _AmbientData(n, identity(n), identity(n))
        relations = [[exponent if i == j else 0 for i in range(n)] for j in range(n)]
        relations += [[x % exponent for x in col] for col in cols]
        reduced = [
            [int(q.p) * pow(int(q.q), -1, exponent) % exponent for q in action.row(i)]
            for i in range(n)
        ]
        return _AmbientData(n, relations, reduced)

    def to_spec(self) -> Dict[str, Any]:
        spec: Dict[str, Any] = {
            "kind": "localized",
            "m": self.m,
            "t_num": self.t_num,
            "t_den": self.t_den,
        }
        if self.matrix is not None:
            spec["matrix"] = [[str(x) for x in row] for row in self.matrix]
        return spec


@dataclass(frozen=True)
class FiniteModule(CModule):
    """A finite abelian group with an automorphism t."""

    group: FgAbGroup

    kind = "finite"

    def __post_init__(self):
        if self.group.rank:
            raise SpecFormatError("finite module must have no free part")
        if self.group.action is None:
            object.__setattr__(self, "group", self.group.with_action(identity(self.group.ngens)))

    @classmethod
    def from_factors(cls, factors: Sequence[int], action: Optional[Sequence[Sequence[int]]] = None):
        k = len(factors)
        factors = [int(d) for d in factors]
        if any(d < 2 for d in factors):
            raise SpecFormatError("cyclic factors must be >= 2")
        a = identity(k) if action is None else [[int(x) for x in r] for r in action]
        if len(a) != k or any(len(r) != k for r in a):
            raise NotAnAutomorphism("action matrix has the wrong shape")
        for j, d in enumerate(factors):
            for i, e in enumerate(factors):
                if (d * a[i][j]) % e:
                    raise NotAnAutomorphism("action does not respect the relations")
        rels = IntMatrix.from_rows([[d if i == j else 0 for j, d in enumerate(factors)] for i in range(k)], k)
        return cls(from_relation_matrix(k, rels, a).group)

    def presentation(self) -> LaurentPresentation:
        a, torsion = self.group.action_matrix(), self.group.torsion
        k = len(torsion)
        relators = []
        for j in range(k):
            col = []
            for i in range(k):
                coeffs = {0: -a[i][j]}
                if i == j:
                    coeffs[1] = 1
                col.append(_laurent(coeffs))
            relators.append(tuple(col))
        for j, d in enumerate(torsion):
            relators.append(tuple(_laurent({0: d}) if i == j else () for i in range(k)))
        return LaurentPresentation(k, tuple(relators))

    def rational_action(self) -> sympy.Matrix:
        return sympy.zeros(0, 0)

    def slice_bound(self, p: int) -> int:
        return sum(1 for d in self.group.torsion if d % p == 0)

    def ambient_data(self, gens: Generators) -> _AmbientData:
        torsion = self.group.torsion
        k = len(torsion)
        if k == 0:
            return _AmbientData(0, [], [])
        a = self.group.action_matrix()
        base = [[d if i == j else 0 for i in range(k)] for j, d in enumerate(torsion)]
        return _AmbientData(k, base + _generator_columns(a, gens, torsion[-1]), a)

    def to_spec(self) -> Dict[str, Any]:
        return {
            "kind": "finite",
            "factors": list(self.group.torsion),
            "action": self.group.action_matrix(),
        }


@dataclass(frozen=True)
class SumModule(CModule):
    parts: Tuple[CModule, ...]

    kind = "sum"

    def __post_init__(self):
        if not self.parts:
            raise SpecFormatError("a direct sum needs at least one part")
        if any(not part.structured for part in self.parts):
            raise SpecFormatError("raw presentations cannot be summands")

    def presentation(self) -> Optional[LaurentPresentation]:
        pieces = [part.presentation() for part in self.parts]
        if any(piece is None for piece in pieces):
            return None
        total = sum(piece.generators for piece in pieces)
        relators, offset = [], 0
        for piece in pieces:
            for r in piece.relators:
                relators.append(((),) * offset + tuple(r) + ((),) * (total - offset - piece.generators))
            offset += piece.generators
        return LaurentPresentation(total, tuple(relators))

    def rational_action(self) -> sympy.Matrix:
        blocks = [part.rational_action() for part in self.parts]
        blocks = [b for b in blocks if b.rows]
        return sympy.diag(*blocks) if blocks else sympy.zeros(0, 0)

    def torsion_finite(self) -> Optional[bool]:
        return all(part.torsion_finite() for part in self.parts)

    def slice_bound(self, p: int) -> int:
        return sum(part.slice_bound(p) for part in self.parts)

    def ambient_data(self, gens: Generators) -> _AmbientData:
        pieces = [part.ambient_data(gens) for part in self.parts]
        return _combine(pieces)

    def reduction_data(self, p: int, precision: int) -> _AmbientData:
        return _combine([part.reduction_data(p, precision) for part in self.parts])

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": "sum", "parts": [part.to_spec() for part in self.parts]}


def _combine(pieces: Sequence[_AmbientData]) -> _AmbientData:
    total = sum(piece.ambient for piece in pieces)
    relations, offset = [], 0
    for piece in pieces:
        for col in piece.relations:
            relations.append([0] * offset + list(col) + [0] * (total - offset - piece.ambient))
        offset += piece.ambient
    action = block_diag([piece.action for piece in pieces], [(piece.ambient, piece.ambient) for piece in pieces])
    return _AmbientData(total, relations, action)


@dataclass(frozen=True)
class RawModule(CModule):
    """Z[C]^g modulo the Z[C]-span of Laurent relator columns."""

    generators: int
    relators: Tuple[Tuple[Laurent, ...], ...]

    kind = "raw"
    structured = False

    def __post_init__(self):
        if self.generators < 1:
            raise SpecFormatError("a raw presentation needs at least one generator")
        if any(len(r) != self.generators for r in self.relators):
            raise SpecFormatError("every relator must have one entry per generator")

    @classmethod
    def from_spec(cls, spec: Dict[str, Any]) -> "RawModule":
        g = int(spec["generators"])
        relators = []
        for relator in spec.get("relators", []):
            relators.append(tuple(_laurent({int(e): int(c) for e, c in poly.items()}) for poly in relator))
        return cls(g, tuple(relators))

    def presentation(self) -> LaurentPresentation:
        return LaurentPresentation(self.generators, self.relators)

    def rational_action(self) -> sympy.Matrix:
        raise InfiniteRank("rational rank of a raw presentation is not determined")

    def torsion_finite(self) -> Optional[bool]:
        return None

    def slice_bound(self, p: int) -> Optional[int]:
        return None

    def to_spec(self) -> Dict[str, Any]:
        return self.presentation().to_spec()


# ---------------------------------------------------------------------------
# construction


def _rational_rows(rows) -> Tuple[Tuple[sympy.Rational, ...], ...]:
    return tuple(tuple(sympy.Rational(x) for x in row) for row in rows)


def construct(spec: Dict[str, Any]) -> CModule:
    """
    Build a C-module from its JSON spec.

    Args:
        spec: dict with "kind" one of lattice, localized, finite, sum, raw

    Returns:
        The structured module (or a RawModule)

    Raises:
        NotAnAutomorphism: t is not invertible (det not a unit of Z or Z[1/m])
        NonUnitDenominator: an entry of a localized matrix is not in Z[1/m]
        Unsupported: a rank-one Z[1/m] module on which some prime of m divides
            neither numerator nor denominator of t; such a module is not
            finitely generated over Z[C] (e.g. m = 2, t = -1)
        SpecFormatError: missing keys, unknown kind or malformed entries
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecFormatError("module spec must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "lattice":
            return LatticeModule(tuple(tuple(int(x) for x in r) for r in spec["matrix"]))
        if kind == "localized":
            matrix = spec.get("matrix")
            return LocalizedModule(
                m=int(spec["m"]),
                t_num=int(spec.get("t_num", 1)),
                t_den=int(spec.get("t_den", 1)),
                matrix=_rational_rows(matrix) if matrix is not None else None,
            )
        if kind == "finite":
            return FiniteModule.from_factors(spec["factors"], spec.get("action"))
        if kind == "sum":
            return SumModule(tuple(construct(part) for part in spec["parts"]))
        if kind == "raw":
            return RawModule.from_spec(spec)
    except KeyError as e:
        raise SpecFormatError("module spec of kind %r lacks %s" % (kind, e))
    except (TypeError, ValueError, AttributeError, sympy.SympifyError) as e:
        raise SpecFormatError("malformed %s module spec: %s" % (kind, e))
    raise SpecFormatError("unknown module kind %r" % kind)


def laurent_presentation(module: CModule) -> Optional[LaurentPresentation]:
    return module.presentation()


# ---------------------------------------------------------------------------
# tameness


@dataclass(frozen=True)
class TameReport:
    torsion_finite: Optional[bool]
    rational_dim: Optional[int]
    charpoly: Optional[Tuple[sympy.Rational, ...]]
    inverse_charpoly: Optional[Tuple[sympy.Rational, ...]]
    integral: Optional[bool]
    inverse_integral: Optional[bool]
    tame: Optional[bool]

    def to_dict(self) -> Dict[str, Any]:
        def fmt(coeffs):
            return None if coeffs is None else [str(c) for c in coeffs]

        return {
            "torsion_finite": "unknown" if self.torsion_finite is None else self.torsion_finite,
            "rational_dim": self.rational_dim,
            "charpoly": fmt(self.charpoly),
            "inverse_charpoly": fmt(self.inverse_charpoly),
            "integral": self.integral,
            "inverse_integral": self.inverse_integral,
            "tame": self.tame,
        }


def tame_check(module: CModule) -> TameReport:
    """
    Tameness: finite torsion, finite rational rank and an integral
    characteristic polynomial of t or of t^-1.

    :param module: structured C-module
    :return: TameReport
    :raises Unsupported: for raw presentations, with the partial report attached
    """
    if not module.structured:
        partial = TameReport(None, None, None, None, None, None, None)
        raise Unsupported("tameness of a raw presentation is not decided", partial=partial)
    action = module.rational_action()
    dim = action.rows
    if dim:
        report = charpoly_rational(action, inverse=True)
        coeffs, inv_coeffs = report.coefficients, report.inverse_coefficients
        integral, inv_integral = report.integral, report.inverse_integral
    else:
        coeffs = inv_coeffs = (sympy.Integer(1),)
        integral = inv_integral = True
    torsion_finite = module.torsion_finite()
    tame = bool(torsion_finite) and (integral or inv_integral)
    logger.debug("tame_check %s: dim=%d integral=%s/%s tame=%s", module.kind, dim, integral, inv_integral, tame)
    return TameReport(torsion_finite, dim, coeffs, inv_coeffs, integral, inv_integral, tame)


# ---------------------------------------------------------------------------
# truncations


def _ideal_generators(flavor: Flavor, depth: int, p: Optional[int], precision: Optional[int]) -> Generators:
    if flavor is Flavor.I:
        return [(1, depth)]
    if flavor is Flavor.IP:
        return [(p ** (depth - k), k) for k in range(depth + 1)]
    return [(1, depth), (p**precision, 0)]


def _check_truncation(flavor: Flavor, depth: int, p: Optional[int], precision: Optional[int]):
    if depth < 1:
        raise ValueError("truncation depth must be >= 1")
    if flavor is not Flavor.I and (p is None or not isprime(p)):
        raise ValueError("flavor %s needs a prime p" % flavor.value)
    if flavor is Flavor.MIXED and (precision is None or precision < 1):
        raise ValueError("mixed flavor needs a precision N >= 1")


def _series(poly: Laurent, depth: int) -> List[int]:
    """Coefficients of a Laurent polynomial in Z[s]/(s^depth) under t = 1 + s."""
    out = [0] * depth
    for e, c in poly:
        for j in range(depth):
            out[j] += c * int(binomial(e, j))
    return out


def _kronecker_data(
    module: RawModule, flavor: Flavor, depth: int, p: Optional[int], precision: Optional[int]
) -> _AmbientData:
    g = module.generators
    n = g * depth
    relations = []
    for relator in module.relators:
        series = [_series(poly, depth) for poly in relator]
        for shift in range(depth):
            col = [0] * n
            for a, coeffs in enumerate(series):
                for j, c in enumerate(coeffs[: depth - shift]):
                    col[a * depth + j + shift] += c
            relations.append(col)
    for a in range(g):
        for j in range(depth):
            extra = []
            if flavor is Flavor.IP:
                extra.append(p ** (depth - j))
            elif flavor is Flavor.MIXED:
                extra.append(p**precision)
            for c in extra:
                col = [0] * n
                col[a * depth + j] = c
                relations.append(col)
    action = identity(n)
    for a in range(g):
        for j in range(depth - 1):
            action[a * depth + j + 1][a * depth + j] = 1
    return _AmbientData(n, relations, action)


@dataclass(frozen=True)
class Truncation:
    """One stage of a tower, presented on an ambient lattice."""

    flavor: Flavor
    depth: int
    p: Optional[int]
    precision: Optional[int]
    presentation: Presentation
    kronecker_block: Optional[int] = None

    @property
    def group(self) -> FgAbGroup:
        return self.presentation.group

    def _ambient_map(self, lower: "Truncation") -> Rows:
        if self.kronecker_block is None:
            return identity(self.presentation.ambient)
        g, hi, lo = self.kronecker_block, self.depth, lower.depth
        out = [[0] * (g * hi) for _ in range(g * lo)]
        for a in range(g):
            for j in range(lo):
                out[a * lo + j][a * hi + j] = 1
        return out

    def transition_to(self, lower: "Truncation") -> AbHom:
        """The surjection from this stage onto a shallower one."""
        if lower.depth > self.depth:
            raise ValueError("transitions go from deeper to shallower stages")
        lift = [list(r) for r in self.presentation.lift]
        proj = [list(r) for r in lower.presentation.projection]
        if not proj or not lift or not lift[0]:
            matrix = [[0] * self.group.ngens for _ in range(lower.group.ngens)]
        else:
            matrix = mat_mul(mat_mul(proj, self._ambient_map(lower)), lift)
        return AbHom.build(self.group, lower.group, matrix)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "flavor": self.flavor.value,
            "depth": self.depth,
            "group": str(self.group),
            "torsion": list(self.group.torsion),
            "rank": self.group.rank,
            "action": self.group.action_matrix(),
        }


def truncate(
    module: CModule,
    flavor: Flavor,
    depth: int,
    p: Optional[int] = None,
    precision: Optional[int] = None,
) -> Truncation:
    """
    M/MI^i, M/MI_p^i or M/(MI^i + p^N M) with its induced t-action.

    Args:
        module: structured or raw C-module
        flavor: Flavor.I, Flavor.IP or Flavor.MIXED
        depth: i >= 1
        p: prime for I_p and mixed
        precision: N for mixed

    Returns:
        Truncation; truncation.group carries the action
    """
    _check_truncation(flavor, depth, p, precision)
    if isinstance(module, RawModule):
        data = _kronecker_data(module, flavor, depth, p, precision)
        block = module.generators
    else:
        data = module.ambient_data(_ideal_generators(flavor, depth, p, precision))
        block = None
    relations = (
        IntMatrix.from_rows(from_columns(data.relations, data.ambient), len(data.relations))
        if data.relations
        else IntMatrix.zeros(data.ambient, 0)
    )
    presentation = from_relation_matrix(data.ambient, relations, data.action)
    logger.debug("truncate %s %s depth %d: %s", module.kind, flavor.value, depth, presentation.group)
    return Truncation(flavor, depth, p, precision if flavor is Flavor.MIXED else None, presentation, block)


def presentation_agrees(
    module: CModule,
    flavor: Flavor,
    depth: int,
    p: Optional[int] = None,
    precision: Optional[int] = None,
) -> bool:
    """Whether the derived Laurent presentation truncates to the same group."""
    pres = module.presentation()
    if pres is None:
        return True
    direct = truncate(module, flavor, depth, p, precision).group
    raw = truncate(RawModule(pres.generators, pres.relators), flavor, depth, p, precision).group
    return (direct.torsion, direct.rank) == (raw.torsion, raw.rank)


# ---------------------------------------------------------------------------
# completion towers


@dataclass(frozen=True)
class LimitReport:
    """The inverse limit read through its two p-slices."""

    p: int
    v_dim: int
    w_dim: int
    z_rank: int
    zp_rank: int
    torsion_exponents: Tuple[int, ...]
    v_action: Tuple[Tuple[int, ...], ...]
    w_action: Tuple[Tuple[int, ...], ...]
    divisibility_depth: Optional[int]
    # image of the W-slice of the last stage, as vectors in the W-slice of stage s
    w_basis: Tuple[Tuple[int, ...], ...] = ()

    def invariant_factors(self) -> List[str]:
        p = self.p
        return (
            ["Z/%d^%d" % (p, e) for e in self.torsion_exponents]
            + ["Z_%d" % p] * self.zp_rank
            + ["Z"] * self.z_rank
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "invariant_factors": self.invariant_factors(),
            "v_dim": self.v_dim,
            "w_dim": self.w_dim,
            "z_rank": self.z_rank,
            "zp_rank": self.zp_rank,
            "torsion_exponents": list(self.torsion_exponents),
            "v_action": [list(r) for r in self.v_action],
            "w_action": [list(r) for r in self.w_action],
            "divisibility_depth": self.divisibility_depth,
        }


@dataclass(frozen=True)
class StabilizationReport:
    index: int
    last_depth: int
    v_dims: Tuple[int, ...]
    w_dims: Tuple[int, ...]
    bound: Optional[int]
    bound_respected: bool
    kernel_orders: Tuple[Optional[int], ...]
    limit: LimitReport

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "last_depth": self.last_depth,
            "v_dims": list(self.v_dims),
            "w_dims": list(self.w_dims),
            "bound": self.bound,
            "bound_respected": self.bound_respected,
            "kernel_orders": list(self.kernel_orders),
            "limit": self.limit.to_dict(),
        }


@dataclass(frozen=True)
class CompletionTower:
    flavor: Flavor
    p: int
    precision: Optional[int]
    truncations: Tuple[Truncation, ...]
    transitions: Tuple[AbHom, ...]
    report: StabilizationReport

    @property
    def stages(self) -> List[FgAbGroup]:
        return [t.group for t in self.truncations]

    @property
    def limit(self) -> LimitReport:
        return self.report.limit

    def to_dict(self) -> Dict[str, Any]:
        return {
            "flavor": self.flavor.value,
            "p": self.p,
            "precision": self.precision,
            "stages": [t.to_dict() for t in self.truncations],
            "stabilization": self.report.to_dict(),
        }


def _composites(transitions: Sequence[AbHom], stages: Sequence[FgAbGroup], top: int) -> List[AbHom]:
    """out[i] is the map stage top -> stage i."""
    out: List[AbHom] = [AbHom.identity(stages[top])]
    for i in range(top - 1, -1, -1):
        out.append(transitions[i].compose(out[-1]))
    return out[::-1]


def _slice_rank(matrix: Sequence[Sequence[int]], ncols: int, p: int) -> int:
    return rank_mod_p([list(r) for r in matrix], p, ncols) if matrix else 0


def _torsion_rank(f: AbHom, p: int) -> int:
    maps = induced_on_slices(f, p)
    return _slice_rank(maps.torsion, len(torsion_slice_indices(f.source, p)), p)


def _quotient_iso(f: AbHom, p: int) -> bool:
    maps = induced_on_slices(f, p)
    ncols = len(quotient_slice_indices(f.source, p))
    nrows = len(maps.quotient)
    return nrows == ncols and _slice_rank(maps.quotient, ncols, p) == nrows


def _stable_index(stages: Sequence[FgAbGroup], transitions: Sequence[AbHom], p: int, mixed: bool) -> Optional[int]:
    last = len(stages) - 1
    if last < 3:
        return None
    at_last = _composites(transitions, stages, last)
    before = _composites(transitions, stages, last - 1)
    for s in range(last - 2):
        if not all(_quotient_iso(transitions[j], p) for j in (s, s + 1, s + 2)):
            continue
        ranks = {_torsion_rank(at_last[i], p) for i in (s, s + 1, s + 2)}
        if len(ranks) != 1 or _torsion_rank(before[s], p) not in ranks:
            continue
        if mixed and len({(stages[i].torsion, stages[i].rank) for i in (s, s + 1, s + 2)}) != 1:
            continue
        return s
    return None


def _restricted_action(action: Rows, basis: Sequence[Sequence[int]], p: int) -> Rows:
    """Matrix of an action on the span of basis vectors (rows) over Z/p."""
    if not basis:
        return []
    dim = len(basis[0])
    b = from_columns([list(v) for v in basis], dim)
    image = mat_mul(action, b, p)
    x = solve_mod_p(b, image, p, len(basis))
    if x is None:
        raise ValueError("subspace is not invariant under the action")
    return x


def _limit_report(
    stages: Sequence[FgAbGroup], transitions: Sequence[AbHom], s: int, p: int
) -> LimitReport:
    last = len(stages) - 1
    at_last = _composites(transitions, stages, last)
    v_dim = len(quotient_slice_indices(stages[s], p))
    composite = induced_on_slices(at_last[s], p)
    w_ncols = len(torsion_slice_indices(stages[last], p))
    w_image = (
        list(kernel_image_mod_p([list(r) for r in composite.torsion], p, w_ncols).image)
        if composite.torsion and w_ncols
        else []
    )
    w_dim = len(w_image)
    z_rank = stages[last].rank
    slices = action_slices(stages[s], p)
    w_action = _restricted_action([list(r) for r in slices.torsion], w_image, p)
    depth = divisibility_depth(stages, transitions, p).get(p)
    return LimitReport(
        p=p,
        v_dim=v_dim,
        w_dim=w_dim,
        z_rank=z_rank,
        zp_rank=v_dim - w_dim - z_rank,
        torsion_exponents=tuple(sorted(stages[last].p_exponents(p))[:w_dim]),
        v_action=slices.quotient,
        w_action=tuple(tuple(r) for r in w_action),
        divisibility_depth=None if depth is None else depth + 1,
        w_basis=tuple(tuple(v) for v in w_image),
    )


def completion_tower(
    module: CModule,
    flavor: Flavor,
    p: int,
    cap: int = DEPTH_CAP,
    precision: Optional[int] = PRECISION,
) -> CompletionTower:
    """
    Build the tower of truncations until both p-slices stabilize.

    Stage s is stable when the mod-p slice maps out of stages s+1..s+3 are
    isomorphisms and the ranks of the p-torsion images coming down from the
    deepest stage agree on s, s+1, s+2 (and already agreed one stage earlier).
    Mixed towers also need equal invariant factors on s, s+1, s+2.

    :param module: C-module; tameness is checked and reported in the log
    :param flavor: which ideal powers to divide out
    :param p: prime through which slices are read
    :param cap: deepest stage computed
    :param precision: N for the mixed flavor
    :return: CompletionTower with a StabilizationReport
    :raises DepthExceeded: when nothing stabilizes by the cap
    """
    if module.structured:
        if not tame_check(module).tame:
            logger.warning("completion tower of a non-tame %s module may not stabilize", module.kind)
    else:
        logger.warning("tameness of a raw presentation is unknown; tower runs up to depth %d", cap)
    prec = precision if flavor is Flavor.MIXED else None
    truncations = [truncate(module, flavor, 1, p, prec)]
    transitions: List[AbHom] = []
    for depth in range(2, cap + 1):
        truncations.append(truncate(module, flavor, depth, p, prec))
        transitions.append(truncations[-1].transition_to(truncations[-2]))
        stages = [t.group for t in truncations]
        s = _stable_index(stages, transitions, p, flavor is Flavor.MIXED)
        if s is None:
            continue
        v_dims = tuple(len(quotient_slice_indices(g, p)) for g in stages)
        w_dims = tuple(len(torsion_slice_indices(g, p)) for g in stages)
        bound = module.slice_bound(p)
        respected = bound is None or all(d <= bound for d in v_dims + w_dims)
        if not respected:
            logger.warning("slice dimensions %s exceed the bound %s", v_dims, bound)
        kernel_orders = tuple(
            stages[j + 1].order // stages[j].order if stages[j + 1].is_finite and stages[j].order else None
            for j in range(len(transitions))
        )
        limit = _limit_report(stages, transitions, s, p)
        logger.debug(
            "%s tower at p=%d stabilized at depth %d (computed to %d): %s",
            flavor.value,
            p,
            s + 1,
            depth,
            limit.invariant_factors(),
        )
        report = StabilizationReport(
            index=s + 1,
            last_depth=depth,
            v_dims=v_dims,
            w_dims=w_dims,
            bound=bound,
            bound_respected=respected,
            kernel_orders=kernel_orders,
            limit=limit,
        )
        return CompletionTower(flavor, p, prec, tuple(truncations), tuple(transitions), report)
    partial = {"stages": [str(t.group) for t in truncations]}
    logger.warning("%s tower at p=%d did not stabilize by depth %d", flavor.value, p, cap)
    raise DepthExceeded("no stabilization up to depth %d" % cap, partial=partial)


# ---------------------------------------------------------------------------
# double completion and finite Fitting checks


@dataclass(frozen=True)
class DoubleCompletionReport:
    p: int
    precision: int
    ip_exponents: Tuple[int, ...]
    mixed_exponents: Tuple[int, ...]
    agrees: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "precision": self.precision,
            "ip_exponents": list(self.ip_exponents),
            "mixed_exponents": list(self.mixed_exponents),
            "agrees": self.agrees,
        }


def _stable_exponents(tower: CompletionTower) -> Tuple[int, ...]:
    last = tower.truncations[tower.report.index - 1].group
    return tuple(sorted(last.p_exponents(tower.p)))


def double_completion_check(module: CModule, p: int, precision: int, cap: int = DEPTH_CAP) -> DoubleCompletionReport:
    """Compare the I_p-completion mod p^N with the I-completion of M/p^N."""
    ip = completion_tower(module, Flavor.IP, p, cap).limit
    mixed = completion_tower(module, Flavor.MIXED, p, cap, precision)
    ip_exponents = tuple(
        sorted([min(e, precision) for e in ip.torsion_exponents] + [precision] * (ip.zp_rank + ip.z_rank))
    )
    mixed_exponents = _stable_exponents(mixed)
    agrees = ip_exponents == mixed_exponents
    logger.debug("double completion p=%d N=%d: %s vs %s", p, precision, ip_exponents, mixed_exponents)
    return DoubleCompletionReport(p, precision, ip_exponents, mixed_exponents, agrees)


@dataclass(frozen=True)
class FittingCheck:
    exponent: int
    module_order: int
    image_order: int
    kernel_order: int
    is_direct: bool
    kernel_exponents: Tuple[int, ...]
    mixed_exponents: Tuple[int, ...]
    agrees: bool
    idempotent: bool
    commutes: bool

    @property
    def passed(self) -> bool:
        return self.is_direct and self.agrees and self.idempotent and self.commutes

    def to_dict(self) -> Dict[str, Any]:
        return {
            "exponent": self.exponent,
            "module_order": self.module_order,
            "image_order": self.image_order,
            "kernel_order": self.kernel_order,
            "is_direct": self.is_direct,
            "kernel_exponents": list(self.kernel_exponents),
            "mixed_exponents": list(self.mixed_exponents),
            "agrees": self.agrees,
            "idempotent": self.idempotent,
            "commutes": self.commutes,
            "passed": self.passed,
        }


def _lattice_quotient_exponents(outer: Sequence[Sequence[int]], inner: Sequence[Sequence[int]], p: int) -> Tuple[int, ...]:
    """p-exponents of outer/inner for full-rank Hermite bases with inner ⊆ outer."""
    k = len(outer)
    if k == 0:
        return ()
    coords = [coordinates(outer, col) for col in inner]
    _, _, diagonal = snf_rows(from_columns(coords, k), k, len(coords))
    group = FgAbGroup(0, tuple(d for d in diagonal if d > 1))
    return tuple(sorted(group.p_exponents(p)))


def fitting_check(
    module: CModule,
    p: int,
    precision: int,
    cap: int = DEPTH_CAP,
    depth: Optional[int] = None,
) -> FittingCheck:
    """
    Fitting splitting of t - 1 on M/p^N M (or M/(MI_p^depth + p^N M)).

    The kernel of the stable power is compared with the stabilized stage of
    the mixed (p, N) tower.
    """
    if not module.structured:
        raise Unsupported("M/p^N M of a raw presentation need not be finite")
    if depth is None:
        data = module.reduction_data(p, precision)
    else:
        gens = _ideal_generators(Flavor.IP, depth, p, None) + [(p**precision, 0)]
        data = module.ambient_data(gens)
    k = data.ambient
    if k == 0:
        mixed = _stable_exponents(completion_tower(module, Flavor.MIXED, p, cap, precision))
        return FittingCheck(1, 1, 1, 1, True, (), mixed, mixed == (), True, True)
    b_rows = mat_sub_identity(data.action)
    b = ModMatrix.from_rows(b_rows, p, precision, k)
    relations = IntMatrix.from_rows(from_columns(data.relations, k), len(data.relations)) if data.relations else None
    result = stable_fitting(b, relations)
    kernel_exponents = _lattice_quotient_exponents(result.kernel, result.base, p)
    mixed = _stable_exponents(completion_tower(module, Flavor.MIXED, p, cap, precision))
    projection = fitting_projection(result)
    base = [list(c) for c in result.base]
    idempotent = congruent_mod_lattice(mat_mul(projection, projection), projection, base)
    commutes = congruent_mod_lattice(mat_mul(projection, b_rows), mat_mul(b_rows, projection), base)
    check = FittingCheck(
        exponent=result.exponent,
        module_order=result.module_order,
        image_order=result.image_order,
        kernel_order=result.kernel_order,
        is_direct=result.is_direct,
        kernel_exponents=kernel_exponents,
        mixed_exponents=mixed,
        agrees=kernel_exponents == mixed,
        idempotent=idempotent,
        commutes=commutes,
    )
    logger.debug("fitting_check p=%d N=%d: %s", p, precision, check.to_dict())
    return check


# ---------------------------------------------------------------------------
# rational module


@dataclass(frozen=True)
class RationalModule:
    """V = M (x) Q with V = V̂_I ⊕ VI^∞ (nilpotent part ⊕ divisible part)."""

    dimension: int
    action: sympy.ImmutableMatrix
    nilpotent_basis: Tuple[sympy.ImmutableMatrix, ...]
    divisible_basis: Tuple[sympy.ImmutableMatrix, ...]
    is_direct: bool

    @property
    def nilpotent_dim(self) -> int:
        return len(self.nilpotent_basis)

    @property
    def divisible_dim(self) -> int:
        return len(self.divisible_basis)

    def nilpotent_action(self) -> sympy.Matrix:
        """t restricted to V̂_I, in the nilpotent basis."""
        if not self.nilpotent_basis:
            return sympy.zeros(0, 0)
        b = sympy.Matrix.hstack(*self.nilpotent_basis)
        return (b.T * b).inv() * b.T * sympy.Matrix(self.action) * b

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dimension": self.dimension,
            "nilpotent_dim": self.nilpotent_dim,
            "divisible_dim": self.divisible_dim,
            "is_direct": self.is_direct,
        }


def rational_fitting(module: CModule) -> RationalModule:
    """
    Split V = M (x) Q into Ker((t-1)^d) and Im((t-1)^d), d = dim V.

    Raises InfiniteRank when the rational rank is not available.
    """
    action = module.rational_action()
    d = action.rows
    if d == 0:
        return RationalModule(0, sympy.ImmutableMatrix(action), (), (), True)
    power = (action - sympy.eye(d)) ** d
    nil = tuple(sympy.ImmutableMatrix(v) for v in rational_nullspace(power))
    div = tuple(sympy.ImmutableMatrix(v) for v in rational_columnspace(power))
    stacked = sympy.Matrix.hstack(*(list(nil) + list(div)))
    is_direct = len(nil) + len(div) == d and stacked.rank() == d
    logger.debug("rational_fitting dim %d: nilpotent %d, divisible %d", d, len(nil), len(div))
    return RationalModule(d, sympy.ImmutableMatrix(action), nil, div, is_direct)


def nilpotent_q_action(module: RationalModule, alpha) -> sympy.Matrix:
    """
    t^alpha on V̂_I for rational alpha, as the finite sum
    sum_n binom(alpha, n) (t - 1)^n.
    """
    r = module.nilpotent_action()
    k = r.rows
    if k == 0:
        return sympy.zeros(0, 0)
    alpha = sympy.Rational(alpha)
    step = r - sympy.eye(k)
    out = sympy.zeros(k, k)
    power = sympy.eye(k)
    for n in range(k + 1):
        out += binomial(alpha, n) * power
        power = power * step
    return out


def q_action_is_homomorphism(module: RationalModule, alpha, beta) -> bool:
    """t^alpha t^beta == t^(alpha + beta) on V̂_I."""
    lhs = nilpotent_q_action(module, alpha) * nilpotent_q_action(module, beta)
    rhs = nilpotent_q_action(module, sympy.Rational(alpha) + sympy.Rational(beta))
    return (lhs - rhs).is_zero_matrix


__all__ = [
    "CModule",
    "LatticeModule",
    "LocalizedModule",
    "FiniteModule",
    "SumModule",
    "RawModule",
    "LaurentPresentation",
    "TameReport",
    "Truncation",
    "CompletionTower",
    "LimitReport",
    "RationalModule",
    "construct",
    "laurent_presentation",
    "tame_check",
    "truncate",
    "completion_tower",
    "rational_fitting",
    "double_completion_check",
    "fitting_check",
    "nilpotent_q_action",
]
