"""
H_n(G, Q) -> H_n(Ĝ_Q, Q) for G = M ⋊ C.

Over Q, H_*(M) = Λ(V) with V = M ⊗ Q, and Ĝ_Q = V̂_I ⋊ Q where V̂_I is the
nilpotent Fitting summand. Since t acts unipotently on V̂_I, the homology of
Q with coefficients in Λ(V̂_I) agrees with that of C, so both sides use the
same two-column assembly. The comparison map is Λ of the Fitting projection.
"""

from itertools import combinations
from typing import List, Optional, Tuple

import sympy

from .. import utils
from ..cmod import RationalModule, rational_fitting
from ..utils import Ring
from .epimorphism import RATIONAL, DegreeVerdict, EpiReport
from .lcs import q_prenilpotence_index
from .zoo import GroupSpec

logger = utils.get_logger(__name__)


def exterior_power_rational(m: sympy.Matrix, a: int) -> sympy.Matrix:
    """Λ^a(m) in the lexicographic bases of a-subsets, entries the a×a minors."""
    if a == 0:
        return sympy.Matrix([[1]])
    rows = list(combinations(range(m.rows), a))
    cols = list(combinations(range(m.cols), a))
    if not rows or not cols:
        return sympy.zeros(len(rows), len(cols))
    return sympy.Matrix(len(rows), len(cols), lambda i, j: m.extract(list(rows[i]), list(cols[j])).det())


def _rank(m: sympy.Matrix) -> int:
    return m.rank() if m.rows and m.cols else 0


def _coinvariants(action: sympy.Matrix) -> int:
    return action.rows - _rank(action - sympy.eye(action.rows))


def _fixed_basis(action: sympy.Matrix) -> List[sympy.Matrix]:
    if not action.rows:
        return []
    return (action - sympy.eye(action.rows)).nullspace()


def fitting_projection(module: RationalModule) -> Tuple[sympy.Matrix, sympy.Matrix]:
    """(π, ι): V -> V̂_I along the divisible summand, and the inclusion of V̂_I."""
    k, d = module.nilpotent_dim, module.dimension
    if k == 0:
        return sympy.zeros(0, d), sympy.zeros(d, 0)
    iota = sympy.Matrix.hstack(*module.nilpotent_basis)
    basis = sympy.Matrix.hstack(*(list(module.nilpotent_basis) + list(module.divisible_basis)))
    return basis.inv()[:k, :], iota


def _left_surjective(f: sympy.Matrix, target: sympy.Matrix) -> bool:
    d = target.rows
    if not d:
        return True
    t_minus = target - sympy.eye(d)
    stacked = sympy.Matrix.hstack(f, t_minus) if f.cols else t_minus
    return _rank(stacked) == d


def _right_surjective(f: sympy.Matrix, source: sympy.Matrix, target: sympy.Matrix) -> bool:
    wanted = len(_fixed_basis(target))
    if not wanted:
        return True
    fixed = _fixed_basis(source)
    if not fixed:
        return False
    return _rank(sympy.Matrix.hstack(*[f * v for v in fixed])) == wanted


def rational_verify(group: GroupSpec, nmax: Optional[int] = None) -> EpiReport:
    """
    Check that H_n(G, Q) -> H_n(Ĝ_Q, Q) is onto for n <= nmax.

    Args:
        group: G = M ⋊ C with dim M ⊗ Q finite
        nmax: top degree (defaults to the group's nmax)

    Returns:
        EpiReport with R = Q and p = 0; the stabilization entry carries the
        Q-prenilpotence index of G

    Raises:
        InfiniteRank: M ⊗ Q is not available as a finite-dimensional module
    """
    top = group.nmax if nmax is None else nmax
    module = rational_fitting(group.module)
    a = sympy.Matrix(module.action)
    nil = module.nilpotent_action()
    pi, iota = fitting_projection(module)
    split = module.nilpotent_dim == 0 or pi * iota == sympy.eye(module.nilpotent_dim)

    src = [exterior_power_rational(a, n) for n in range(top + 1)]
    tgt = [exterior_power_rational(nil, n) for n in range(top + 1)]
    maps = [exterior_power_rational(pi, n) for n in range(top + 1)]

    degrees = []
    for n in range(top + 1):
        dim_g = _coinvariants(src[n]) + (len(_fixed_basis(src[n - 1])) if n else 0)
        dim_ghat = _coinvariants(tgt[n]) + (len(_fixed_basis(tgt[n - 1])) if n else 0)
        left = _left_surjective(maps[n], tgt[n])
        right = n == 0 or _right_surjective(maps[n - 1], src[n - 1], tgt[n - 1])
        surjective = True if left and right else (False if not right else None)
        degrees.append(DegreeVerdict(n, dim_g, dim_ghat, surjective, split, RATIONAL))

    prenilpotence = q_prenilpotence_index(group)
    report = EpiReport(
        group=group.name,
        ring=Ring.Q,
        p=0,
        degrees=tuple(degrees),
        stabilization={
            "q_prenilpotence": prenilpotence.to_dict(),
            "fitting": module.to_dict(),
        },
        iso_case=module.divisible_dim == 0,
        tame=group.tame(),
    )
    logger.info("rational verify %s: %s", group.name, [d.dim_g for d in degrees])
    return report
