"""
Built-in groups G = M ⋊ C and the slice data of M used by the harness.

A GroupSpec wraps a structured C-module. Everything downstream reads M
through its two p-slices V = M/pM and W = _pM, given here together with
ambient representatives so that maps from M into any truncation (whose
presentation projects ambient coordinates) can be written down.
"""

import json
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import sympy

from .. import utils
from ..abgrp import AbHom, FgAbGroup, Presentation, action_slices, direct_sum, from_relation_matrix, slice_maps
from ..cmod import (
    DEPTH_CAP,
    CModule,
    FiniteModule,
    LatticeModule,
    LocalizedModule,
    SumModule,
    construct,
    tame_check,
)
from ..errors import SpecFormatError
from ..linalg import IntMatrix, Rows, block_diag, from_columns, mat_vec
from ..utils import DEFAULTS

logger = utils.get_logger(__name__)

Matrix = Tuple[Tuple[int, ...], ...]

NMAX = DEFAULTS["nmax"]
IMAX = 5
PRIMES = (2, 3, 5)


def _freeze(rows: Sequence[Sequence[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in r) for r in rows)


def through(projection: Sequence[Sequence[int]], cols: Sequence[Sequence[int]], nrows: int) -> Rows:
    """projection · [cols], tolerating empty shapes."""
    return from_columns([mat_vec(projection, c) for c in cols], nrows)


def _leaves(module: CModule) -> List[CModule]:
    if isinstance(module, SumModule):
        out: List[CModule] = []
        for part in module.parts:
            out.extend(_leaves(part))
        return out
    return [module]


def _ambient_size(leaf: CModule) -> int:
    if isinstance(leaf, FiniteModule):
        return len(leaf.group.torsion)
    return leaf.rank


@dataclass(frozen=True)
class ModuleSlices:
    """M/pM and _pM of a C-module with ambient representatives of their bases.

    ``w_lift`` holds the generators of the finite summands and ``w_orders``
    their orders; the W basis consists of those whose order p divides.
    """

    p: int
    ambient: int
    v_action: Matrix
    w_action: Matrix
    v_lift: Matrix
    w_lift: Matrix
    w_orders: Tuple[int, ...]

    @property
    def v_dim(self) -> int:
        return len(self.v_action)

    @property
    def w_dim(self) -> int:
        return len(self.w_action)

    def maps_into(self, projection: Sequence[Sequence[int]], target: FgAbGroup) -> Tuple[Rows, Rows]:
        """
        Slice maps of M -> B, where ``projection`` sends ambient coordinates of
        M to the coordinates of B.

        :return: (V map, W map) over Z/p
        """
        n = target.ngens
        v_cols = [list(c) for c in zip(*self.v_lift)] if self.v_dim else []
        w_cols = [list(c) for c in zip(*self.w_lift)] if self.w_orders else []
        v_matrix = through(projection, v_cols, n)
        w_matrix = through(projection, w_cols, n)
        f_v = slice_maps(v_matrix, [0] * self.v_dim, target.orders, self.p).quotient
        f_w = slice_maps(w_matrix, self.w_orders, target.orders, self.p).torsion
        return [list(r) for r in f_v], [list(r) for r in f_w]


@dataclass(frozen=True)
class GroupSpec:
    """G = M ⋊ C with the primes, degrees and depth caps it is checked at."""

    name: str
    module: CModule
    primes: Tuple[int, ...] = PRIMES
    nmax: int = NMAX
    depth_cap: int = DEPTH_CAP
    imax: int = IMAX
    description: str = ""

    def __post_init__(self):
        if not self.module.structured:
            raise SpecFormatError("group %s: raw presentations only support truncation" % self.name)

    @property
    def leaves(self) -> List[CModule]:
        return _leaves(self.module)

    @property
    def is_finitely_generated(self) -> bool:
        """Whether M is finitely generated as an abelian group."""
        return all(isinstance(leaf, (LatticeModule, FiniteModule)) for leaf in self.leaves)

    def fg_presentation(self) -> Optional[Presentation]:
        """M as an abelian group with action; ``lift`` gives ambient coordinates."""
        if not self.is_finitely_generated:
            return None
        groups = []
        for leaf in self.leaves:
            if isinstance(leaf, LatticeModule):
                groups.append(FgAbGroup(leaf.rank, (), leaf.matrix))
            else:
                groups.append(leaf.group)
        return direct_sum(groups)

    def fg_group(self) -> Optional[FgAbGroup]:
        pres = self.fg_presentation()
        return None if pres is None else pres.group

    def hom_to(self, projection: Sequence[Sequence[int]], target: FgAbGroup) -> Optional[AbHom]:
        """M -> B for f.g. M, given B's coordinates of ambient vectors."""
        pres = self.fg_presentation()
        if pres is None:
            return None
        cols = [list(c) for c in zip(*pres.lift)] if pres.group.ngens else []
        return AbHom.build(pres.group, target, through(projection, cols, target.ngens))

    def slices(self, p: int) -> ModuleSlices:
        data = self.module.reduction_data(p, 1)
        rels = (
            IntMatrix.from_rows(from_columns(data.relations, data.ambient), len(data.relations))
            if data.relations
            else IntMatrix.zeros(data.ambient, 0)
        )
        reduction = from_relation_matrix(data.ambient, rels, data.action)
        v_action = action_slices(reduction.group, p).quotient
        w_cols: List[List[int]] = []
        w_orders: List[int] = []
        w_blocks: List[Rows] = []
        offset = 0
        for leaf in self.leaves:
            size = _ambient_size(leaf)
            if isinstance(leaf, FiniteModule):
                for j, d in enumerate(leaf.group.torsion):
                    w_cols.append([1 if i == offset + j else 0 for i in range(data.ambient)])
                    w_orders.append(d)
                w_blocks.append([list(r) for r in action_slices(leaf.group, p).torsion])
            offset += size
        w_action = block_diag(w_blocks, [(len(b), len(b)) for b in w_blocks]) if w_blocks else []
        v_lift = [list(r) for r in reduction.lift] if reduction.group.ngens else [[] for _ in range(data.ambient)]
        return ModuleSlices(
            p=p,
            ambient=data.ambient,
            v_action=_freeze(v_action),
            w_action=_freeze(w_action),
            v_lift=_freeze(v_lift),
            w_lift=_freeze(from_columns(w_cols, data.ambient)),
            w_orders=tuple(w_orders),
        )

    def iso_case(self, p: int) -> bool:
        """M(t - 1) ⊆ pM, i.e. t acts trivially on M/pM."""
        s = self.slices(p)
        return all(x % p == (1 if i == j else 0) for i, r in enumerate(s.v_action) for j, x in enumerate(r))

    def tame(self) -> Optional[bool]:
        return tame_check(self.module).tame

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "module": self.module.to_spec(),
            "primes": list(self.primes),
            "nmax": self.nmax,
            "depth_cap": self.depth_cap,
            "imax": self.imax,
            "description": self.description,
        }


ZOO: Dict[str, GroupSpec] = {
    spec.name: spec
    for spec in (
        GroupSpec("klein", LatticeModule(((-1,),)), description="Klein bottle group, Z with t = -1"),
        GroupSpec("heisenberg", LatticeModule(((1, 1), (0, 1))), description="Heisenberg group, unipotent Z^2"),
        GroupSpec("bs1_2", LocalizedModule(m=2, t_num=2), description="metabelianized BS(1,2), Z[1/2] with t = 2"),
        GroupSpec("bs1_3", LocalizedModule(m=3, t_num=3), description="metabelianized BS(1,3), Z[1/3] with t = 3"),
        GroupSpec("sol", LatticeModule(((2, 1), (1, 1))), description="Sol lattice, hyperbolic Z^2"),
        GroupSpec("torus_p3", LatticeModule(((1, 3), (3, 10))), description="torus bundle with a = 1 mod 3"),
        GroupSpec("finite9", FiniteModule.from_factors([9], [[4]]), description="Z/9 with t = 4"),
        GroupSpec(
            "paper_rank2",
            LocalizedModule(m=2, matrix=((sympy.Rational(2),),)),
            description="Z[1/2] with t = 2 given in matrix form",
        ),
    )
}


def load_group(name_or_path: str) -> GroupSpec:
    """
    A zoo member by name, or a group read from a JSON file.

    The file holds either a module spec (``{"kind": ...}``) or an object with
    ``"module"`` and optional ``"name"``, ``"primes"``, ``"nmax"``,
    ``"depth_cap"``, ``"imax"``.

    :raises SpecFormatError: unknown name, unreadable file or malformed spec
    """
    if name_or_path in ZOO:
        return ZOO[name_or_path]
    data = _read_spec(name_or_path)
    name = os.path.splitext(os.path.basename(name_or_path))[0]
    if "module" not in data:
        return GroupSpec(name, construct(data))
    try:
        return GroupSpec(
            name=str(data.get("name", name)),
            module=construct(data["module"]),
            primes=tuple(int(p) for p in data.get("primes", PRIMES)),
            nmax=int(data.get("nmax", NMAX)),
            depth_cap=int(data.get("depth_cap", DEPTH_CAP)),
            imax=int(data.get("imax", IMAX)),
            description=str(data.get("description", "")),
        )
    except (TypeError, ValueError) as e:
        raise SpecFormatError("malformed group spec: %s" % e)


def _read_spec(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise SpecFormatError("%r is neither a zoo group nor a file" % path)
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise SpecFormatError("cannot read %s: %s" % (path, e))
    if not isinstance(data, dict):
        raise SpecFormatError("group spec must be a JSON object")
    return data


def load_module(name_or_path: str) -> CModule:
    """Like load_group, but raw presentations are accepted too."""
    if name_or_path in ZOO:
        return ZOO[name_or_path].module
    data = _read_spec(name_or_path)
    return construct(data["module"] if "module" in data else data)
