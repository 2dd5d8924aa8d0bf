#!/usr/bin/env python3
"""
Test suite for equivariant resolutions, Wang cones and lifted chain maps.
"""

import pytest

from metabelian_completion.abgrp import AbHom, FgAbGroup
from metabelian_completion.errors import LiftFailure, ShapeMismatch, SizeExceeded
from metabelian_completion.homology.chainres import (
    chain_homology,
    equivariant_resolution,
    induced_h2_rank,
    lift_chain_map,
    wang_cone_homology,
)
from metabelian_completion.homology.homfun import homology_of_group, two_column_semidirect
from metabelian_completion.linalg import mat_mul

KLEIN = FgAbGroup(1, (), ((-1,),))
HEISENBERG = FgAbGroup(2, (), ((1, 1), (0, 1)))
FINITE9 = FgAbGroup(0, (9,), ((4,),))
ELEMENTARY = FgAbGroup(0, (3, 3), ((1, 1), (0, 1)))


class TestResolution:
    """C_* = P ⊗ Z/p with its lifted action."""

    def test_provenance(self):
        assert equivariant_resolution(KLEIN, 3, 2).provenance == "koszul"
        assert equivariant_resolution(FINITE9, 3, 2).provenance == "cyclic"
        assert equivariant_resolution(FgAbGroup(1, (4,)), 2, 2).provenance == "mixed"
        print("✓ Provenance test passed")

    def test_p_primary_part_is_used(self):
        c = equivariant_resolution(FgAbGroup(0, (6,)), 3, 2)
        assert c.primary.torsion == (3,), f"only Z/3 should be resolved, got {c.primary}"
        print("✓ p-primary part test passed")

    def test_budget(self):
        with pytest.raises(SizeExceeded):
            equivariant_resolution(FgAbGroup(0, (9, 9)), 3, 2, budget=10)
        print("✓ Budget test passed")


class TestWangCone:
    """H_*(M ⋊ C, Z/p) from cone(1 - τ)."""

    def test_klein_at_two(self):
        cone = chain_homology(KLEIN, 2, 2)
        assert cone.homology_dims == (1, 2, 1), f"Klein bottle mod 2 is 1, 2, 1, got {cone.homology_dims}"
        print("✓ Klein at 2 test passed")

    def test_cyclic_times_circle_at_two(self):
        cone = chain_homology(FgAbGroup(0, (4,)), 2, 3)
        assert cone.homology_dims == (1, 2, 2, 2), f"Z/4 × Z mod 2, got {cone.homology_dims}"
        print("✓ Z/4 × Z at 2 test passed")

    def test_agrees_with_formula_at_odd_primes(self):
        for group, p in ((KLEIN, 3), (HEISENBERG, 3), (FINITE9, 3), (ELEMENTARY, 3), (FgAbGroup(1, (9,)), 3)):
            nmax = 3
            chain = chain_homology(group, p, nmax).homology_dims
            formula = two_column_semidirect(homology_of_group(group, p, nmax)).totals
            assert chain == formula, f"{group} at p={p}: chain {chain} vs formula {formula}"
        print("✓ Chain vs formula test passed")

    def test_homology_bases(self):
        cone = chain_homology(HEISENBERG, 3, 2)
        for n in range(3):
            assert len(cone.homology_basis(n)) == cone.homology_dims[n], f"basis size off in degree {n}"
        assert cone.to_dict()["dims"] == [1, 2, 2]
        print("✓ Homology basis test passed")

    def test_cone_is_a_complex(self):
        c = equivariant_resolution(ELEMENTARY, 3, 2)
        cone = wang_cone_homology(c)
        for n in range(2, c.nmax + 2):
            product = mat_mul(cone.boundary(n - 1), cone.boundary(n), 3)
            assert all(not x for row in product for x in row), f"∂∂ != 0 in degree {n}"
        assert cone.homology_dims == chain_homology(ELEMENTARY, 3, 2).homology_dims
        assert cone.dims[1] == c.dim(1) + c.dim(0)
        print("✓ Cone differential test passed")


class TestLiftedMaps:
    """Chain maps of cones induced by equivariant coefficient maps."""

    def test_identity(self):
        c = equivariant_resolution(FINITE9, 3, 2)
        cone_map = lift_chain_map(AbHom.identity(FINITE9), c, c)
        for n in range(3):
            assert cone_map.is_surjective(n) and cone_map.is_injective(n), f"identity fails in degree {n}"
        assert induced_h2_rank(AbHom.identity(ELEMENTARY), 3) == (3, 3, 3)
        print("✓ Identity lift test passed")

    def test_zero_map(self):
        z3 = FgAbGroup(0, (3,))
        src, tgt, rank = induced_h2_rank(AbHom.build(z3, z3, [[0]]), 3)
        assert (src, tgt) == (2, 2), "H_2(Z/3 × Z, Z/3) has dimension 2"
        assert rank == 0, "the zero coefficient map kills H_2"
        print("✓ Zero map lift test passed")

    def test_failures(self):
        trivial = FgAbGroup(0, (9,))
        src = equivariant_resolution(FINITE9, 3, 2)
        tgt = equivariant_resolution(trivial, 3, 2)
        with pytest.raises(LiftFailure):
            lift_chain_map(AbHom.build(FINITE9, trivial, [[1]]), src, tgt)
        with pytest.raises(ShapeMismatch):
            lift_chain_map(AbHom.identity(FINITE9), src, equivariant_resolution(FINITE9, 3, 3))
        print("✓ Lift failure test passed")


def run_all_tests():
    """Run all tests."""
    print("Running chain-level homology tests...")
    print("=" * 50)

    for cls in (TestResolution, TestWangCone, TestLiftedMaps):
        for name in dir(cls):
            if name.startswith("test_"):
                getattr(cls(), name)()

    print("=" * 50)
    print("✓ All tests passed!")


if __name__ == "__main__":
    run_all_tests()
