#!/usr/bin/env python3
"""
Test suite for the Λ⊗Γ homology model, induced maps and the two-column assembly.
"""

import random

import pytest
import sympy

from metabelian_completion.abgrp import AbHom, FgAbGroup
from metabelian_completion.errors import NotAnAutomorphism, ShapeMismatch, UnsupportedAtTwo
from metabelian_completion.homology.homfun import (
    degree_blocks,
    equivariant_section,
    exterior_power,
    h2_certificates,
    homology_lambda_gamma,
    homology_of_group,
    induced_map,
    induced_map_of,
    intertwines,
    lambda_gamma_dim,
    two_column_semidirect,
)

pytest.importorskip("hypothesis")

from hypothesis import given, settings, strategies as st  # noqa: E402

UNIPOTENT = [[1, 1], [0, 1]]


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _zero(nrows, ncols):
    return [[0] * ncols for _ in range(nrows)]


class TestLambdaGammaModel:
    """Dimensions and actions of H_*(A, Z/p)."""

    def test_cyclic_groups_have_one_class_per_degree(self):
        for p in (3, 5):
            for k in (1, 2, 3):
                group = FgAbGroup(0, (p**k,))
                h = homology_of_group(group, p, 10)
                assert h.dims == (1,) * 11, f"H_*(Z/{p}^{k}, Z/{p}) should be 1 in every degree, got {h.dims}"
        print("✓ Cyclic homology test passed")

    def test_degree_blocks(self):
        assert degree_blocks(2, 2, 2) == [(2, 0), (0, 1)]
        assert degree_blocks(1, 0, 2) == [], "Λ^2 of a line vanishes and there is no Γ part"
        assert lambda_gamma_dim(2, 2, 2) == 3, "Λ²(F²) ⊕ Γ¹(F²)"
        assert lambda_gamma_dim(2, 2, 4) == 5
        assert [lambda_gamma_dim(2, 0, n) for n in range(4)] == [1, 2, 1, 0], "no torsion slice leaves Λ(V) alone"
        assert lambda_gamma_dim(0, 0, 0) == 1 and lambda_gamma_dim(0, 0, 1) == 0
        print("✓ Degree blocks test passed")

    def test_bound_is_attained_by_rank_two_torsion(self):
        h = homology_of_group(FgAbGroup(0, (9, 9)), 3, 5)
        assert h.dim(2) == 3, f"H_2((Z/9)^2, Z/3) should have dimension 3, got {h.dim(2)}"
        assert h.d_p == 2
        assert h.bound_holds(), f"dims {h.dims} break (n+1)^(D_p - 1)"
        assert h.dims[:5] == (1, 2, 3, 4, 5), "the bound n + 1 is attained"
        print("✓ Homology bound test passed")

    def test_free_part_only(self):
        h = homology_of_group(FgAbGroup(1, (2,)), 3, 3)
        assert h.dims == (1, 1, 0, 0), f"only Z contributes at p = 3, got {h.dims}"
        h = homology_lambda_gamma([[1]], [], 2, 2, 1, 0)
        assert h.dims == (1, 1, 0), "p = 2 is fine without 2-torsion coefficients"
        print("✓ Free part test passed")

    def test_actions_in_each_degree(self):
        h = homology_lambda_gamma(UNIPOTENT, [], 3, 2, 2, 0)
        assert h.dims == (1, 2, 1)
        assert h.action(0) == [[1]]
        assert h.action(1) == UNIPOTENT, "H_1 carries the slice action"
        assert h.action(2) == [[1]], "Λ² acts by the determinant"

        h = homology_lambda_gamma([[2]], [[2]], 3, 2)
        assert h.action(1) == [[2]] and h.action(2) == [[2]], "Γ¹ of the torsion slice carries its action"
        print("✓ Degree actions test passed")

    def test_rejections(self):
        with pytest.raises(UnsupportedAtTwo):
            homology_lambda_gamma([[1]], [[1]], 2, 2)
        with pytest.raises(NotAnAutomorphism):
            homology_lambda_gamma([[0]], [], 3, 2, 1, 0)
        with pytest.raises(ShapeMismatch):
            homology_lambda_gamma([[1, 0]], [], 3, 2, 1, 0)
        print("✓ Rejections test passed")


def test_exterior_power_is_determinant():
    """Λ^top(f) is det f."""
    f = [[2, 1], [1, 1]]
    assert exterior_power(f, 2, 5, 2, 2) == [[1]], "det [[2, 1], [1, 1]] = 1"
    assert exterior_power([[3, 0], [0, 4]], 2, 5, 2, 2) == [[2]], "12 = 2 mod 5"
    assert exterior_power(f, 0, 5, 2, 2) == [[1]], "Λ^0 is the identity on F_p"
    print("✓ Exterior power test passed")


class TestInducedMaps:
    """Functoriality of H_*(-, Z/p) in the slice maps."""

    def setup_method(self):
        self.h = homology_lambda_gamma(UNIPOTENT, [[2]], 3, 4)

    def test_action_induces_itself(self):
        f = induced_map(UNIPOTENT, [[2]], self.h, self.h)
        for n in range(5):
            assert f.matrix(n) == self.h.action(n), f"t_* should be the action in degree {n}"
            assert f.is_surjective(n) and f.is_injective(n)
        assert intertwines(f, self.h, self.h)
        print("✓ Action induces itself test passed")

    def test_zero_map(self):
        f = induced_map(_zero(2, 2), _zero(1, 1), self.h, self.h)
        assert f.rank(0) == 1, "H_0 is always the identity"
        for n in range(1, 5):
            assert f.rank(n) == 0, f"zero slices induce zero in degree {n}"
            assert f.kernel_dim(n) == self.h.dim(n)
        print("✓ Zero map test passed")

    def test_compose(self):
        t = induced_map(UNIPOTENT, [[2]], self.h, self.h)
        square = t.compose(t)
        expected = induced_map([[1, 2], [0, 1]], [[1]], self.h, self.h)
        for n in range(5):
            assert square.matrix(n) == expected.matrix(n), f"(t²)_* != (t_*)² in degree {n}"
        print("✓ Composition test passed")

    def test_shape_checks(self):
        with pytest.raises(ShapeMismatch):
            induced_map(_identity(1), [[1]], self.h, self.h)
        other = homology_lambda_gamma(UNIPOTENT, [[2]], 5, 4)
        with pytest.raises(ShapeMismatch):
            induced_map(UNIPOTENT, [[2]], self.h, other)
        print("✓ Shape checks test passed")


class TestTwoColumn:
    """H_*(M ⋊ C, Z/p) from H_*(M, Z/p) with its action."""

    def test_klein_type_action(self):
        h = homology_lambda_gamma([[2]], [], 3, 2, 1, 0)
        report = two_column_semidirect(h)
        assert report.totals == (1, 1, 0), f"Z ⋊ C with t = -1 at p = 3, got {report.totals}"
        assert report.coinvariants == (1, 0, 0) and report.invariants == (0, 1, 0)
        print("✓ Klein-type two-column test passed")

    def test_unipotent_action(self):
        h = homology_lambda_gamma(UNIPOTENT, [], 3, 3, 2, 0)
        assert two_column_semidirect(h).totals == (1, 2, 2, 1), "Heisenberg homology mod 3"
        h = homology_lambda_gamma(_identity(2), [], 3, 3, 2, 0)
        assert two_column_semidirect(h).totals == (1, 3, 3, 1), "the 3-torus"
        print("✓ Unipotent two-column test passed")

    def test_comparison_identity(self):
        h = homology_lambda_gamma([[1]], [[1]], 3, 3)
        ident = induced_map([[1]], [[1]], h, h)
        cmp = two_column_semidirect(h, ident, h).comparison
        assert all(cmp.middle_surjective), f"identity is onto in every degree: {cmp.to_dict()}"
        assert all(cmp.split), "identity has an equivariant section"
        print("✓ Identity comparison test passed")

    def test_comparison_zero(self):
        h = homology_lambda_gamma([[1]], [[1]], 3, 3)
        zero = induced_map([[0]], [[0]], h, h)
        cmp = two_column_semidirect(h, zero, h).comparison
        assert cmp.left_surjective[0] and not cmp.left_surjective[1]
        assert cmp.right_surjective[1], "H_0 feeds the invariant column of degree 1"
        assert cmp.middle_surjective[1] is None, "four-lemma is inconclusive when only the right map is onto"
        assert cmp.split[0] is True and cmp.split[1] is False
        with pytest.raises(ShapeMismatch):
            two_column_semidirect(h, zero)
        print("✓ Zero comparison test passed")


def test_equivariant_section():
    """f s = id with s commuting with the actions."""
    s = equivariant_section([[1, 0]], [[1, 0], [0, 2]], [[1]], 3)
    assert s is not None and [r[0] for r in s] == [1, 0], f"section should pick the fixed line, got {s}"
    assert equivariant_section([[0, 1]], [[1, 0], [0, 2]], [[1]], 3) is None, "no fixed vector maps onto"
    assert equivariant_section([[1]], [[1]], [], 3) == [[]]
    print("✓ Equivariant section test passed")


def test_h2_certificates():
    """Bounds from Λ²(A/p) ↣ H_2(A) ↠ _pA."""
    g = FgAbGroup(0, (9, 9))
    cert = h2_certificates(AbHom.identity(g), 3)
    assert cert.surjective is True and cert.kernel_interval == (0, 0), f"Got {cert.to_dict()}"

    z3 = FgAbGroup(0, (3,))
    cert = h2_certificates(AbHom.build(z3, z3, [[0]]), 3)
    assert cert.torsion_kernel == 1 and cert.torsion_cokernel == 1
    assert cert.surjective is False
    assert cert.kernel_interval == (1, 1)
    print("✓ H_2 certificate test passed")


def _random_p_group(rng, p):
    """Free part plus p-power cyclic factors in divisibility order."""
    exponents = sorted(rng.randint(1, 3) for _ in range(rng.randint(0, 2)))
    return FgAbGroup(rng.randint(0, 2), tuple(p**e for e in exponents))


def _multiple_of_p_endomorphism(rng, group, p):
    """p·X for a random endomorphism X; both slice maps of it vanish."""
    orders = group.orders
    matrix = []
    for d_i in orders:
        row = []
        for d_j in orders:
            if d_i == 0 and d_j:
                row.append(0)
            elif d_i and d_j:
                row.append(p * rng.randint(-3, 3) * max(1, d_i // d_j))
            else:
                row.append(p * rng.randint(-3, 3))
        matrix.append(row)
    return AbHom.build(group, group, matrix)


def test_zero_slice_maps_induce_zero():
    """200 endomorphisms through pA: zero on H_n for 1 <= n <= 6."""
    rng = random.Random(0)
    checked = 0
    for _ in range(200):
        p = rng.choice([3, 5, 7])
        group = _random_p_group(rng, p)
        if group.is_trivial:
            continue
        f = _multiple_of_p_endomorphism(rng, group, p)
        h = homology_of_group(group, p, 6)
        induced = induced_map_of(f, h, h)
        assert induced.rank(0) == 1
        for n in range(1, 7):
            assert induced.rank(n) == 0, f"{group} at p={p}: degree {n} survives {f.to_list()}"
        checked += 1
    assert checked > 150
    print("✓ Zero slice map fuzz passed")


def test_dimension_bound_fuzz():
    """dim H_n(A, Z/p) <= (n+1)^(D_p - 1) on 200 groups; (Z/9)^2 meets it in degree 2."""
    rng = random.Random(1)
    groups = [(FgAbGroup(0, (9, 9)), 3)]
    while len(groups) < 200:
        p = rng.choice([3, 5, 7])
        groups.append((_random_p_group(rng, p), p))
    tight = []
    for group, p in groups:
        h = homology_of_group(group, p, 6)
        assert h.bound_holds(), f"{group} at p={p}: dims {h.dims}"
        for n in range(1, 7):
            if h.d_p >= 2 and h.dim(n) == (n + 1) ** (h.d_p - 1):
                tight.append((str(group), p, n))
    assert ("Z/9 + Z/9", 3, 2) in tight, f"tight instances: {tight[:5]}"
    print("✓ Dimension bound fuzz passed")


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.sampled_from([3, 5, 7]))
def test_poincare_series(v_dim, w_dim, p):
    """Σ dim H_n x^n = (1 + x)^v / (1 - x²)^w."""
    nmax = 6
    h = homology_lambda_gamma(_identity(v_dim), _identity(w_dim), p, nmax, v_dim, w_dim)
    x = sympy.Symbol("x")
    series = sympy.series((1 + x) ** v_dim / (1 - x**2) ** w_dim, x, 0, nmax + 1).removeO()
    for n in range(nmax + 1):
        coeff = series.coeff(x, n) if n else series.subs(x, 0)
        assert h.dim(n) == coeff == lambda_gamma_dim(v_dim, w_dim, n), f"degree {n}: {h.dim(n)} vs {coeff}"
    if w_dim <= v_dim:
        assert h.bound_holds(), f"dims {h.dims} break the (n+1)^(D_p - 1) bound"
    print("✓ Poincaré series property test passed")


def run_all_tests():
    """Run all tests."""
    print("Running Λ⊗Γ homology tests...")
    print("=" * 50)

    for cls in (TestLambdaGammaModel, TestInducedMaps, TestTwoColumn):
        for name in dir(cls):
            if name.startswith("test_"):
                instance = cls()
                if hasattr(instance, "setup_method"):
                    instance.setup_method()
                getattr(instance, name)()
    test_exterior_power_is_determinant()
    test_equivariant_section()
    test_h2_certificates()
    test_zero_slice_maps_induce_zero()
    test_dimension_bound_fuzz()
    test_poincare_series()

    print("=" * 50)
    print("✓ All tests passed!")


if __name__ == "__main__":
    run_all_tests()
