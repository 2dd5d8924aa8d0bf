#!/usr/bin/env python3
"""
Test suite for the exact linear algebra layer.
"""

import random

import pytest
import sympy

from metabelian_completion.errors import SingularMatrix
from metabelian_completion.linalg import (
    IntMatrix,
    ModMatrix,
    charpoly_rational,
    coordinates,
    determinant,
    hermite_basis,
    integer_kernel,
    inverse_mod_p,
    kernel_image_mod_p,
    lattice_index,
    mat_mul,
    mat_vec,
    p_valuation,
    rank_mod_p,
    smith_normal_form,
    solve_mod_p,
    stable_fitting,
)

pytest.importorskip("hypothesis")

from hypothesis import given, settings, strategies as st  # noqa: E402


@st.composite
def int_matrices(draw, max_dim=6, bound=100):
    nrows = draw(st.integers(1, max_dim))
    ncols = draw(st.integers(1, max_dim))
    rows = draw(st.lists(st.lists(st.integers(-bound, bound), min_size=ncols, max_size=ncols), min_size=nrows, max_size=nrows))
    return rows, nrows, ncols


def _check_chain(diagonal, divides):
    nonzero = [d for d in diagonal if d]
    assert list(diagonal[: len(nonzero)]) == nonzero, f"zeros must come last: {diagonal}"
    for a, b in zip(nonzero, nonzero[1:]):
        assert divides(a, b), f"divisibility chain broken: {diagonal}"


@settings(max_examples=200, deadline=None)
@given(int_matrices())
def test_integer_snf_properties(data):
    """U·M·V = D with a divisibility chain and unimodular transforms."""
    rows, nrows, ncols = data
    m = IntMatrix.from_rows(rows, ncols)
    snf = smith_normal_form(m)

    assert (snf.U @ m @ snf.V).to_list() == snf.diagonal_matrix(), "U·M·V should be diagonal"
    assert all(d >= 0 for d in snf.diagonal), f"diagonal should be non-negative: {snf.diagonal}"
    _check_chain(snf.diagonal, lambda a, b: b % a == 0)
    assert abs(determinant(snf.U.to_list())) == 1, "U should be unimodular"
    assert abs(determinant(snf.V.to_list())) == 1, "V should be unimodular"
    if nrows == ncols:
        product = 1
        for d in snf.diagonal:
            product *= d
        assert abs(determinant(rows)) == product, "|det| should be preserved"
    print("✓ Integer SNF property test passed")


@settings(max_examples=100, deadline=None)
@given(int_matrices(max_dim=5, bound=1000), st.sampled_from([2, 3, 5]), st.integers(1, 4))
def test_local_snf_properties(data, p, precision):
    """Over Z/p^N the diagonal consists of increasing powers of p, then zeros."""
    rows, _, ncols = data
    m = ModMatrix.from_rows(rows, p, precision, ncols)
    snf = smith_normal_form(m)
    q = p**precision

    product = mat_mul(mat_mul(snf.U.to_list(), m.to_list(), q), snf.V.to_list(), q)
    assert product == [[x % q for x in r] for r in snf.diagonal_matrix()], "U·M·V should be diagonal mod p^N"
    for d in snf.diagonal:
        if d:
            assert d == p ** p_valuation(d, p), f"diagonal entry {d} is not a power of {p}"
            assert d < q, "diagonal entries live below p^N"
    _check_chain(snf.diagonal, lambda a, b: b % a == 0)
    print("✓ Local SNF property test passed")


def test_snf_fixed_values():
    """Known invariant factors."""
    snf = smith_normal_form(IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]))
    assert snf.diagonal == (2, 6, 12), f"Expected (2, 6, 12), got {snf.diagonal}"

    snf = smith_normal_form(IntMatrix.from_rows([[0, 0], [0, 0]]))
    assert snf.diagonal == (0, 0) and snf.rank == 0, "zero matrix has rank 0"

    snf = smith_normal_form(ModMatrix.from_rows([[9, 0], [0, 4]], 3, 2))
    assert sorted(snf.diagonal) == [0, 1], f"diag(9, 4) mod 9 is diag(1, 0), got {snf.diagonal}"
    print("✓ SNF fixed values test passed")


def test_integer_kernel():
    """Kernel vectors are annihilated and span the right rank."""
    rng = random.Random(7)
    for _ in range(50):
        nrows, ncols = rng.randint(1, 4), rng.randint(1, 5)
        a = [[rng.randint(-5, 5) for _ in range(ncols)] for _ in range(nrows)]
        kernel = integer_kernel(a, ncols)
        for v in kernel:
            assert mat_vec(a, v) == [0] * nrows, f"{v} is not in the kernel of {a}"
        rank = sympy.Matrix(a).rank()
        assert len(kernel) == ncols - rank, "kernel dimension should be ncols - rank"
    assert integer_kernel([], 3) == [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "empty matrix has full kernel"
    print("✓ Integer kernel test passed")


def test_hermite_basis_and_index():
    """Hermite bases give lattice indices and coordinates."""
    basis = hermite_basis([[2, 0], [0, 3], [4, 3]], 2)
    assert lattice_index(basis, 2) == 6, f"Expected index 6, got {lattice_index(basis, 2)}"
    assert coordinates(basis, [4, 9]) is not None, "(4, 9) lies in 2Z ⊕ 3Z"
    assert coordinates(basis, [1, 0]) is None, "(1, 0) does not lie in 2Z ⊕ 3Z"
    assert lattice_index(hermite_basis([[1, 1]], 2), 2) == 0, "rank-deficient lattice has index 0"

    basis = hermite_basis([[2, 1], [0, 3]], 2)
    assert lattice_index(basis, 2) == 6, "index equals |det| of the generators"
    print("✓ Hermite basis test passed")


def test_mod_p_elimination():
    """Rank-nullity, solving and inverses over Z/p."""
    rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert rank_mod_p(rows, 5) == 2, "second row is twice the first"
    ki = kernel_image_mod_p(rows, 5)
    assert ki.rank + len(ki.kernel) == 3, "rank + nullity should be 3"
    for v in ki.kernel:
        assert all(x % 5 == 0 for x in mat_vec(rows, v)), "kernel vectors are annihilated"

    x = solve_mod_p([[1, 1], [0, 1]], [[3], [1]], 7)
    assert x == [[2], [1]], f"Expected x = (2, 1), got {x}"
    assert solve_mod_p([[1, 1], [1, 1]], [[0], [1]], 3) is None, "inconsistent system"

    inv = inverse_mod_p([[2, 1], [1, 1]], 3)
    assert mat_mul([[2, 1], [1, 1]], inv, 3) == [[1, 0], [0, 1]], "inverse mod 3"
    with pytest.raises(SingularMatrix):
        inverse_mod_p([[1, 2], [2, 4]], 3)
    print("✓ Mod-p elimination test passed")


def test_stable_fitting_nilpotent_and_invertible():
    """Fitting splitting of a nilpotent and of an invertible endomorphism."""
    nil = stable_fitting(ModMatrix.from_rows([[0, 1], [0, 0]], 3, 1))
    assert nil.exponent == 2, f"Expected exponent 2, got {nil.exponent}"
    assert nil.image_order == 1 and nil.kernel_order == 9, "nilpotent part is everything"
    assert nil.is_direct, "Im ⊕ Ker should be the module"

    inv = stable_fitting(ModMatrix.from_rows([[2, 0], [0, 2]], 3, 1))
    assert inv.exponent == 1, "invertible maps stabilize at once"
    assert inv.image_order == 9 and inv.kernel_order == 1, "invertible part is everything"
    assert inv.is_direct
    print("✓ Stable Fitting test passed")


def test_charpoly_rational():
    """Characteristic polynomials of t and t^-1 with integrality."""
    report = charpoly_rational([[2, 1], [1, 1]])
    assert report.coefficients == (1, -3, 1), f"Expected x^2 - 3x + 1, got {report.coefficients}"
    assert report.integral and report.inverse_integral

    report = charpoly_rational([[2]])
    assert report.integral, "x - 2 is integral"
    assert report.inverse_coefficients == (1, sympy.Rational(-1, 2)), "inverse has charpoly x - 1/2"
    assert report.inverse_integral is False

    with pytest.raises(SingularMatrix):
        charpoly_rational([[0, 1], [0, 0]])
    print("✓ Characteristic polynomial test passed")


def test_p_valuation():
    assert p_valuation(12, 2) == 2
    assert p_valuation(7, 3) == 0
    assert p_valuation(0, 3, cap=5) == 5
    print("✓ p-valuation test passed")


def run_all_tests():
    """Run all tests."""
    print("Running exact linear algebra tests...")
    print("=" * 50)

    test_integer_snf_properties()
    test_local_snf_properties()
    test_snf_fixed_values()
    test_integer_kernel()
    test_hermite_basis_and_index()
    test_mod_p_elimination()
    test_stable_fitting_nilpotent_and_invertible()
    test_charpoly_rational()
    test_p_valuation()

    print("=" * 50)
    print("✓ All tests passed!")


if __name__ == "__main__":
    run_all_tests()
