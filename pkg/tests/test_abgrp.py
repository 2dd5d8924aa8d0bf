#!/usr/bin/env python3
"""
Test suite for finitely generated abelian groups and their homomorphisms.
"""

import pytest

from metabelian_completion.abgrp import (
    AbHom,
    FgAbGroup,
    direct_sum,
    divisibility_depth,
    from_relation_matrix,
    in_multiple,
    induced_on_slices,
    kernel_generators,
    limit_slices,
    p_primary,
    quotient,
    rank_profile,
    subgroup,
)
from metabelian_completion.errors import IllFormedHom, NotAnAutomorphism
from metabelian_completion.linalg import IntMatrix, determinant

pytest.importorskip("hypothesis")

from hypothesis import given, settings, strategies as st  # noqa: E402


def _cyclic(d):
    return FgAbGroup(0, (d,))


def test_invariant_factor_form():
    """Relation matrices present groups in invariant-factor form."""
    g = from_relation_matrix(2, IntMatrix.from_rows([[2, 4], [6, 8]])).group
    assert g.torsion == (2, 4) and g.rank == 0, f"Expected Z/2 + Z/4, got {g}"
    assert g.order == 8

    g = from_relation_matrix(3, IntMatrix.from_rows([[2], [0], [0]])).group
    assert g.torsion == (2,) and g.rank == 2, f"Expected Z/2 + Z^2, got {g}"
    assert str(g) == "Z/2 + Z + Z"
    assert str(FgAbGroup(0)) == "0"
    print("✓ Invariant factor form test passed")


def test_group_validation():
    """Torsion chains and automorphisms are validated on construction."""
    with pytest.raises(ValueError):
        FgAbGroup(0, (4, 2))
    with pytest.raises(ValueError):
        FgAbGroup(0, (1,))
    with pytest.raises(NotAnAutomorphism):
        FgAbGroup(2, (), ((2, 0), (0, 1)))
    with pytest.raises(NotAnAutomorphism):
        FgAbGroup(0, (4,), ((2,),))
    g = FgAbGroup(0, (9,), ((13,),))
    assert g.action_matrix() == [[4]], "actions are reduced modulo the orders"
    print("✓ Group validation test passed")


def test_elementary_divisors():
    g = FgAbGroup(1, (2, 12))
    assert g.elementary_divisors() == {2: [1, 2], 3: [1]}, f"Got {g.elementary_divisors()}"
    assert g.p_exponents(5) == []
    profile = rank_profile(g, 2)
    assert (profile.d_q, profile.d_p, profile.dim_mod_p) == (1, 2, 3)
    print("✓ Elementary divisors test passed")


def test_rank_profiles():
    """(d_Q, d_p, D_p, dim A/p) with dim A/p read off the relations mod p."""
    cases = [
        (FgAbGroup(0, (2, 4)), 2, (0, 2, 2, 2)),
        (FgAbGroup(2), 5, (2, 0, 2, 2)),
        (FgAbGroup(0, (6,)), 3, (0, 1, 1, 1)),
        (FgAbGroup(1, (3, 15)), 5, (1, 1, 2, 2)),
        (FgAbGroup(0, (7,)), 3, (0, 0, 0, 0)),
    ]
    for group, p, expected in cases:
        profile = rank_profile(group, p)
        got = (profile.d_q, profile.d_p, profile.big_d, profile.dim_mod_p)
        assert got == expected, f"{group} at p={p}: {got}"
    print("✓ Rank profile test passed")


def test_homomorphisms():
    """Well-formedness, composition and application."""
    with pytest.raises(IllFormedHom):
        AbHom.build(_cyclic(2), FgAbGroup(1), [[1]])
    with pytest.raises(IllFormedHom):
        AbHom.build(_cyclic(2), _cyclic(4), [[1]])
    with pytest.raises(IllFormedHom):
        AbHom.build(_cyclic(2), _cyclic(4), [[2, 0]])
    doubling = AbHom.build(_cyclic(2), _cyclic(4), [[2]])
    assert doubling.apply([1]) == [2]

    reduce4 = AbHom.build(FgAbGroup(1), _cyclic(4), [[1]])
    reduce2 = AbHom.build(_cyclic(4), _cyclic(2), [[1]])
    composite = reduce2.compose(reduce4)
    assert composite.to_list() == [[1]] and composite.target == _cyclic(2)
    assert AbHom.build(_cyclic(3), _cyclic(3), [[3]]).is_zero()
    print("✓ Homomorphisms test passed")


def test_sums_quotients_subgroups():
    assert direct_sum([_cyclic(2), _cyclic(3)]).group.torsion == (6,), "Z/2 + Z/3 = Z/6"
    assert quotient(FgAbGroup(1), [[4]]).group.torsion == (4,), "Z / 4Z = Z/4"

    pres, incl = subgroup(_cyclic(4), [[2]])
    assert pres.group.torsion == (2,), f"<2> in Z/4 is Z/2, got {pres.group}"
    assert incl.apply([1]) == [2]

    f = AbHom.build(FgAbGroup(1), _cyclic(3), [[1]])
    for g in kernel_generators(f):
        assert f.apply(g) == [0], f"{g} should lie in the kernel"
    print("✓ Sums, quotients and subgroups test passed")


def test_multiples_and_slices():
    z4 = _cyclic(4)
    assert in_multiple(z4, [2], 2) and not in_multiple(z4, [1], 2)
    assert in_multiple(_cyclic(3), [1], 2), "2 is invertible mod 3"

    s = induced_on_slices(AbHom.build(_cyclic(2), z4, [[2]]), 2)
    assert s.quotient == ((0,),), "Z/2 -> Z/4, 1 -> 2 is zero mod 2"
    assert s.torsion == ((1,),), "but injective on 2-torsion"

    s = induced_on_slices(AbHom.identity(_cyclic(9)), 3)
    assert s.quotient == ((1,),) and s.torsion == ((1,),)
    print("✓ Multiples and slices test passed")


def test_p_primary():
    part, proj, incl = p_primary(FgAbGroup(0, (12,)), 2)
    assert part.torsion == (4,), f"2-primary part of Z/12 is Z/4, got {part}"
    assert proj.compose(incl).to_list() == [[1]], "projection after inclusion is the identity"
    print("✓ p-primary test passed")


def test_tower_helpers():
    """Divisibility depth and slice ranks along Z/2 <- Z/4 <- Z/8."""
    stages = [_cyclic(2), _cyclic(4), _cyclic(8)]
    transitions = [
        AbHom.build(stages[1], stages[0], [[1]]),
        AbHom.build(stages[2], stages[1], [[1]]),
    ]
    assert divisibility_depth(stages, transitions, 2) == {2: 0}
    assert divisibility_depth(stages, transitions, 4) == {2: 1}
    assert divisibility_depth(stages, transitions, 12) == {2: 1, 3: 0}
    ranks = limit_slices(transitions, 2)
    assert ranks == {"quotient_ranks": [1, 1], "torsion_ranks": [0, 0]}, f"Got {ranks}"
    print("✓ Tower helpers test passed")


@settings(max_examples=100, deadline=None)
@given(
    st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=n, max_size=n)
    )
)
def test_presentation_properties(rows):
    """Order equals |det| and the lift is a section of the projection."""
    n = len(rows)
    pres = from_relation_matrix(n, IntMatrix.from_rows(rows, n))
    det = determinant(rows)
    if det:
        assert pres.group.order == abs(det), f"order {pres.group.order} != |det| {abs(det)}"
    else:
        assert pres.group.rank >= 1, "singular relations leave a free part"
    for j in range(pres.group.ngens):
        column = [r[j] for r in pres.lift]
        expected = [1 if i == j else 0 for i in range(pres.group.ngens)]
        assert pres.project(column) == expected, "projection ∘ lift should be the identity"
    print("✓ Presentation property test passed")


def run_all_tests():
    """Run all tests."""
    print("Running abelian group tests...")
    print("=" * 50)

    test_invariant_factor_form()
    test_group_validation()
    test_elementary_divisors()
    test_rank_profiles()
    test_homomorphisms()
    test_sums_quotients_subgroups()
    test_multiples_and_slices()
    test_p_primary()
    test_tower_helpers()
    test_presentation_properties()

    print("=" * 50)
    print("✓ All tests passed!")


if __name__ == "__main__":
    run_all_tests()
