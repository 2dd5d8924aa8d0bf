#!/usr/bin/env python3
"""
Test suite for C-modules, truncations, completion towers and Fitting splittings.
"""

import pytest
import sympy

from metabelian_completion.cmod import (
    FiniteModule,
    LatticeModule,
    LocalizedModule,
    RawModule,
    SumModule,
    completion_tower,
    construct,
    double_completion_check,
    fitting_check,
    nilpotent_q_action,
    presentation_agrees,
    q_action_is_homomorphism,
    rational_fitting,
    tame_check,
    truncate,
)
from metabelian_completion.errors import (
    DepthExceeded,
    InfiniteRank,
    NonUnitDenominator,
    NotAnAutomorphism,
    SpecFormatError,
    Unsupported,
)
from metabelian_completion.utils import Flavor

KLEIN = LatticeModule(((-1,),))
HEISENBERG = LatticeModule(((1, 1), (0, 1)))
SOL = LatticeModule(((2, 1), (1, 1)))
TORUS_P3 = LatticeModule(((1, 3), (3, 10)))
BS12 = LocalizedModule(m=2, t_num=2)
BS13 = LocalizedModule(m=3, t_num=3)
FINITE9 = FiniteModule.from_factors([9], [[4]])
KLEIN_RAW = {"kind": "raw", "generators": 1, "relators": [[{"1": 1, "0": 1}]]}


class TestConstruction:
    """Module specs and their validation."""

    def test_lattice_round_trip(self):
        spec = {"kind": "lattice", "matrix": [[1, 1], [0, 1]]}
        module = construct(spec)
        assert module == HEISENBERG, f"Expected the Heisenberg lattice, got {module}"
        assert module.to_spec() == spec
        print("✓ Lattice round trip test passed")

    def test_sum_and_localized_specs(self):
        module = construct(
            {"kind": "sum", "parts": [{"kind": "lattice", "matrix": [[-1]]}, {"kind": "finite", "factors": [9], "action": [[4]]}]}
        )
        assert isinstance(module, SumModule) and len(module.parts) == 2
        localized = construct({"kind": "localized", "m": 2, "matrix": [["2"]]})
        assert localized.rank == 1 and localized.rational_action() == sympy.Matrix([[2]])
        print("✓ Sum and localized specs test passed")

    def test_rejections(self):
        with pytest.raises(SpecFormatError):
            construct({"kind": "tensor"})
        with pytest.raises(SpecFormatError):
            construct({"matrix": [[1]]})
        with pytest.raises(SpecFormatError):
            construct({"kind": "lattice"})
        with pytest.raises(NotAnAutomorphism):
            construct({"kind": "lattice", "matrix": [[2]]})
        with pytest.raises(NonUnitDenominator):
            construct({"kind": "localized", "m": 2, "matrix": [["1/3"]]})
        with pytest.raises(NotAnAutomorphism):
            LocalizedModule(m=2, t_num=3)
        with pytest.raises(Unsupported):
            LocalizedModule(m=6, t_num=2)
        with pytest.raises(Unsupported):
            construct({"kind": "localized", "m": 2, "t_num": -1})
        with pytest.raises(NotAnAutomorphism):
            FiniteModule.from_factors([2, 4], [[1, 0], [1, 1]])
        print("✓ Rejections test passed")


class TestTruncation:
    """M/MI^i, M/MI_p^i and M/(MI^i + p^N M)."""

    def test_klein_I_powers(self):
        for i in range(1, 7):
            stage = truncate(KLEIN, Flavor.I, i)
            assert stage.group.torsion == (2**i,), f"M/MI^{i} should be Z/2^{i}, got {stage.group}"
            assert stage.group.action_matrix() == [[2**i - 1]], "t acts by -1"
        print("✓ Klein I-adic truncation test passed")

    def test_heisenberg_and_unit_cases(self):
        assert truncate(HEISENBERG, Flavor.I, 1).group.rank == 1, "M/MI is Z"
        assert truncate(HEISENBERG, Flavor.I, 2).group.rank == 2, "MI^2 = 0"
        assert truncate(BS12, Flavor.I, 3).group.is_trivial, "t - 1 is a unit on Z[1/2]"
        assert truncate(SOL, Flavor.I, 2).group.is_trivial, "a - 1 is invertible for Sol"
        assert truncate(BS13, Flavor.I, 3).group.torsion == (8,), "t - 1 = 2 on Z[1/3]"
        print("✓ Heisenberg and unit cases test passed")

    def test_ip_and_mixed(self):
        assert truncate(KLEIN, Flavor.IP, 3, p=2).group.torsion == (8,)
        assert truncate(KLEIN, Flavor.IP, 3, p=3).group.is_trivial, "I_3 is the unit ideal on Klein"
        assert truncate(KLEIN, Flavor.MIXED, 5, p=2, precision=3).group.torsion == (8,)
        assert truncate(FINITE9, Flavor.IP, 1, p=3).group.torsion == (3,)
        assert truncate(FINITE9, Flavor.IP, 2, p=3).group.torsion == (9,)
        print("✓ I_p and mixed truncation test passed")

    def test_raw_kronecker_route(self):
        raw = construct(KLEIN_RAW)
        assert isinstance(raw, RawModule) and not raw.structured
        assert truncate(raw, Flavor.I, 3).group.torsion == (8,), "Z[C]/(t + 1) at depth 3 is Z/8"
        assert presentation_agrees(KLEIN, Flavor.I, 3)
        assert presentation_agrees(HEISENBERG, Flavor.IP, 2, p=3)
        print("✓ Raw Kronecker route test passed")

    def test_transitions(self):
        deep, shallow = truncate(KLEIN, Flavor.I, 3), truncate(KLEIN, Flavor.I, 2)
        transition = deep.transition_to(shallow)
        assert transition.matrix[0][0] % 2 == 1, "Z/8 -> Z/4 should be onto"
        with pytest.raises(ValueError):
            shallow.transition_to(deep)
        print("✓ Transitions test passed")

    def test_invalid_requests(self):
        with pytest.raises(ValueError):
            truncate(KLEIN, Flavor.I, 0)
        with pytest.raises(ValueError):
            truncate(KLEIN, Flavor.IP, 2)
        with pytest.raises(ValueError):
            truncate(KLEIN, Flavor.MIXED, 2, p=2)
        with pytest.raises(InfiniteRank):
            truncate(LocalizedModule(m=2, matrix=((1, 0), (0, 1))), Flavor.I, 1)
        print("✓ Invalid requests test passed")


def test_tame_check():
    """Integral characteristic polynomials and finite torsion."""
    for module in (KLEIN, HEISENBERG, SOL, TORUS_P3, BS12, BS13, FINITE9):
        assert tame_check(module).tame, f"{module} should be tame"
    wild = LocalizedModule(m=6, t_num=3, t_den=2)
    report = tame_check(wild)
    assert report.tame is False and report.integral is False and report.inverse_integral is False

    with pytest.raises(Unsupported) as excinfo:
        tame_check(construct(KLEIN_RAW))
    assert excinfo.value.partial.to_dict()["torsion_finite"] == "unknown"
    print("✓ Tame check test passed")


class TestCompletionTowers:
    """Stabilization of the I-, I_p- and mixed towers."""

    def test_klein_at_two(self):
        tower = completion_tower(KLEIN, Flavor.I, 2)
        assert tower.report.index == 1, f"Expected stabilization at depth 1, got {tower.report.index}"
        assert tower.limit.invariant_factors() == ["Z_2"], f"Got {tower.limit.invariant_factors()}"
        assert tower.stages[2].torsion == (8,)
        print("✓ Klein tower at 2 test passed")

    def test_trivial_limits(self):
        assert completion_tower(KLEIN, Flavor.I, 3).limit.invariant_factors() == []
        assert completion_tower(BS12, Flavor.I, 3).limit.invariant_factors() == []
        assert completion_tower(BS12, Flavor.IP, 2).limit.invariant_factors() == [], "Z[1/2] has no 2-adic part"
        print("✓ Trivial limits test passed")

    def test_heisenberg_lattice_limit(self):
        tower = completion_tower(HEISENBERG, Flavor.I, 2)
        assert tower.report.index == 2, "the quotient stabilizes once MI^2 = 0"
        limit = tower.limit
        assert (limit.z_rank, limit.zp_rank, limit.w_dim) == (2, 0, 0), f"Got {limit.to_dict()}"
        print("✓ Heisenberg limit test passed")

    def test_torsion_limits(self):
        limit = completion_tower(FINITE9, Flavor.IP, 3).limit
        assert limit.invariant_factors() == ["Z/3^2"], f"Got {limit.invariant_factors()}"
        assert limit.w_dim == 1 and limit.v_dim == 1
        limit = completion_tower(BS13, Flavor.IP, 2).limit
        assert limit.invariant_factors() == ["Z_2"], "Z[1/3] completes to Z_2 at 2"
        print("✓ Torsion limits test passed")

    def test_depth_exceeded(self):
        with pytest.raises(DepthExceeded) as excinfo:
            completion_tower(KLEIN, Flavor.I, 2, cap=3)
        assert len(excinfo.value.partial["stages"]) == 3
        print("✓ Depth exceeded test passed")


def test_double_completion_identity():
    """I_p-completion mod p^N agrees with the mixed tower."""
    for module, p in ((KLEIN, 2), (HEISENBERG, 3), (FINITE9, 3), (BS13, 2)):
        report = double_completion_check(module, p, 3)
        assert report.agrees, f"double completion disagrees: {report.to_dict()}"
    assert double_completion_check(KLEIN, 2, 3).mixed_exponents == (3,)
    print("✓ Double completion test passed")


def test_fitting_check():
    """Finite Fitting splitting of t - 1 on M/p^N M."""
    check = fitting_check(KLEIN, 2, 3)
    assert check.exponent == 3 and check.kernel_order == 8 and check.image_order == 1
    assert check.passed, f"Fitting check failed: {check.to_dict()}"
    assert fitting_check(HEISENBERG, 3, 2).passed
    with pytest.raises(Unsupported):
        fitting_check(construct(KLEIN_RAW), 2, 3)
    print("✓ Fitting check test passed")


def test_rational_fitting():
    """V = V̂_I ⊕ VI^∞ over Q."""
    expected = {
        "klein": (KLEIN, 0, 1),
        "heisenberg": (HEISENBERG, 2, 0),
        "sol": (SOL, 0, 2),
        "torus_p3": (TORUS_P3, 0, 2),
        "bs1_2": (BS12, 0, 1),
        "finite9": (FINITE9, 0, 0),
    }
    for name, (module, nil, div) in expected.items():
        v = rational_fitting(module)
        assert (v.nilpotent_dim, v.divisible_dim) == (nil, div), f"{name}: got {v.to_dict()}"
        assert v.is_direct
    print("✓ Rational Fitting test passed")


def test_nilpotent_q_action():
    """t^α on the unipotent Heisenberg module."""
    v = rational_fitting(HEISENBERG)
    half = nilpotent_q_action(v, sympy.Rational(1, 2))
    assert half * half == sympy.Matrix([[1, 1], [0, 1]]), f"(t^1/2)^2 should be t, got {half * half}"
    assert q_action_is_homomorphism(v, sympy.Rational(1, 3), sympy.Rational(2, 5))
    assert nilpotent_q_action(rational_fitting(SOL), 2) == sympy.zeros(0, 0)
    print("✓ Nilpotent Q-action test passed")


def run_all_tests():
    """Run all tests."""
    print("Running C-module tests...")
    print("=" * 50)

    for cls in (TestConstruction, TestTruncation, TestCompletionTowers):
        instance = cls()
        for name in dir(instance):
            if name.startswith("test_"):
                getattr(instance, name)()
    test_tame_check()
    test_double_completion_identity()
    test_fitting_check()
    test_rational_fitting()
    test_nilpotent_q_action()

    print("=" * 50)
    print("✓ All tests passed!")


if __name__ == "__main__":
    run_all_tests()
