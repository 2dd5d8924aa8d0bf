#!/usr/bin/env python3
"""
Test suite for the VerificationService class.
"""

from unittest.mock import Mock, patch

import pytest

from metabelian_completion import utils
from metabelian_completion.errors import UnsupportedAtTwo
from metabelian_completion.utils import Flavor, Ring
from metabelian_completion.verify import ZOO
from metabelian_completion.verify.service import NO_GROUP, VerificationService

KLEIN_RAW = '{"kind": "raw", "generators": 1, "relators": [[{"1": 1, "0": 1}]]}'
OK = {"success": True, "verified": True}


class TestVerificationService:
    """Test class for VerificationService functionality."""

    def setup_method(self):
        """Set up test fixtures."""
        self.service = VerificationService("missing-mgc.ini")

    def test_initialization(self):
        """Defaults apply when the settings file is missing."""
        assert self.service.settings == utils.DEFAULTS
        assert self.service.module is None
        assert self.service.group is None
        print("✓ Initialization test passed")

    def test_settings_file(self, tmp_path):
        path = tmp_path / "mgc.ini"
        path.write_text("[DEFAULT]\nnmax = 3\nseed = 11\n")
        service = VerificationService(str(path))
        assert service.settings["nmax"] == 3 and service.settings["seed"] == 11
        assert service.settings["depth_cap"] == utils.DEFAULTS["depth_cap"]
        print("✓ Settings file test passed")

    def test_load_group_success(self):
        result = self.service.load_group("klein")
        assert result["success"] is True
        assert result["message"] == "Group loaded successfully"
        assert result["group"]["name"] == "klein"
        assert self.service.group is not None
        print("✓ Load group success test passed")

    def test_load_group_failure(self):
        self.service.load_group("klein")
        result = self.service.load_group("no_such_group")
        assert result["success"] is False
        assert "Failed to load group" in result["error"]
        assert self.service.group is None and self.service.module is None
        print("✓ Load group failure test passed")

    def test_no_group_loaded(self):
        for call in (
            lambda: self.service.tame(),
            lambda: self.service.truncate(Flavor.I, 2),
            lambda: self.service.homology(2),
            lambda: self.service.complete(2),
            lambda: self.service.verify_epi(Ring.Z, 2),
            lambda: self.service.lcs(),
            lambda: self.service.dwyer(2),
        ):
            result = call()
            assert result["success"] is False and result["error"] == NO_GROUP
        print("✓ No group loaded test passed")

    def test_homology(self):
        self.service.load_group("klein")
        result = self.service.homology(2, nmax=2)
        assert result["success"] is True
        assert result["dims"] == [1, 2, 1], f"Got {result['dims']}"
        assert result["verified"] is True
        print("✓ Homology test passed")

    def test_truncate_uses_configured_precision(self):
        self.service.load_group("klein")
        with patch("metabelian_completion.verify.service.truncate") as mock_truncate:
            mock_truncate.return_value.to_dict.return_value = {"group": "Z/8"}
            result = self.service.truncate(Flavor.MIXED, 3, p=2)
        assert result == {"success": True, "truncation": {"group": "Z/8"}, "verified": True}
        mock_truncate.assert_called_once_with(self.service.module, Flavor.MIXED, 3, 2, utils.DEFAULTS["precision"])
        print("✓ Truncate precision test passed")

    def test_raw_module(self, tmp_path):
        path = tmp_path / "raw.json"
        path.write_text(KLEIN_RAW)
        loaded = self.service.load_group(str(path))
        assert loaded["success"] is True and self.service.group is None
        assert self.service.truncate(Flavor.I, 3)["success"] is True

        result = self.service.tame()
        assert result["success"] is False
        assert "partial" in result, "the partial tameness report is passed on"
        assert self.service.homology(3)["error"] == NO_GROUP, "group-level checks need a structured module"
        print("✓ Raw module test passed")

    @patch("metabelian_completion.verify.service.verify_epimorphism")
    def test_verify_epi_failure_keeps_partial(self, mock_verify):
        mock_verify.side_effect = UnsupportedAtTwo("no chain route", partial={"dims": [1, 2]})
        self.service.load_group("klein")

        result = self.service.verify_epi(Ring.Z, 2)

        assert result["success"] is False
        assert result["error"] == "Failed to verify epimorphism: no chain route"
        assert result["partial"] == {"dims": [1, 2]}
        mock_verify.assert_called_once_with(
            self.service.group,
            Ring.Z,
            2,
            utils.DEFAULTS["nmax"],
            utils.DEFAULTS["depth_cap"],
            utils.DEFAULTS["chain_budget"],
        )
        print("✓ Verify epimorphism failure test passed")

    @patch("metabelian_completion.verify.service.rational_verify")
    def test_verify_epi_rational(self, mock_rational):
        report = Mock()
        report.to_dict.return_value = {"R": "Q", "verified": True}
        mock_rational.return_value = report
        self.service.load_group("sol")

        result = self.service.verify_epi(Ring.Q, nmax=3)

        assert result == {"success": True, "R": "Q", "verified": True}
        mock_rational.assert_called_once_with(self.service.group, 3)
        print("✓ Rational verify routing test passed")

    @patch("metabelian_completion.verify.service.fuzz_comparison")
    def test_specseq_fuzz_defaults(self, mock_fuzz):
        report = Mock(passed=True)
        report.to_dict.return_value = {"passed": True}
        mock_fuzz.return_value = report

        result = self.service.specseq_fuzz()

        assert result["success"] is True and result["verified"] is True
        mock_fuzz.assert_called_once_with(seeds=200, size=4, p=3, seed=0)
        print("✓ Fuzz defaults test passed")

    def test_prufer(self):
        result = self.service.prufer(3)
        assert result["success"] is True and result["verified"] is True
        result = self.service.prufer(2)
        assert result["success"] is False and "Prüfer" in result["error"]
        print("✓ Prüfer test passed")

    def test_lcs_rational(self):
        self.service.load_group("heisenberg")
        result = self.service.lcs(Ring.Q, 5)
        assert result["success"] is True
        assert result["prenilpotence"]["index"] == 3
        assert result["verified"] is True
        print("✓ Rational lower central series test passed")

    def test_zoo_rows(self):
        """One row per check, prime and ring; failures are counted."""
        with patch.object(VerificationService, "complete", return_value=OK), patch.object(
            VerificationService, "verify_epi", return_value=OK
        ), patch.object(VerificationService, "lcs", return_value=OK), patch.object(
            VerificationService, "prufer", return_value=OK
        ), patch.object(
            VerificationService, "dwyer", return_value={"success": False, "error": "boom"}
        ):
            result = self.service.zoo(["klein"])

        assert result["success"] is True
        rows = result["rows"]
        assert len(rows) == 3 * 4 + 2 + 2, f"Got {len(rows)} rows"
        assert result["failed"] == 3, "one Dwyer row per prime fails"
        assert result["verified"] is False
        assert {r["check"] for r in rows} == {"complete", "verify-epi", "dwyer", "lcs", "prufer"}
        print("✓ Zoo rows test passed")


ZOO_CHECKS = {
    "complete": lambda service, p: service.complete(p),
    "verify-epi Z": lambda service, p: service.verify_epi(Ring.Z, p),
    "verify-epi Zp": lambda service, p: service.verify_epi(Ring.ZP, p),
    "dwyer": lambda service, p: service.dwyer(p),
}


@pytest.mark.parametrize("check", sorted(ZOO_CHECKS))
@pytest.mark.parametrize("name,p", [(name, p) for name in sorted(ZOO) for p in ZOO[name].primes])
def test_zoo_member_verifies(name, p, check):
    """Completion identity, Fitting splitting, epimorphisms and the H_2 limit, unmocked."""
    service = VerificationService("missing-mgc.ini")
    assert service.load_group(name)["success"] is True
    result = ZOO_CHECKS[check](service, p)
    assert result["success"] is True, f"{name} p={p} {check}: {result.get('error')}"
    assert result["verified"] is True, f"{name} p={p} {check} not verified: {result}"


@pytest.mark.parametrize("name", sorted(ZOO))
def test_zoo_member_verifies_rationally(name):
    service = VerificationService("missing-mgc.ini")
    service.load_group(name)
    epi = service.verify_epi(Ring.Q)
    assert epi["success"] is True and epi["verified"] is True, f"{name}: {epi}"
    lcs = service.lcs(Ring.Q)
    assert lcs["success"] is True and lcs["prenilpotence"]["index"] is not None, f"{name}: {lcs}"
    assert lcs["verified"] is True


def run_all_tests():
    """Run all tests."""
    print("Running VerificationService tests...")
    print("=" * 50)

    test_instance = TestVerificationService()
    for name in dir(test_instance):
        if name.startswith("test_") and name not in ("test_settings_file", "test_raw_module"):
            test_instance.setup_method()
            getattr(test_instance, name)()

    print("=" * 50)
    print("✓ All tests passed!")


if __name__ == "__main__":
    run_all_tests()
