#!/usr/bin/env python3
"""
Test suite for the mgc command line.
"""

import io
import json
from unittest.mock import patch

import pytest

from metabelian_completion.utils import Flavor, Ring
from metabelian_completion.verify.cli import build_parser, format_human, main, write_csv

EPI_RESULT = {
    "success": True,
    "group": "klein",
    "R": "Z",
    "p": 2,
    "degrees": [
        {"n": 0, "dimG": 1, "dimGhat": 1, "surjective": True, "split": True, "route": "formula"},
        {"n": 1, "dimG": 2, "dimGhat": 2, "surjective": True, "split": None, "route": "chain"},
    ],
    "verified": True,
}


def test_parser():
    """Subcommands and typed options."""
    parser = build_parser()
    args = parser.parse_args(["truncate", "klein", "--flavor", "mixed", "--depth", "3", "-p", "2", "-N", "4"])
    assert args.flavor is Flavor.MIXED and args.depth == 3 and args.precision == 4
    args = parser.parse_args(["--seed", "7", "verify-epi", "sol", "-R", "Q"])
    assert args.ring is Ring.Q and args.p == 0 and args.seed == 7
    with pytest.raises(SystemExit):
        parser.parse_args(["verify-epi", "sol", "-R", "Z/p"])
    with pytest.raises(SystemExit):
        parser.parse_args(["truncate", "klein"])
    print("✓ Parser test passed")


def test_verify_epi_json(capsys):
    code = main(["--json", "verify-epi", "klein", "-R", "Z", "-p", "2", "--nmax", "2"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0, f"klein at 2 should verify: {out}"
    assert [d["dimG"] for d in out["degrees"]] == [1, 2, 1]
    assert out["R"] == "Z" and out["verified"] is True
    print("✓ verify-epi JSON test passed")


def test_homology_human(capsys):
    code = main(["homology", "klein", "-p", "2", "--nmax", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "dims: [1, 2, 1]" in out, f"Got {out}"
    print("✓ Homology human output test passed")


def test_unknown_group(capsys):
    code = main(["tame", "no_such_group"])
    out = capsys.readouterr().out
    assert code == 1
    assert out.startswith("[error] Failed to load group")
    print("✓ Unknown group test passed")


@patch("metabelian_completion.verify.cli.VerificationService")
def test_zoo_dispatch(mock_service_class, capsys):
    service = mock_service_class.return_value
    service.zoo.return_value = {
        "success": True,
        "rows": [{"group": "klein", "check": "dwyer", "R": "Z", "p": 2, "success": True, "verified": False}],
        "failed": 1,
        "verified": False,
    }

    code = main(["--csv", "zoo", "klein"])

    assert code == 1, "an unverified row fails the run"
    service.zoo.assert_called_once_with(["klein"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "group,check,R,p,success,verified"
    assert lines[1] == "klein,dwyer,Z,2,True,False"

    service.zoo.reset_mock()
    main(["zoo", "--all"])
    service.zoo.assert_called_once_with(None)
    print("✓ Zoo dispatch test passed")


@patch("metabelian_completion.verify.cli.VerificationService")
def test_seed_reaches_fuzz(mock_service_class):
    service = mock_service_class.return_value
    service.specseq_fuzz.return_value = {"success": True, "verified": True}
    assert main(["--seed", "5", "specseq-fuzz", "--seeds", "10", "--size", "3"]) == 0
    service.specseq_fuzz.assert_called_once_with(10, 3, 5, 3)
    print("✓ Seed forwarding test passed")


def test_formatting():
    """Degree tables for humans and CSV rows for scripts."""
    text = format_human(EPI_RESULT)
    assert "group: klein" in text
    assert "dimGhat" in text and "yes" in text and "chain" in text
    assert format_human({"success": False, "error": "boom"}) == "[error] boom"

    out = io.StringIO()
    write_csv(EPI_RESULT, out)
    rows = out.getvalue().splitlines()
    assert rows[0] == "group,R,p,n,dimG,dimGhat,surjective,split,route"
    assert rows[2] == "klein,Z,2,1,2,2,True,,chain"
    print("✓ Formatting test passed")


def run_all_tests():
    """Run all tests."""
    print("Running mgc command line tests...")
    print("=" * 50)

    test_parser()
    test_formatting()

    print("=" * 50)
    print("✓ All tests passed!")


if __name__ == "__main__":
    run_all_tests()
