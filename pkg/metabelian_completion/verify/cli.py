"""The ``mgc`` command line."""

import argparse
import csv
import json
import sys
from typing import Any, Dict, List, Optional, Sequence

from .. import utils
from ..utils import Flavor, Ring
from .service import VerificationService

logger = utils.get_logger(__name__)

DEGREE_COLUMNS = ("n", "dimG", "dimGhat", "surjective", "split", "route")
ZOO_COLUMNS = ("group", "check", "R", "p", "success", "verified")


def _ring(value: str) -> Ring:
    try:
        return Ring(value)
    except ValueError:
        raise argparse.ArgumentTypeError("R must be one of Z, Zp, Q")


def _flavor(value: str) -> Flavor:
    try:
        return Flavor(value)
    except ValueError:
        raise argparse.ArgumentTypeError("flavor must be one of I, Ip, mixed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mgc", description="Completions and homology of metabelian groups M ⋊ C.")
    parser.add_argument("--json", action="store_true", help="print the report as JSON")
    parser.add_argument("--csv", action="store_true", help="print the report as CSV")
    parser.add_argument("--seed", type=int, default=None, help="seed for every fuzzer (default: from mgc.ini)")
    parser.add_argument("--config", default=utils.CONFIG_FILE, help="settings file (default: %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tame", help="tameness of the module")
    p.add_argument("spec", help="zoo name or JSON module spec")

    p = sub.add_parser("truncate", help="one stage of a completion tower")
    p.add_argument("spec")
    p.add_argument("--flavor", type=_flavor, default=Flavor.I)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("-p", type=int, default=None)
    p.add_argument("-N", dest="precision", type=int, default=None)

    p = sub.add_parser("homology", help="dim H_n(G, Z/p)")
    p.add_argument("spec")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("--nmax", type=int, default=None)

    p = sub.add_parser("complete", help="I- and I_p-towers with the double completion and Fitting checks")
    p.add_argument("spec")
    p.add_argument("-p", type=int, required=True)

    p = sub.add_parser("verify-epi", help="H_n(G) -> H_n(Ĝ_R) is onto")
    p.add_argument("spec")
    p.add_argument("-R", dest="ring", type=_ring, default=Ring.Z)
    p.add_argument("-p", type=int, default=0)
    p.add_argument("--nmax", type=int, default=None)

    p = sub.add_parser("lcs", help="lower central quotients G/γ_i^R")
    p.add_argument("spec")
    p.add_argument("-R", dest="ring", type=_ring, default=Ring.Z)
    p.add_argument("--imax", type=int, default=None)

    p = sub.add_parser("dwyer", help="Dwyer filtration of H_2(G, Z/p)")
    p.add_argument("spec")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-R", dest="ring", type=_ring, default=Ring.Z)
    p.add_argument("--imax", type=int, default=None)

    p = sub.add_parser("prufer", help="H_2 of Z/p^i along the inclusions")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("--stages", type=int, default=4)

    p = sub.add_parser("specseq-fuzz", help="comparison lemma on random bicomplex morphisms")
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--size", type=int, default=4)
    p.add_argument("-p", type=int, default=3)

    p = sub.add_parser("zoo", help="every check over the built-in groups")
    p.add_argument("--all", action="store_true", help="run all members (default)")
    p.add_argument("names", nargs="*", help="members to run")
    return parser


def run(service: VerificationService, args: argparse.Namespace) -> Dict[str, Any]:
    """Dispatch a parsed command to the service."""
    if args.command == "specseq-fuzz":
        return service.specseq_fuzz(args.seeds, args.size, args.seed, args.p)
    if args.command == "prufer":
        return service.prufer(args.p, args.stages)
    if args.command == "zoo":
        return service.zoo(None if args.all or not args.names else args.names)

    loaded = service.load_group(args.spec)
    if not loaded["success"]:
        return loaded
    if args.command == "tame":
        return service.tame()
    if args.command == "truncate":
        return service.truncate(args.flavor, args.depth, args.p, args.precision)
    if args.command == "homology":
        return service.homology(args.p, args.nmax)
    if args.command == "complete":
        return service.complete(args.p)
    if args.command == "verify-epi":
        return service.verify_epi(args.ring, args.p, args.nmax)
    if args.command == "lcs":
        return service.lcs(args.ring, args.imax)
    if args.command == "dwyer":
        return service.dwyer(args.p, args.imax, args.ring)
    return {"success": False, "error": f"Unknown command: {args.command}"}


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def _table(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> List[str]:
    cells = [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[k]) for row in cells]) for k, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in cells)
    return lines


def format_human(result: Dict[str, Any]) -> str:
    if not result.get("success"):
        return "[error] %s" % result.get("error")
    lines: List[str] = []
    head = {k: v for k, v in result.items() if not isinstance(v, (dict, list)) and k != "success"}
    lines.extend("%s: %s" % (k, _cell(v)) for k, v in head.items())
    if "degrees" in result:
        lines.extend(_table(result["degrees"], DEGREE_COLUMNS))
    if "rows" in result:
        lines.extend(_table(result["rows"], ZOO_COLUMNS))
    if "stages" in result and isinstance(result["stages"], list):
        columns = ("i", "h2_quotient", "phi", "limit_image", "route")
        lines.extend(_table(result["stages"], columns))
    for key in ("truncation", "tame", "dims"):
        if key in result:
            lines.append("%s: %s" % (key, json.dumps(result[key])))
    return "\n".join(lines)


def write_csv(result: Dict[str, Any], out) -> None:
    writer = csv.writer(out)
    if "degrees" in result:
        writer.writerow(("group", "R", "p") + DEGREE_COLUMNS)
        for d in result["degrees"]:
            writer.writerow([result["group"], result["R"], result["p"]] + [d.get(c) for c in DEGREE_COLUMNS])
    elif "rows" in result:
        writer.writerow(ZOO_COLUMNS)
        for r in result["rows"]:
            writer.writerow([r.get(c) for c in ZOO_COLUMNS])
    else:
        writer.writerow(("key", "value"))
        for k, v in result.items():
            writer.writerow((k, json.dumps(v) if isinstance(v, (dict, list)) else v))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of ``mgc``.

    Returns:
        0 when the command succeeded and its checks verified, 1 otherwise
    """
    args = build_parser().parse_args(argv)
    service = VerificationService(args.config)
    logger.info("mgc %s", args.command)
    result = run(service, args)
    if args.json:
        print(json.dumps(result, indent=2, default=str))
    elif args.csv:
        write_csv(result, sys.stdout)
    else:
        print(format_human(result))
    return 0 if result.get("success") and result.get("verified") else 1


if __name__ == "__main__":
    sys.exit(main())
