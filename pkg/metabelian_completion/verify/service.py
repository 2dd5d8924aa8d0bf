"""
Stateful front end of the harness: load a group once, then run checks on it.

Every method returns a dictionary. Successful runs carry ``"success": True``
and a ``"verified"`` flag; failures carry ``"success": False``, an ``"error"``
message and, when the library produced one, a ``"partial"`` report.
"""

from typing import Any, Callable, Dict, List, Optional

from .. import utils
from ..cmod import completion_tower, double_completion_check, fitting_check, tame_check, truncate
from ..specseq import fuzz_comparison
from ..utils import Flavor, Ring
from .dwyer import dwyer_filtration, prufer_remark
from .epimorphism import group_homology, verify_epimorphism
from .lcs import lcs_quotients, q_prenilpotence_index
from .rational import rational_verify
from .zoo import ZOO, GroupSpec, load_group, load_module

logger = utils.get_logger(__name__)

NO_GROUP = "No group loaded. Please call load_group() first."


def _failure(action: str, e: Exception) -> Dict[str, Any]:
    out: Dict[str, Any] = {"success": False, "error": f"Failed to {action}: {str(e)}"}
    partial = getattr(e, "partial", None)
    if partial is not None:
        out["partial"] = partial
    return out


class VerificationService:
    """
    End-to-end service that loads a group G = M ⋊ C and runs truncation,
    homology, completion and theorem checks against it.
    """

    def __init__(self, config_path: str = utils.CONFIG_FILE):
        """Initialize the service with settings read from ``config_path``."""
        self.settings = utils.load_config(config_path)
        self.module = None
        self.group: Optional[GroupSpec] = None

    def load_group(self, name_or_path: str) -> Dict[str, Any]:
        """
        Load a zoo member or a JSON module spec.

        Raw presentations load as a module only; they support ``tame`` and
        ``truncate`` but no group-level checks.

        Args:
            name_or_path: zoo name or path to a JSON file

        Returns:
            Dictionary containing success status and the group description
        """
        try:
            self.module = load_module(name_or_path)
            self.group = load_group(name_or_path) if self.module.structured else None
            return {
                "success": True,
                "message": "Group loaded successfully",
                "group": self.group.to_dict() if self.group else {"module": self.module.to_spec()},
            }
        except Exception as e:
            self.module = self.group = None
            return _failure("load group", e)

    def _nmax(self, nmax: Optional[int]) -> int:
        return self.settings["nmax"] if nmax is None else nmax

    def tame(self) -> Dict[str, Any]:
        """Tameness report of M."""
        if self.module is None:
            return {"success": False, "error": NO_GROUP}
        try:
            report = tame_check(self.module)
            return {"success": True, "tame": report.to_dict(), "verified": bool(report.tame)}
        except Exception as e:
            return _failure("check tameness", e)

    def truncate(
        self,
        flavor: Flavor,
        depth: int,
        p: Optional[int] = None,
        precision: Optional[int] = None,
    ) -> Dict[str, Any]:
        """
        M/MI^i, M/MI_p^i or M/(MI^i + p^N M) of the loaded module.

        Args:
            flavor: Flavor.I, Flavor.IP or Flavor.MIXED
            depth: i >= 1
            p: prime for I_p and mixed
            precision: N for mixed (defaults to the configured precision)

        Returns:
            Dictionary containing the truncation
        """
        if self.module is None:
            return {"success": False, "error": NO_GROUP}
        if flavor is Flavor.MIXED and precision is None:
            precision = self.settings["precision"]
        try:
            stage = truncate(self.module, flavor, depth, p, precision)
            return {"success": True, "truncation": stage.to_dict(), "verified": True}
        except Exception as e:
            return _failure("truncate", e)

    def homology(self, p: int, nmax: Optional[int] = None) -> Dict[str, Any]:
        """dim H_n(G, Z/p) for n <= nmax."""
        if self.group is None:
            return {"success": False, "error": NO_GROUP}
        try:
            result = group_homology(self.group, p, self._nmax(nmax), self.settings["chain_budget"])
            return {
                "success": True,
                "group": self.group.name,
                "p": p,
                "dims": list(result.dims),
                "route": result.route,
                "verified": True,
            }
        except Exception as e:
            return _failure("compute homology", e)

    def complete(self, p: int) -> Dict[str, Any]:
        """
        Both completion towers at p, with the double completion identity and
        the finite Fitting splitting.

        Returns:
            Dictionary containing the towers and checks; verified when both
            checks pass
        """
        if self.group is None:
            return {"success": False, "error": NO_GROUP}
        cap, precision = self.settings["depth_cap"], self.settings["precision"]
        try:
            via_i = completion_tower(self.group.module, Flavor.I, p, cap)
            via_ip = completion_tower(self.group.module, Flavor.IP, p, cap)
            double = double_completion_check(self.group.module, p, precision, cap)
            fitting = fitting_check(self.group.module, p, precision, cap)
            return {
                "success": True,
                "group": self.group.name,
                "p": p,
                "I": via_i.to_dict(),
                "Ip": via_ip.to_dict(),
                "double_completion": double.to_dict(),
                "fitting": fitting.to_dict(),
                "verified": double.agrees and fitting.passed,
            }
        except Exception as e:
            return _failure("complete", e)

    def verify_epi(self, ring: Ring, p: int = 0, nmax: Optional[int] = None) -> Dict[str, Any]:
        """
        Check H_n(G, K) -> H_n(Ĝ_R, K) is onto for n <= nmax.

        Args:
            ring: Ring.Z, Ring.ZP or Ring.Q (p is ignored for Q)
            p: prime
            nmax: top degree (defaults to the configured nmax)

        Returns:
            Dictionary containing the epimorphism report
        """
        if self.group is None:
            return {"success": False, "error": NO_GROUP}
        try:
            if ring is Ring.Q:
                report = rational_verify(self.group, self._nmax(nmax))
            else:
                report = verify_epimorphism(
                    self.group,
                    ring,
                    p,
                    self._nmax(nmax),
                    self.settings["depth_cap"],
                    self.settings["chain_budget"],
                )
            return {"success": True, **report.to_dict()}
        except Exception as e:
            return _failure("verify epimorphism", e)

    def lcs(self, ring: Ring = Ring.Z, imax: Optional[int] = None) -> Dict[str, Any]:
        """Lower central quotients G/γ_i^R and, over Q, the prenilpotence index."""
        if self.group is None:
            return {"success": False, "error": NO_GROUP}
        try:
            terms = lcs_quotients(self.group, ring, imax)
            out = {
                "success": True,
                "group": self.group.name,
                "R": ring.value,
                "terms": [t.to_dict() for t in terms],
                "verified": True,
            }
            if ring is Ring.Q:
                index = q_prenilpotence_index(self.group, imax)
                out["prenilpotence"] = index.to_dict()
                out["verified"] = index.consistent
            return out
        except Exception as e:
            return _failure("compute lower central quotients", e)

    def dwyer(self, p: int, imax: Optional[int] = None, ring: Ring = Ring.Z) -> Dict[str, Any]:
        """Dwyer filtration of H_2(G, Z/p) along the lower R-central series."""
        if self.group is None:
            return {"success": False, "error": NO_GROUP}
        try:
            report = dwyer_filtration(self.group, p, ring, imax, self.settings["chain_budget"])
            return {"success": True, **report.to_dict()}
        except Exception as e:
            return _failure("compute Dwyer filtration", e)

    def prufer(self, p: int, stages: int = 4) -> Dict[str, Any]:
        """The Z/p^∞ direct system against its Z/p-completion."""
        try:
            report = prufer_remark(p, stages)
            return {"success": True, **report.to_dict(), "verified": report.holds}
        except Exception as e:
            return _failure("check the Prüfer system", e)

    def specseq_fuzz(
        self,
        seeds: Optional[int] = None,
        size: int = 4,
        seed: Optional[int] = None,
        p: int = 3,
    ) -> Dict[str, Any]:
        """Seeded comparison-lemma fuzz over random bicomplex morphisms."""
        seeds = self.settings["fuzz_seeds"] if seeds is None else seeds
        seed = self.settings["seed"] if seed is None else seed
        try:
            report = fuzz_comparison(seeds=seeds, size=size, p=p, seed=seed)
            return {"success": True, **report.to_dict(), "verified": report.passed}
        except Exception as e:
            return _failure("run spectral sequence fuzz", e)

    def _zoo_rows(self, name: str, p: int) -> List[Dict[str, Any]]:
        checks: List[tuple] = [
            ("complete", Ring.ZP, lambda: self.complete(p)),
            ("verify-epi", Ring.Z, lambda: self.verify_epi(Ring.Z, p)),
            ("verify-epi", Ring.ZP, lambda: self.verify_epi(Ring.ZP, p)),
            ("dwyer", Ring.Z, lambda: self.dwyer(p)),
        ]
        return [self._zoo_row(name, check, ring, p, run) for check, ring, run in checks]

    @staticmethod
    def _zoo_row(name: str, check: str, ring: Ring, p: int, run: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
        result = run()
        return {
            "group": name,
            "check": check,
            "R": ring.value,
            "p": p,
            "success": result["success"],
            "verified": bool(result.get("verified")),
            "error": result.get("error"),
            "result": result,
        }

    def zoo(self, names: Optional[List[str]] = None) -> Dict[str, Any]:
        """
        Run every theorem check over zoo members and their primes.

        Non-tame members are listed but their completion claims are skipped.

        Args:
            names: zoo members to run (all of them by default)

        Returns:
            Dictionary with one row per (group, check, R, p); verified when
            every asserted check succeeded
        """
        rows: List[Dict[str, Any]] = []
        try:
            for name in names or list(ZOO):
                loaded = self.load_group(name)
                if not loaded["success"]:
                    rows.append(
                        {"group": name, "check": "load", "success": False, "verified": False, "error": loaded["error"]}
                    )
                    continue
                if not self.group.tame():
                    logger.warning("zoo: %s is not tame, completion checks skipped", name)
                    continue
                for p in self.group.primes:
                    rows.extend(self._zoo_rows(name, p))
                rows.append(self._zoo_row(name, "verify-epi", Ring.Q, 0, lambda: self.verify_epi(Ring.Q)))
                rows.append(self._zoo_row(name, "lcs", Ring.Q, 0, lambda: self.lcs(Ring.Q)))
            for p in (3, 5):
                rows.append(self._zoo_row("prufer", "prufer", Ring.ZP, p, lambda: self.prufer(p)))
        except Exception as e:
            return _failure("run the zoo", e)
        failed = [r for r in rows if not (r["success"] and r["verified"])]
        for r in failed:
            logger.warning("zoo: %s %s R=%s p=%s not verified: %s", r["group"], r["check"], r.get("R"), r.get("p"), r["error"])
        return {"success": True, "rows": rows, "failed": len(failed), "verified": not failed}
