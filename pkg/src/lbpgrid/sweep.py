"""Sweeps over one-run boundaries: theorem check and lemma check.

Each boundary is handled by a pure function of its wire string so the work
can be fanned out over processes; results are sorted by boundary string
before they are aggregated, so output does not depend on ``jobs``.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

from .convergence import LemmaSweep, replay_proof, sweep_lemmas
from .grid import BoundaryConfig, enumerate_one_run_boundaries, make_grid
from .messages import LocalSolutionField, estimates, first_stable_iteration, run
from .oracle import (CAP_DP, CAP_ENUM, SizeGuardError, brute_force_min_marginals,
                     dp_min_marginals, local_solutions)
from .regions import closed_form_local_solutions, region_decomposition

#: Extra iterations past 2N used to confirm that messages have stopped changing.
SETTLE = 10


@dataclass
class RunReport:
    boundary: str
    N: int
    stable_from: int | None
    estimates: LocalSolutionField
    oracle: LocalSolutionField | None = None
    closed_form: LocalSolutionField | None = None
    oracle_method: str = ""
    enum_agrees: bool | None = None
    seconds: float = 0.0

    @property
    def match(self) -> bool:
        return self.oracle is not None and self.estimates == self.oracle

    @property
    def within_bound(self) -> bool:
        return self.stable_from is not None and self.stable_from <= 2 * self.N

    @property
    def ok(self) -> bool:
        return (self.match and self.within_bound and self.enum_agrees is not False
                and (self.closed_form is None or self.closed_form == self.oracle))

    def problems(self) -> list[str]:
        out = []
        if not self.within_bound:
            out.append(f"stable from {self.stable_from}, bound {2 * self.N}")
        if self.oracle is not None and not self.match:
            out.append(f"estimate differs from oracle at {self.estimates.mismatches(self.oracle)}")
        if self.enum_agrees is False:
            out.append("enumeration and row-sweep oracles disagree")
        if self.closed_form is not None and self.oracle is not None and self.closed_form != self.oracle:
            out.append(f"closed form differs from oracle at {self.closed_form.mismatches(self.oracle)}")
        return out

    def to_json(self) -> dict:
        return {"boundary": self.boundary, "N": self.N, "stable_from": self.stable_from,
                "estimates": self.estimates.to_json(),
                "oracle": None if self.oracle is None else self.oracle.to_json(),
                "closed_form": None if self.closed_form is None else self.closed_form.to_json(),
                "oracle_method": self.oracle_method, "enum_agrees": self.enum_agrees,
                "match": self.match, "ok": self.ok, "seconds": round(self.seconds, 6)}


def check_boundary(x: BoundaryConfig, cap_enum: int = CAP_ENUM, cap_dp: int = CAP_DP,
                   with_regions: bool = True) -> RunReport:
    """Run LBP to ``2N + SETTLE`` and compare the ``2N`` estimate with the oracles."""
    t0 = time.perf_counter()
    g = make_grid(x.N)
    N = g.N
    trace = run(x, 2 * N + SETTLE)
    est = estimates(trace.state(2 * N))
    mm = dp_min_marginals(g, x, cap_dp)
    oracle = local_solutions(mm)
    enum_ok = None
    method = "dp"
    if N <= cap_enum:
        enum_ok = brute_force_min_marginals(g, x, cap_enum) == mm
        method = "dp+enum"
    closed = None
    if with_regions:
        closed = closed_form_local_solutions(region_decomposition(g, x, oracle_field=oracle))
    return RunReport(x.to_string(), N, first_stable_iteration(trace), est, oracle, closed,
                     method, enum_ok, time.perf_counter() - t0)


@dataclass
class SweepSummary:
    N: int
    tested: int = 0
    violations: list[dict] = field(default_factory=list)
    lemma_counts: dict = field(default_factory=dict)
    stable_histogram: dict = field(default_factory=dict)
    seconds: float = 0.0
    kind: str = "verify"

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        d = asdict(self)
        d["stable_histogram"] = {str(k): v for k, v in sorted(self.stable_histogram.items(),
                                                                key=lambda kv: (kv[0] is None, kv[0] or 0))}
        d["ok"] = self.ok
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SweepSummary":
        d = dict(d)
        d.pop("ok", None)
        d["stable_histogram"] = {None if k == "None" else int(k): v
                               for k, v in d.get("stable_histogram", {}).items()}
        return cls(**d)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _boundaries(N: int, dedup_symmetry: bool) -> list[str]:
    return sorted(x.to_string() for x in enumerate_one_run_boundaries(make_grid(N), dedup_symmetry))


def _theorem_job(args) -> dict:
    s, cap_enum, cap_dp = args
    rep = check_boundary(BoundaryConfig.from_string(s), cap_enum, cap_dp)
    return {"boundary": s, "stable_from": rep.stable_from, "ok": rep.ok,
            "problems": rep.problems(), "seconds": rep.seconds}


def _lemma_job(args) -> dict:
    s, n0 = args
    x = BoundaryConfig.from_string(s)
    N = x.N
    trace = run(x, 2 * N + SETTLE if n0 == 0 else 4 * N + SETTLE)
    sw = sweep_lemmas(trace, None if n0 == "auto" else n0)
    replay = replay_proof(x)
    problems = [json.dumps(v, sort_keys=True) for v in sw.violations]
    if not replay.ok:
        problems.append(f"case replay {replay.case} failed: "
                        f"undetermined={len(replay.undetermined)} conflicts={len(replay.conflicts)}")
    return {"boundary": s, "counts": sw.counts(), "case": replay.case, "ok": not problems,
            "problems": problems, "stable_from": first_stable_iteration(trace)}


def _fan_out(fn: Callable, items: list, jobs: int) -> list[dict]:
    if jobs <= 1 or len(items) < 2:
        out = [fn(it) for it in items]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            out = list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
    return sorted(out, key=lambda r: r["boundary"])


def verify_sweep(N: int, jobs: int = 1, cap_enum: int = CAP_ENUM, cap_dp: int = CAP_DP,
                 dedup_symmetry: bool = False, rows: list | None = None) -> SweepSummary:
    """Every one-run boundary at size ``N`` against the theorem."""
    if N > cap_dp:
        raise SizeGuardError(f"N={N} exceeds the row-sweep cap {cap_dp}")
    t0 = time.perf_counter()
    items = [(s, cap_enum, cap_dp) for s in _boundaries(N, dedup_symmetry)]
    results = _fan_out(_theorem_job, items, jobs)
    summ = SweepSummary(N, len(results))
    for r in results:
        k = r["stable_from"]
        summ.stable_histogram[k] = summ.stable_histogram.get(k, 0) + 1
        if not r["ok"]:
            summ.violations.append({"boundary": r["boundary"], "problems": r["problems"]})
    if rows is not None:
        rows.extend(results)
    summ.seconds = time.perf_counter() - t0
    return summ


def lemma_sweep(N: int, jobs: int = 1, n0="0", dedup_symmetry: bool = False,
                cap: int = 6, rows: list | None = None) -> SweepSummary:
    if N > cap:
        raise SizeGuardError(f"N={N} exceeds the lemma sweep cap {cap}")
    t0 = time.perf_counter()
    n0v = "auto" if str(n0) == "auto" else int(n0)
    items = [(s, n0v) for s in _boundaries(N, dedup_symmetry)]
    results = _fan_out(_lemma_job, items, jobs)
    summ = SweepSummary(N, len(results), kind="lemmas")
    total = LemmaSweep()
    cases: dict[str, int] = {}
    for r in results:
        total.merge(LemmaSweep(**r["counts"]))
        cases[r["case"]] = cases.get(r["case"], 0) + 1
        k = r["stable_from"]
        summ.stable_histogram[k] = summ.stable_histogram.get(k, 0) + 1
        if not r["ok"]:
            summ.violations.append({"boundary": r["boundary"], "problems": r["problems"]})
    summ.lemma_counts = {**total.counts(), "cases": dict(sorted(cases.items()))}
    if rows is not None:
        rows.extend(results)
    summ.seconds = time.perf_counter() - t0
    return summ


def write_rows_csv(path, rows: Iterable[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            flat = dict(r)
            if "counts" in flat:
                flat.update(flat["counts"])
            flat["problems"] = "; ".join(flat.get("problems", []))
            w.writerow(flat)
