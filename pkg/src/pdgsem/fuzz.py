"""Differential fuzzing of the CFG and PDG semantics.

Each program in a campaign is ``random_cfg(seed * 1_000_003 + i)``, and
its initial store is drawn from a generator seeded the same way, so a
(seed, count, params) triple regenerates an identical report.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from typing import Optional

from .dependence import analyze, reach_sets
from .determinism import check_dpdg
from .execution import guided_run, pdg_run
from .explore import check_confluence, explore_all, lemma_audit
from .generate import GenParams, random_cfg, random_store
from .ir import cfg_run, format_value, returned_value
from .pdg import McaLimitExceeded, build_pdg

SEED_STRIDE = 1_000_003


def program_seed(seed: int, i: int) -> int:
    return seed * SEED_STRIDE + i


@dataclass
class ProgramResult:
    index: int
    seed: int
    nodes: int
    cond23: list[str] = field(default_factory=list)
    static: list[str] = field(default_factory=list)
    cond1: int = 0
    deterministic: Optional[bool] = None
    store: str = ""
    cfg_verdict: str = ""
    cfg_value: Optional[str] = None
    guided: Optional[str] = None  # None when the CFG run did not terminate
    guided_ok: Optional[bool] = None
    method: str = ""  # "explore", "sampled" or ""
    states: int = 0
    compared: int = 0
    mismatches: list[str] = field(default_factory=list)
    stuck: int = 0
    confluence: Optional[str] = None
    alarm: bool = False
    audit: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


@dataclass
class FuzzReport:
    seed: int
    count: int
    params: dict
    dynamic: bool
    programs: list[ProgramResult] = field(default_factory=list)

    def _n(self, pred) -> int:
        return sum(1 for p in self.programs if pred(p))

    @property
    def totals(self) -> dict:
        return {
            "programs": len(self.programs),
            "cond23_violations": self._n(lambda p: p.cond23),
            "static_lemma_failures": self._n(lambda p: p.static),
            "cond1_violators": self._n(lambda p: p.cond1),
            "deterministic": self._n(lambda p: p.deterministic),
            "cfg_terminated": self._n(lambda p: p.cfg_verdict == "terminated"),
            "guided_ok": self._n(lambda p: p.guided_ok is True),
            "guided_failed": self._n(lambda p: p.guided_ok is False),
            "explored": self._n(lambda p: p.method == "explore"),
            "sampled": self._n(lambda p: p.method == "sampled"),
            "compared_runs": sum(p.compared for p in self.programs),
            "value_mismatch_programs": self._n(lambda p: p.mismatches),
            "stuck_programs": self._n(lambda p: p.stuck),
            "confluence_fail": self._n(lambda p: p.confluence == "fail"),
            "confluence_alarms": self._n(lambda p: p.alarm),
            "audit_failure_programs": self._n(lambda p: p.audit),
        }

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "params": self.params,
            "dynamic": self.dynamic,
            "totals": self.totals,
            "programs": [asdict(p) for p in self.programs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def summary_lines(self) -> list[str]:
        return [f"{k}: {v}" for k, v in self.totals.items()]


def static_checks(cfg) -> list[str]:
    """Static reachability checks (sources of LIDD and
    def-order edges are unreachable from the target without back edges)."""
    a = analyze(cfg)
    rs = {n: reach_sets(cfg, a.loops, n).UR_prime for n in cfg.nodes}
    out = [f"lidd-order: LIDD({s},{t},{w}) but {s} reachable from {t}" for s, t, w in sorted(a.lidd) if s not in rs[t]]
    out += [f"deford-order: DefOrd({s},{t}) but {s} reachable from {t}" for s, t in sorted(a.deford) if s not in rs[t]]
    if a.lidd & a.lcdd:
        out.append(f"LIDD and LCDD overlap on {sorted(a.lidd & a.lcdd)}")
    return out


def run_program(
    index: int,
    pseed: int,
    params: GenParams,
    dynamic: bool = True,
    bound: int = 10_000,
    max_states: int = 20_000,
    samples: int = 32,
) -> ProgramResult:
    cfg = random_cfg(pseed, params)
    res = ProgramResult(index, pseed, len(cfg.nodes))
    res.static = static_checks(cfg)
    pdg = build_pdg(cfg)
    try:
        rep = check_dpdg(pdg)
    except McaLimitExceeded as exc:
        res.notes.append(f"dpdg check skipped: {exc}")
        rep = None
    if rep is not None:
        res.cond23 = [v.line() for v in rep.violations if v.cond in (2, 3)]
        res.cond1 = len(rep.by_condition(1))
        res.deterministic = rep.deterministic
    if not dynamic:
        return res

    store = random_store(cfg, random.Random(pseed))
    res.store = ",".join(f"{k}={format_value(v)}" for k, v in sorted(store.items()))
    trace = cfg_run(cfg, store, bound)
    res.cfg_verdict = trace.verdict
    if not trace.terminated:
        return res
    expected = returned_value(cfg, trace)
    res.cfg_value = format_value(expected)
    g = guided_run(pdg, store, trace.order, trace.stores)
    res.guided_ok = g.ok
    res.guided = g.describe()
    if g.ok and not _same(g.ret_value, expected):
        res.mismatches.append(f"guided run returned {format_value(g.ret_value)}")

    ex = explore_all(pdg, store, max_states=max_states, max_depth=4 * bound)
    res.states = ex.states
    if ex.complete:
        res.method = "explore"
        res.stuck = len(ex.stuck)
        for val, count in sorted(ex.ret_values.items(), key=lambda kv: repr(kv[0])):
            res.compared += count
            if not _same(val, expected):
                res.mismatches.append(f"{count} explored run(s) returned {format_value(val)}")
        if rep is not None:
            conf = check_confluence(ex, rep)
            res.confluence = "pass" if conf.passed else "fail"
            res.alarm = conf.alarm
            audit = lemma_audit(pdg, ex, rep)
            res.audit = audit.failures[:10]
    else:
        res.method = "sampled"
        for s in range(samples):
            run = pdg_run(pdg, store, strategy="random", seed=s, bound=4 * bound)
            res.stuck += run.verdict == "stuck"
            if run.ret_count:
                res.compared += 1
                if not _same(run.ret_value, expected):
                    res.mismatches.append(f"seed {s} returned {format_value(run.ret_value)}")
    return res


def _same(a, b) -> bool:
    return type(a) is type(b) and a == b


def fuzz_campaign(
    seed: int,
    count: int,
    params: Optional[GenParams] = None,
    dynamic: bool = True,
    bound: int = 10_000,
    max_states: int = 20_000,
) -> FuzzReport:
    if count < 1:
        raise ValueError("count must be at least 1")
    params = params or GenParams()
    report = FuzzReport(seed, count, asdict(params), dynamic)
    for i in range(count):
        report.programs.append(
            run_program(i, program_seed(seed, i), params, dynamic, bound, max_states)
        )
    return report
