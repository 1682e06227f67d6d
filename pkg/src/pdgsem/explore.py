"""Exhaustive interleaving exploration and the checks built on it.

:func:`explore_all` expands every executable node at every reachable
state, one depth layer at a time, counting how many runs reach each
state so that run lengths can be tallied without enumerating runs.
The layer key pairs the PDG state with the value ``ret`` observed
(``None`` until the return node has executed), since whether a
quiescent state finished normally depends on the path taken.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .determinism import DpdgReport, check_dpdg
from .execution import PdgState, agrees_at, guided_run, machine, pdg_run
from .ir import Cfg, EvalError, Ret, Value, cfg_run, format_value, returned_value
from .pdg import Pdg, build_pdg, subgraph

_PENDING = None  # ret value slot before the return node executes


@dataclass
class Exploration:
    pdg: Pdg
    init: PdgState
    states: int = 0
    transitions: int = 0
    finals: dict = field(default_factory=dict)  # PdgState -> set of depths
    histogram: Counter = field(default_factory=Counter)  # run length -> run count
    stuck: set = field(default_factory=set)
    ret_values: Counter = field(default_factory=Counter)  # ret value -> run count
    errors: Counter = field(default_factory=Counter)  # message -> run count
    verdict: str = "complete"
    graph: dict = field(default_factory=dict, repr=False)  # PdgState -> {node: PdgState | None}

    @property
    def complete(self) -> bool:
        return self.verdict == "complete"

    @property
    def runs(self) -> int:
        return sum(self.histogram.values())

    @property
    def lengths(self) -> list[int]:
        return sorted(self.histogram)

    def summary(self) -> dict:
        return {
            "verdict": self.verdict,
            "states": self.states,
            "transitions": self.transitions,
            "final_states": len(self.finals),
            "run_lengths": {str(k): v for k, v in sorted(self.histogram.items())},
            "stuck_states": len(self.stuck),
            "ret_values": {format_value(k): v for k, v in sorted(self.ret_values.items(), key=lambda kv: repr(kv[0]))},
            "runtime_errors": dict(sorted(self.errors.items())),
        }


def _successors(m, graph: dict, s: PdgState) -> dict:
    succ = graph.get(s)
    if succ is None:
        succ = {}
        for n in m.next_nodes(s):
            try:
                succ[n] = m.step(s, n)
            except EvalError as exc:
                succ[n] = exc
        graph[s] = succ
    return succ


def explore_all(
    pdg: Pdg,
    store: Mapping[str, Value],
    max_states: int = 100_000,
    max_depth: int = 10_000,
) -> Exploration:
    m = machine(pdg)
    init = m.init_state(store)
    ex = Exploration(pdg, init)
    ret = m.ret_nodes[0] if m.ret_nodes else None
    ret_var = pdg.statements[ret].var if ret is not None else None
    graph = ex.graph
    layer: dict = {(init, _PENDING): 1}
    depth = 0
    while layer:
        if depth >= max_depth:
            ex.verdict = "depth-limit"
            break
        nxt: dict = {}
        for (s, rv), count in layer.items():
            succ = _successors(m, graph, s)
            if len(graph) > max_states:
                ex.verdict = "state-limit"
                break
            if not succ:
                ex.finals.setdefault(s, set()).add(depth)
                ex.histogram[depth] += count
                if rv is _PENDING:
                    ex.stuck.add(s)
                else:
                    ex.ret_values[rv[0]] += count
                continue
            for n, t in succ.items():
                if isinstance(t, Exception):
                    ex.errors[f"node {n}: {t}"] += count
                    ex.histogram[depth + 1] += count
                    continue
                r2 = rv
                if n == ret and rv is _PENDING:
                    r2 = (m.av_get(s.av, n, ret_var),)
                key = (t, r2)
                nxt[key] = nxt.get(key, 0) + count
        if ex.verdict != "complete":
            break
        layer = nxt
        depth += 1
    ex.states = len(graph) + sum(1 for (s, _) in layer if s not in graph)
    ex.transitions = sum(len(v) for v in graph.values())
    return ex


# ---------------------------------------------------------------------------
# Confluence


@dataclass
class ConfluenceVerdict:
    passed: bool
    alarm: bool
    detail: str


def check_confluence(e: Exploration, dpdg: Optional[DpdgReport] = None) -> ConfluenceVerdict:
    if not e.complete:
        return ConfluenceVerdict(False, False, f"exploration incomplete ({e.verdict})")
    depths = set().union(*e.finals.values()) if e.finals else set()
    ok = len(e.finals) <= 1 and len(depths) <= 1 and not e.errors
    detail = f"{len(e.finals)} final state(s), run lengths {sorted(depths)}"
    if e.errors:
        detail += f", {sum(e.errors.values())} run(s) hit a runtime error"
    alarm = not ok and dpdg is not None and dpdg.deterministic
    return ConfluenceVerdict(ok, alarm, detail)


# ---------------------------------------------------------------------------
# Lemma audits


@dataclass
class AuditReport:
    states: int = 0
    pairs: int = 0
    diamonds: int = 0
    failures: list[str] = field(default_factory=list)
    checked: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures


def _f_targets(pdg: Pdg, n: int) -> set:
    return {(t, w) for s, t, w in pdg.F if s == n}


def lemma_audit(pdg: Pdg, e: Exploration, dpdg: Optional[DpdgReport] = None) -> AuditReport:
    """Check pairwise facts at every explored state with two or more
    executable nodes p, q:

    exclusive  neither lies in G* of the other
    no-edge    no F or L edge joins them
    targets    they write no common F target
    disjoint   G(p) and G(q) do not intersect
    persist    executing either leaves the other executable
    diamond    both orders reach the same state

    The last four only hold for deterministic PDGs and are skipped
    otherwise.
    """
    if dpdg is None:
        dpdg = check_dpdg(pdg)
    det = dpdg.deterministic
    m = machine(pdg)
    rep = AuditReport(checked=("exclusive", "no-edge") + (("targets", "persist", "disjoint", "diamond") if det else ()))
    gstar = {n: subgraph(pdg, n, "GS") for n in m.nodes}
    g = {n: subgraph(pdg, n, "G") for n in m.nodes}
    fl = {(s, t) for s, t, _ in pdg.F} | {(s, t) for s, t, _ in pdg.L}
    ft = {n: _f_targets(pdg, n) for n in m.nodes}

    def fail(msg: str) -> None:
        if len(rep.failures) < 200:
            rep.failures.append(msg)

    for s, succ in e.graph.items():
        rep.states += 1
        nodes = sorted(succ)
        for i, p in enumerate(nodes):
            for q in nodes[i + 1 :]:
                rep.pairs += 1
                if p in gstar[q] or q in gstar[p]:
                    fail(f"exclusive: {p} and {q} both executable but related by G*")
                if (p, q) in fl or (q, p) in fl:
                    fail(f"no-edge: F/L edge between executable {p} and {q}")
                if not det:
                    continue
                if ft[p] & ft[q]:
                    fail(f"targets: {p} and {q} share F target {sorted(ft[p] & ft[q])}")
                if g[p] & g[q]:
                    fail(f"disjoint: G({p}) and G({q}) intersect")
                sp, sq = succ[p], succ[q]
                if isinstance(sp, Exception) or isinstance(sq, Exception):
                    continue
                if not m.executable(sq.ec, p) or not m.executable(sp.ec, q):
                    fail(f"persist: executing one of {p},{q} disables the other")
                    continue
                rep.diamonds += 1
                try:
                    pq = m.step(sp, q)
                    qp = m.step(sq, p)
                except EvalError as exc:
                    fail(f"diamond: {p},{q} raised {exc}")
                    continue
                if pq != qp:
                    fail(f"diamond: {p},{q} does not commute")
    return rep


# ---------------------------------------------------------------------------
# CFG / PDG equivalence


@dataclass
class EquivalenceVerdict:
    status: str  # "pass", "fail" or "skipped: ..."
    cfg_value: Optional[Value] = None
    guided_ok: Optional[bool] = None
    guided_detail: str = ""
    method: str = ""  # "explore" or "sampled"
    compared: int = 0
    mismatches: list[str] = field(default_factory=list)
    stuck: int = 0
    exploration: Optional[Exploration] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def check_equivalence(
    cfg: Cfg,
    store: Mapping[str, Value],
    bound: int = 10_000,
    max_states: int = 100_000,
    samples: int = 32,
    pdg: Optional[Pdg] = None,
) -> EquivalenceVerdict:
    trace = cfg_run(cfg, store, bound)
    if not trace.terminated:
        return EquivalenceVerdict(f"skipped: CFG {trace.verdict}")
    expected = returned_value(cfg, trace)
    if pdg is None:
        pdg = build_pdg(cfg)
    v = EquivalenceVerdict("pass", cfg_value=expected)
    g = guided_run(pdg, store, trace.order, trace.stores)
    v.guided_ok = g.ok
    v.guided_detail = g.describe()
    if g.ok and not _same(g.ret_value, expected):
        v.mismatches.append(f"guided run returned {format_value(g.ret_value)}")

    ex = explore_all(pdg, store, max_states=max_states, max_depth=4 * bound)
    if ex.complete:
        v.method = "explore"
        v.exploration = ex
        v.stuck = len(ex.stuck)
        for val, count in sorted(ex.ret_values.items(), key=lambda kv: repr(kv[0])):
            v.compared += count
            if not _same(val, expected):
                v.mismatches.append(f"{count} explored run(s) returned {format_value(val)}")
    else:
        v.method = "sampled"
        for seed in range(samples):
            run = pdg_run(pdg, store, strategy="random", seed=seed, bound=4 * bound)
            if run.verdict == "stuck":
                v.stuck += 1
            if run.ret_count:
                v.compared += 1
                if not _same(run.ret_value, expected):
                    v.mismatches.append(f"seed {seed} returned {format_value(run.ret_value)}")
    if v.mismatches or not g.ok:
        v.status = "fail"
    return v


def _same(a: Value, b: Value) -> bool:
    return type(a) is type(b) and a == b


__all__ = [
    "Exploration",
    "explore_all",
    "ConfluenceVerdict",
    "check_confluence",
    "AuditReport",
    "lemma_audit",
    "EquivalenceVerdict",
    "check_equivalence",
    "agrees_at",
    "Ret",
]
