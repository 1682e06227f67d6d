"""Operational semantics of PDGs.

A state pairs an *avail* (a value for every (node, variable)) with an
*econf* (a status ``chk``/``unchk``/``act`` for every edge).  Nodes whose
incoming edges are in the right configuration are executable; executing
one updates the avail of its data successors and re-configures edges.

States are plain tuples laid out by a per-PDG :class:`Machine`, which
keeps them cheap to hash during exhaustive exploration.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Sequence

from .ir import ENTRY, Assign, EvalError, If, Ret, Truth, Value, eval_expr, format_value
from .pdg import EdgeKey, Pdg, subgraph


class EdgeStatus(enum.Enum):
    CHK = "chk"
    UNCHK = "unchk"
    ACT = "act"

    def __repr__(self) -> str:
        return self.value


CHK = EdgeStatus.CHK
UNCHK = EdgeStatus.UNCHK
ACT = EdgeStatus.ACT


class PdgState(NamedTuple):
    av: tuple  # values, laid out node-major over Machine.nodes x Machine.vars
    ec: tuple  # EdgeStatus per Pdg.edge_keys


class NotExecutable(ValueError):
    pass


class Machine:
    """Index tables for one Pdg; built once and cached on the Pdg."""

    def __init__(self, pdg: Pdg):
        self.pdg = pdg
        self.nodes = pdg.program_nodes
        self.vars = pdg.variables
        self.node_ix = {n: i for i, n in enumerate(self.nodes)}
        self.var_ix = {x: i for i, x in enumerate(self.vars)}
        self.keys = pdg.edge_keys
        self.key_ix = {k: i for i, k in enumerate(self.keys)}
        nv = len(self.vars)
        self.nv = nv
        st = pdg.statements

        def of(kind, end, n):
            return [i for i, k in enumerate(self.keys) if k.kind == kind and k[end] == n]

        self.in_c = {n: of("C", 2, n) for n in pdg.nodes}
        self.in_f = {n: of("F", 2, n) for n in self.nodes}
        self.in_d = {n: of("D", 2, n) for n in self.nodes}
        self.in_l = {n: of("L", 2, n) for n in self.nodes}
        self.out_l = {n: of("L", 1, n) for n in self.nodes}
        self.out_fd = {n: of("F", 1, n) + of("D", 1, n) for n in self.nodes}
        self.out_l_other = {
            n: [i for i in self.out_l[n] if self.keys[i].dst != n] for n in self.nodes
        }
        self.gstar_in_c = {}
        for n in self.nodes:
            idx = []
            for q in sorted(subgraph(pdg, n, "GS")):
                if q != n:
                    idx.extend(self.in_c[q])
            self.gstar_in_c[n] = idx
        self.uses = {
            n: [(x, self.node_ix[n] * nv + self.var_ix[x]) for x in sorted(st[n].uses)]
            for n in self.nodes
        }
        self.writes = {}
        for n in self.nodes:
            s = st[n]
            if isinstance(s, Assign):
                x = self.var_ix[s.target]
                dsts = sorted(
                    {k.dst for k in self.keys if k.kind in ("F", "L") and k.src == n}
                )
                self.writes[n] = [self.node_ix[p] * nv + x for p in dsts]
        self.patches = {}
        for n in self.nodes:
            s = st[n]
            if isinstance(s, If):
                for q in ("T", "F"):
                    self.patches[(n, q)] = self._patch(n, q)
            else:
                self.patches[(n, None)] = self._patch(n, None)
        self.ret_nodes = [n for n in self.nodes if isinstance(st[n], Ret)]

    def _patch(self, n: int, value: Optional[str]) -> tuple:
        """The edge updates for executing ``n`` (with condition ``value``),
        as ``(index, status)`` pairs.  Rules are applied generic first so
        that the type-specific ones win where they overlap."""
        pdg = self.pdg
        upd: dict[int, EdgeStatus] = {}
        for i in self.in_c[n]:
            upd[i] = UNCHK
        for i in self.in_l[n]:
            upd[i] = CHK
        if value is None:
            for i in self.out_fd[n]:
                upd[i] = CHK
            return tuple(sorted(upd.items()))
        other = "F" if value == "T" else "T"
        taken = subgraph(pdg, n, "G" + value)
        skipped = subgraph(pdg, n, "G" + other) - taken
        for i, k in enumerate(self.keys):
            if k.kind == "C" and k.src == n and k.tag == value:
                upd[i] = ACT
        for q in sorted(taken - {n}):
            for i in self.out_fd[q]:
                upd[i] = UNCHK
            for i in self.in_l[q]:
                if self.keys[i].src in taken:
                    upd[i] = UNCHK
        for q in sorted(skipped):
            for i in self.out_fd[q]:
                upd[i] = CHK
            for i in self.out_l[q]:
                if self.keys[i].dst not in skipped:
                    upd[i] = UNCHK
            for i in self.in_l[q]:
                if self.keys[i].src not in skipped:
                    upd[i] = CHK
        return tuple(sorted(upd.items()))

    # -- predicates --------------------------------------------------------

    def cond_c(self, ec: tuple, n: int) -> bool:
        if not any(ec[i] is ACT for i in self.in_c[n]):
            return False
        return not any(ec[i] is ACT for i in self.gstar_in_c[n])

    def cond_f(self, ec: tuple, n: int) -> bool:
        return all(ec[i] is CHK for i in self.in_f[n])

    def cond_l(self, ec: tuple, n: int) -> bool:
        return all(ec[i] is CHK for i in self.out_l_other[n])

    def cond_d(self, ec: tuple, n: int) -> bool:
        return all(ec[i] is CHK for i in self.in_d[n])

    def executable(self, ec: tuple, n: int) -> bool:
        return (
            self.cond_c(ec, n)
            and self.cond_f(ec, n)
            and self.cond_l(ec, n)
            and self.cond_d(ec, n)
        )

    def next_nodes(self, s: PdgState) -> list[int]:
        ec = s.ec
        return [n for n in self.nodes if self.executable(ec, n)]

    def why_not(self, s: PdgState, n: int) -> list[str]:
        if n == ENTRY:
            return ["condC"]
        failed = []
        for name, fn in (
            ("condC", self.cond_c),
            ("condF", self.cond_f),
            ("condL", self.cond_l),
            ("condD", self.cond_d),
        ):
            if not fn(s.ec, n):
                failed.append(name)
        return failed

    # -- updates -----------------------------------------------------------

    def env(self, av: tuple, n: int) -> dict:
        return {x: av[i] for x, i in self.uses[n]}

    def condition(self, av: tuple, n: int) -> str:
        c = eval_expr(self.pdg.statements[n].cond, self.env(av, n))
        if not isinstance(c, Truth):
            raise EvalError(f"non-truth condition at node {n}: {format_value(c)}")
        return c.value

    def udav(self, n: int, av: tuple) -> tuple:
        s = self.pdg.statements[n]
        if not isinstance(s, Assign):
            return av
        v = eval_expr(s.rhs, self.env(av, n))
        out = list(av)
        for i in self.writes[n]:
            out[i] = v
        return tuple(out)

    def udec(self, n: int, s: PdgState, value: Optional[str] = None) -> tuple:
        if isinstance(self.pdg.statements[n], If):
            if value is None:
                value = self.condition(s.av, n)
            patch = self.patches[(n, value)]
        else:
            patch = self.patches[(n, None)]
        ec = list(s.ec)
        for i, status in patch:
            ec[i] = status
        return tuple(ec)

    def step(self, s: PdgState, n: int) -> PdgState:
        value = None
        if isinstance(self.pdg.statements[n], If):
            value = self.condition(s.av, n)
        return PdgState(self.udav(n, s.av), self.udec(n, s, value))

    # -- views -------------------------------------------------------------

    def av_get(self, av: tuple, n: int, x: str) -> Value:
        return av[self.node_ix[n] * self.nv + self.var_ix[x]]

    def ec_get(self, ec: tuple, key: EdgeKey) -> EdgeStatus:
        return ec[self.key_ix[key]]

    def avail_dict(self, av: tuple) -> dict:
        return {(n, x): self.av_get(av, n, x) for n in self.nodes for x in self.vars}

    def econf_dict(self, ec: tuple) -> dict:
        return dict(zip(self.keys, ec))

    def init_state(self, store: Mapping[str, Value]) -> PdgState:
        missing = [x for x in self.vars if x not in store]
        if missing:
            raise ValueError(f"initial store is missing bindings for {missing}")
        av = tuple(store[x] for _ in self.nodes for x in self.vars)
        ec = tuple(ACT if k.kind == "C" and k.src == ENTRY else UNCHK for k in self.keys)
        return PdgState(av, ec)


def machine(pdg: Pdg) -> Machine:
    m = pdg.__dict__.get("_machine")
    if m is None:
        m = Machine(pdg)
        pdg.__dict__["_machine"] = m
    return m


# ---------------------------------------------------------------------------
# Functional interface


def init_state(pdg: Pdg, store: Mapping[str, Value]) -> PdgState:
    return machine(pdg).init_state(store)


def next_nodes(pdg: Pdg, s: PdgState) -> list[int]:
    return machine(pdg).next_nodes(s)


def apply_udav(pdg: Pdg, n: int, av: tuple) -> tuple:
    return machine(pdg).udav(n, av)


def apply_udec(pdg: Pdg, n: int, s: PdgState) -> tuple:
    return machine(pdg).udec(n, s)


def pdg_step(pdg: Pdg, s: PdgState, n: int, check: bool = True) -> PdgState:
    m = machine(pdg)
    if check and (n == ENTRY or n not in m.node_ix or not m.executable(s.ec, n)):
        raise NotExecutable(f"node {n} is not executable ({', '.join(m.why_not(s, n))} fails)")
    return m.step(s, n)


def agrees_at(pdg: Pdg, store: Mapping[str, Value], av: tuple, n: int) -> list[str]:
    """Variables used at ``n`` on which ``store`` and ``av`` disagree."""
    m = machine(pdg)
    bad = []
    for x, i in m.uses[n]:
        a, b = store[x], av[i]
        if type(a) is not type(b) or a != b:
            bad.append(x)
    return bad


# ---------------------------------------------------------------------------
# Runs


@dataclass
class PdgRun:
    steps: list[tuple[PdgState, int]] = field(default_factory=list)
    nexts: list[list[int]] = field(default_factory=list)
    final: Optional[PdgState] = None
    verdict: str = "quiescent"
    error: Optional[str] = None
    ret_value: Optional[Value] = None
    final_ret_value: Optional[Value] = None
    ret_count: int = 0
    audit_failures: list[str] = field(default_factory=list)

    @property
    def order(self) -> list[int]:
        return [n for _, n in self.steps]

    @property
    def length(self) -> int:
        return len(self.steps)


def audit_pair(pdg: Pdg, p: int, q: int) -> list[str]:
    """Checks that hold for any two simultaneously executable nodes."""
    out = []
    if p in subgraph(pdg, q, "GS") or q in subgraph(pdg, p, "GS"):
        out.append(f"exclusive: {p} and {q} executable together but one is in G* of the other")
    for a, b in ((p, q), (q, p)):
        if any(s == a and t == b for s, t, _ in pdg.F) or any(
            s == a and t == b for s, t, _ in pdg.L
        ):
            out.append(f"no-edge: F/L edge {a}->{b} between simultaneously executable nodes")
    return out


def pdg_run(
    pdg: Pdg,
    store: Mapping[str, Value],
    strategy: str = "min-id",
    seed: Optional[int] = None,
    bound: int = 10_000,
    audit: bool = False,
) -> PdgRun:
    m = machine(pdg)
    rng = random.Random(seed)
    s = m.init_state(store)
    run = PdgRun()
    ret = m.ret_nodes[0] if m.ret_nodes else None
    for _ in range(bound):
        nxt = m.next_nodes(s)
        if not nxt:
            break
        if audit:
            for i, p in enumerate(nxt):
                for q in nxt[i + 1 :]:
                    run.audit_failures.extend(audit_pair(pdg, p, q))
        if strategy == "min-id":
            n = nxt[0]
        elif strategy == "random":
            n = rng.choice(nxt)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        run.steps.append((s, n))
        run.nexts.append(nxt)
        if n == ret:
            run.ret_count += 1
            if run.ret_count == 1:
                run.ret_value = m.av_get(s.av, n, pdg.statements[n].var)
        try:
            s = m.step(s, n)
        except EvalError as exc:
            run.verdict = "runtime-error"
            run.error = str(exc)
            run.final = s
            return run
    else:
        if m.next_nodes(s):
            run.verdict = "bound-exceeded"
            run.final = s
            return run
    run.final = s
    run.verdict = "quiescent" if run.ret_count else "stuck"
    if ret is not None:
        run.final_ret_value = m.av_get(s.av, ret, pdg.statements[ret].var)
    return run


@dataclass
class GuidedResult:
    ok: bool
    steps: int
    index: Optional[int] = None
    node: Optional[int] = None
    reason: Optional[str] = None
    final: Optional[PdgState] = None
    ret_value: Optional[Value] = None

    def describe(self) -> str:
        if self.ok:
            return f"ok: {self.steps} steps replayed"
        return f"failed at step {self.index} (node {self.node}): {self.reason}"


def guided_run(
    pdg: Pdg,
    store0: Mapping[str, Value],
    order: Sequence[int],
    stores: Sequence[Mapping[str, Value]],
) -> GuidedResult:
    """Replay a CFG execution order on the PDG.

    At every index the node must be executable and the avail row of the
    node must agree with the CFG store on the variables the node uses.
    """
    m = machine(pdg)
    s = m.init_state(store0)
    ret_value = None
    for i, (n, sigma) in enumerate(zip(order, stores)):
        if n not in m.node_ix or not m.executable(s.ec, n):
            why = ", ".join(m.why_not(s, n)) if n in m.node_ix else "unknown node"
            return GuidedResult(False, i, i, n, f"not executable ({why})", s)
        bad = agrees_at(pdg, sigma, s.av, n)
        if bad:
            detail = ", ".join(
                f"{x}: store {format_value(sigma[x])} vs avail {format_value(m.av_get(s.av, n, x))}"
                for x in bad
            )
            return GuidedResult(False, i, i, n, f"store/avail disagree ({detail})", s)
        if isinstance(pdg.statements[n], Ret):
            ret_value = m.av_get(s.av, n, pdg.statements[n].var)
        try:
            s = m.step(s, n)
        except EvalError as exc:
            return GuidedResult(False, i, i, n, f"runtime error: {exc}", s)
    return GuidedResult(True, len(order), final=s, ret_value=ret_value)
