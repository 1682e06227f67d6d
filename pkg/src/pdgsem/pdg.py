"""Program dependence graphs and the graph machinery the semantics needs.

A Pdg holds four edge relations over the program nodes plus ``entry``:

* ``C`` -- control dependence ``(src, dst, "T"|"F")``
* ``F`` -- loop-independent data dependence ``(src, dst, var)``
* ``L`` -- loop-carried data dependence ``(src, dst, var)``
* ``D`` -- def-order dependence ``(src, dst)``
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

from .dependence import LoopSet, analyze, enumerate_loops
from .ir import ENTRY, Assign, Cfg, If, Ret, Stmt, Violation, node_name

MODES = ("G", "GT", "GF", "GS", "GTS", "GFS")


class EdgeKey(NamedTuple):
    kind: str  # "C", "F", "L" or "D"
    src: int
    dst: int
    tag: Optional[str]  # label for C, variable for F/L, None for D

    def __str__(self) -> str:
        name = {"C": "c", "F": "f", "L": "l", "D": "d"}[self.kind]
        if self.kind == "C":
            name = "ct" if self.tag == "T" else "cf"
        elif self.tag is not None:
            name = f"{name}_{self.tag}"
        return f"{name}({node_name(self.src)},{node_name(self.dst)})"


class McaLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Pdg:
    stmts: tuple[tuple[int, Stmt], ...]
    C: frozenset
    F: frozenset
    L: frozenset
    D: frozenset

    @classmethod
    def build(cls, stmts, C=(), F=(), L=(), D=()) -> "Pdg":
        items = stmts.items() if hasattr(stmts, "items") else stmts
        return cls(
            tuple(sorted(items)),
            frozenset(C),
            frozenset(F),
            frozenset(L),
            frozenset((e[0], e[1]) for e in D),
        )

    @cached_property
    def statements(self) -> dict[int, Stmt]:
        return dict(self.stmts)

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        return (ENTRY,) + tuple(n for n, _ in self.stmts)

    @cached_property
    def program_nodes(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.stmts)

    @cached_property
    def variables(self) -> tuple[str, ...]:
        names: set[str] = set()
        for _, st in self.stmts:
            names |= st.uses | st.defs
        return tuple(sorted(names))

    @cached_property
    def edge_keys(self) -> tuple[EdgeKey, ...]:
        keys = [EdgeKey("C", s, t, q) for s, t, q in self.C]
        keys += [EdgeKey("F", s, t, w) for s, t, w in self.F]
        keys += [EdgeKey("L", s, t, w) for s, t, w in self.L]
        keys += [EdgeKey("D", s, t, None) for s, t in self.D]
        order = {"C": 0, "F": 1, "L": 2, "D": 3}
        return tuple(sorted(keys, key=lambda k: (order[k.kind], k.src, k.dst, k.tag or "")))

    @cached_property
    def c_succ(self) -> dict[int, list[tuple[int, str]]]:
        out: dict = {n: [] for n in self.nodes}
        for s, t, q in sorted(self.C):
            out[s].append((t, q))
        return out

    @cached_property
    def c_pred(self) -> dict[int, set[int]]:
        out: dict = {n: set() for n in self.nodes}
        for s, t, _ in self.C:
            out[t].add(s)
        return out

    @cached_property
    def cdg_loops(self) -> LoopSet:
        return enumerate_loops(self.C, self.nodes)

    @cached_property
    def looping(self) -> frozenset:
        return looping_edges(self, self.cdg_loops)

    @cached_property
    def c_hat(self) -> frozenset:
        return self.C - self.looping

    @cached_property
    def _subgraphs(self) -> dict:
        return {}

    @cached_property
    def _paths(self) -> dict:
        return {}


def build_pdg(cfg: Cfg, family: str = "nest") -> Pdg:
    a = analyze(cfg, family=family)
    return Pdg.build(cfg.nodes, a.cd, a.lidd, a.lcdd, a.deford)


def pdg_lines(pdg: Pdg) -> list[str]:
    lines = [
        f"C {node_name(s)} {node_name(t)} {q}"
        for s, t, q in sorted(pdg.C, key=lambda e: (e[0], e[1], e[2] == "F"))
    ]
    lines += [f"F {s} {t} {w}" for s, t, w in sorted(pdg.F)]
    lines += [f"L {s} {t} {w}" for s, t, w in sorted(pdg.L)]
    lines += [f"D {s} {t}" for s, t in sorted(pdg.D)]
    return lines


def validate_pdg(pdg: Pdg) -> list[Violation]:
    out: list[Violation] = []
    st = pdg.statements
    nodes = set(pdg.nodes)
    for kind, rel in (("C", pdg.C), ("F", pdg.F), ("L", pdg.L), ("D", pdg.D)):
        for e in sorted(rel, key=repr):
            for end in e[:2]:
                if end not in nodes:
                    out.append(Violation(f"{kind} edge {e} references unknown node {end}"))
            if e[1] == ENTRY:
                out.append(Violation(f"{kind} edge {e} enters entry", node=ENTRY))
            if kind != "C" and e[0] == ENTRY:
                out.append(Violation(f"{kind} edge {e} leaves entry", node=ENTRY))
    for s, t, q in sorted(pdg.C):
        if q not in ("T", "F"):
            out.append(Violation(f"C edge ({s},{t}) has label {q!r}", node=s))
        if isinstance(st.get(s), (Assign, Ret)):
            kind = "assign" if isinstance(st[s], Assign) else "ret"
            out.append(Violation(f"{kind}-node {s} has outgoing C edge to {t}", node=s))
    for rel, kind in ((pdg.F, "F"), (pdg.L, "L")):
        for s, t, w in sorted(rel):
            if s not in st or t not in st:
                continue
            if not isinstance(st[s], Assign):
                out.append(Violation(f"{kind} edge ({s},{t}) leaves non-assign node {s}", node=s))
            if w not in st[s].defs:
                out.append(Violation(f"{kind} edge ({s},{t},{w}): {s} does not define {w}", node=s))
            if w not in st[t].uses:
                out.append(Violation(f"{kind} edge ({s},{t},{w}): {t} does not use {w}", node=t))
    f_by_src: dict = {}
    for s, t, w in pdg.F:
        f_by_src.setdefault((s, w), set()).add(t)
    for s, t in sorted(pdg.D):
        if s not in st or t not in st:
            continue
        if not isinstance(st[s], Assign):
            out.append(Violation(f"D edge ({s},{t}) leaves non-assign node {s}", node=s))
        common = st[s].defs & st[t].defs
        if not any(f_by_src.get((s, w), set()) & f_by_src.get((t, w), set()) for w in common):
            out.append(Violation(f"D edge ({s},{t}) without a common F successor", node=s))
    for n in pdg.program_nodes:
        if not pdg.c_pred[n]:
            out.append(Violation(f"node {n} has no incoming C edge", node=n))
    return out


# ---------------------------------------------------------------------------
# Looping edges and subgraphs


def looping_edges(pdg: Pdg, cdg_loops: Optional[LoopSet] = None) -> frozenset:
    """C edges that re-activate the body of a CDG loop."""
    if cdg_loops is None:
        cdg_loops = pdg.cdg_loops
    out = set()
    for p, _, q in cdg_loops.back_edges:
        for d, lab in pdg.c_succ[p]:
            if lab == q and pdg.c_pred[d] - {p}:
                out.add((p, d, lab))
    return frozenset(out)


def c_hat(pdg: Pdg) -> frozenset:
    return pdg.c_hat


def _closure(seeds: Iterable[int], edges: frozenset) -> frozenset:
    succ: dict = {}
    for s, t, _ in edges:
        succ.setdefault(s, set()).add(t)
    seen = set(seeds)
    stack = list(seen)
    while stack:
        v = stack.pop()
        for w in succ.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


def subgraph(pdg: Pdg, p: int, mode: str = "G") -> frozenset:
    """Node set of G(p), G_T(p), G_F(p) or their starred forms.

    Seeds are the destinations of ``p``'s C edges (filtered by label for
    the T/F forms); the set is everything reachable from a seed through
    non-looping C edges, or through all C edges for starred modes.
    """
    key = (p, mode)
    cache = pdg._subgraphs
    if key in cache:
        return cache[key]
    if mode not in MODES:
        raise ValueError(f"unknown subgraph mode {mode!r}; expected one of {MODES}")
    label = "T" if "T" in mode else "F" if "F" in mode else None
    seeds = [d for d, lab in pdg.c_succ[p] if label is None or lab == label]
    edges = pdg.C if mode.endswith("S") else pdg.c_hat
    res = _closure(seeds, edges)
    cache[key] = res
    return res


def induced(pdg: Pdg, members: Iterable[int]) -> Pdg:
    m = set(members)
    return Pdg.build(
        {n: s for n, s in pdg.stmts if n in m},
        [e for e in pdg.C if e[0] in m and e[1] in m],
        [e for e in pdg.F if e[0] in m and e[1] in m],
        [e for e in pdg.L if e[0] in m and e[1] in m],
        [e for e in pdg.D if e[0] in m and e[1] in m],
    )


# ---------------------------------------------------------------------------
# Minimal common ancestors


def simple_paths(pdg: Pdg, target: int, limit: int = 10**5) -> list[tuple[int, ...]]:
    """All acyclic CDG paths from entry to ``target``."""
    cache = pdg._paths
    if target in cache:
        return cache[target]
    adj: dict = {}
    for s, t, _ in pdg.C:
        adj.setdefault(s, set()).add(t)
    for k in adj:
        adj[k] = sorted(adj[k])
    out: list = []
    path = [ENTRY]
    on_path = {ENTRY}

    def dfs(v: int) -> None:
        if v == target:
            out.append(tuple(path))
            if len(out) > limit:
                raise McaLimitExceeded(f"more than {limit} acyclic paths to {target}")
            return
        for w in adj.get(v, ()):
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                dfs(w)
                path.pop()
                on_path.discard(w)

    dfs(ENTRY)
    cache[target] = out
    return out


def common_prefix_ends(pdg: Pdg, p: int, q: int, limit: int = 10**5) -> frozenset:
    """Last nodes of the longest common prefixes of entry->p and entry->q
    acyclic paths, over every pairing of such paths."""
    ps = simple_paths(pdg, p, limit)
    qs = simple_paths(pdg, q, limit)
    if len(ps) * len(qs) > limit:
        raise McaLimitExceeded(f"{len(ps) * len(qs)} path pairs for mca({p},{q}) exceed {limit}")
    out = set()
    for a in ps:
        for b in qs:
            i = 0
            n = min(len(a), len(b))
            while i < n and a[i] == b[i]:
                i += 1
            out.add(a[i - 1])
    return frozenset(out)


def mca(pdg: Pdg, p: int, q: int, limit: int = 10**5, minimal: bool = True) -> frozenset:
    """Minimal common ancestors of ``p`` and ``q`` in the CDG.

    The candidates are the common-prefix end points of every pairing of
    acyclic entry paths.  With ``minimal`` (the default) a candidate is
    dropped when another candidate lies strictly below it, i.e. is
    C-reachable from it without reaching back.
    """
    cands = common_prefix_ends(pdg, p, q, limit)
    if not minimal or len(cands) < 2:
        return cands
    below = {r: subgraph(pdg, r, "GS") for r in cands}
    return frozenset(
        r
        for r in cands
        if not any(r2 != r and r2 in below[r] and r not in below[r2] for r2 in cands)
    )


# ---------------------------------------------------------------------------
# Iteration statements


def iteration_statements(cfg: Cfg, loops: LoopSet) -> dict[frozenset, frozenset]:
    """Per CFG loop, the conditionals with one successor inside and one outside."""
    out = {}
    for lp in loops.loops:
        its = set()
        for n in lp.nodes:
            if not isinstance(cfg.nodes[n], If):
                continue
            inside = [t in lp.nodes for t, _ in cfg.succ[n]]
            if any(inside) and not all(inside):
                its.add(n)
        if not its:
            raise ValueError(f"loop {sorted(lp.nodes)} has no iteration statement")
        out[lp.nodes] = frozenset(its)
    return out
