"""Dependence relations over a control flow graph.

Post-dominance here is the strong form: ``t`` post-dominates ``s`` when
every maximal path from ``s``, infinite ones included, passes through
``t``.  A node after a loop therefore does not post-dominate the loop's
nodes, and loop exits become control dependences.

Loops are arbitrary strongly connected node sets, not natural loops, so
irreducible graphs are handled and nested/overlapping loops are all
reported.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Hashable, Iterable, Mapping, Optional

import networkx as nx

from .ir import ENTRY, EXIT, AugmentedCfg, Cfg, If, augment_cfg

Node = Hashable
# (src, dst, label); label is None, "T" or "F"
LEdge = tuple


# ---------------------------------------------------------------------------
# Post-dominance and control dependence


def postdom_fixpoint(nodes: Iterable[Node], succ: Mapping[Node, Iterable[Node]]) -> dict:
    """Strong post-dominance on an arbitrary digraph.

    Returns ``{t: frozenset of s post-dominated by t}``.  For each ``t``
    this is the least set containing ``t`` and closed under adding any
    ``s`` whose successors are non-empty and all already inside.
    """
    nodes = list(nodes)
    succs = {n: set(succ.get(n, ())) for n in nodes}
    preds: dict = {n: [] for n in nodes}
    for n in nodes:
        for m in succs[n]:
            preds[m].append(n)
    out = {}
    for t in nodes:
        remaining = {n: len(succs[n]) for n in nodes}
        inside = {t}
        work = [t]
        while work:
            v = work.pop()
            for p in preds[v]:
                if p in inside:
                    continue
                remaining[p] -= 1
                if remaining[p] == 0:
                    inside.add(p)
                    work.append(p)
        out[t] = frozenset(inside)
    return out


def strong_postdom(g: AugmentedCfg) -> dict[int, frozenset[int]]:
    succ = {n: [t for t, _ in g.succ[n]] for n in g.nodes}
    return postdom_fixpoint(g.nodes, succ)


def postdominates(pd: Mapping, t: Node, s: Node) -> bool:
    return s in pd[t]


def control_dependence(g: AugmentedCfg, pd: Mapping) -> frozenset[tuple[int, int, str]]:
    """Weak control dependence with T/F labels.

    ``(s, t, Q)`` holds when the Q-successor of ``s`` is post-dominated by
    ``t`` while ``t`` does not strictly post-dominate ``s``.
    """
    out = set()
    for s in g.nodes:
        for u, lab in g.succ[s]:
            if lab is None:
                continue
            for t in g.nodes:
                if t == EXIT or u not in pd[t]:
                    continue
                if t != s and s in pd[t]:
                    continue
                out.add((s, t, lab))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Loops


class LoopLimitExceeded(RuntimeError):
    pass


def _order(n) -> tuple:
    return (0, n, "") if isinstance(n, int) else (1, 0, repr(n))


@dataclass(frozen=True)
class Loop:
    nodes: frozenset
    back_edges: frozenset

    def sort_key(self):
        return (len(self.nodes), sorted(map(_order, self.nodes)))


@dataclass(frozen=True)
class LoopSet:
    """All loops of a graph plus its loop nesting hierarchy.

    ``loops`` holds every strongly connected node set.  ``nest`` holds
    the loops found by taking maximal strongly connected components,
    deleting their back edges and recursing; it is the family used to
    decide which back edges a reaching path between two nodes must
    avoid (see :meth:`be`).
    """

    loops: tuple[Loop, ...]
    nest: tuple[Loop, ...] = ()

    @cached_property
    def back_edges(self) -> frozenset:
        out: set = set()
        for lp in self.loops:
            out |= lp.back_edges
        return frozenset(out)

    @cached_property
    def _by_node(self) -> dict:
        out: dict = {}
        for i, lp in enumerate(self.loops):
            for n in lp.nodes:
                out.setdefault(n, []).append(i)
        return out

    def containing(self, *ns) -> list[Loop]:
        idx = None
        for n in ns:
            mine = set(self._by_node.get(n, ()))
            idx = mine if idx is None else idx & mine
        return [self.loops[i] for i in sorted(idx or ())]

    def share_loop(self, s, t) -> bool:
        return bool(self.containing(s, t))

    @cached_property
    def _be_cache(self) -> dict:
        return {}

    def be(self, s, t, family: str = "nest") -> frozenset:
        """Back edges of the loops holding both ``s`` and ``t``.

        ``family="nest"`` draws the loops from the nesting hierarchy,
        ``family="all"`` from every strongly connected subset.  The two
        agree whenever every strongly connected subset is a nest loop.
        """
        key = (s, t, family)
        if key not in self._be_cache:
            if family == "all":
                pool = self.containing(s, t)
            elif family == "nest":
                pool = [lp for lp in self.nest if s in lp.nodes and t in lp.nodes]
            else:
                raise ValueError(f"unknown loop family {family!r}")
            out: set = set()
            for lp in pool:
                out |= lp.back_edges
            self._be_cache[key] = frozenset(out)
        return self._be_cache[key]

    def node_sets(self) -> set[frozenset]:
        return {lp.nodes for lp in self.loops}

    def __len__(self) -> int:
        return len(self.loops)


def _back_edges(members: frozenset, edges: list, preds: Mapping) -> frozenset:
    out = set()
    for e in edges:
        s, t = e[0], e[1]
        if s in members and t in members:
            if any(p not in members for p in preds.get(t, ())):
                out.add(e)
    return frozenset(out)


def _normalize(nodes, edges) -> tuple[list, list, dict]:
    edges = [tuple(e) if len(e) == 3 else (e[0], e[1], None) for e in edges]
    nodes = set(nodes or ()) | {e[0] for e in edges} | {e[1] for e in edges}
    preds: dict = {n: set() for n in nodes}
    for s, t, _ in edges:
        preds[t].add(s)
    return sorted(nodes, key=_order), edges, preds


def _sccs_by_bitmask(order: list, adj: Mapping) -> list[list]:
    """Maximal strongly connected groups via reachability closures."""
    reach = {}
    for n in order:
        seen = {n}
        stack = [n]
        while stack:
            v = stack.pop()
            for w in adj.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        reach[n] = seen
    done: set = set()
    groups = []
    for n in order:
        if n in done:
            continue
        comp = [m for m in order if m in reach[n] and n in reach[m]]
        done.update(comp)
        groups.append(comp)
    return groups


def _exhaustive(nodes: list, edges: list, limit: int) -> list[frozenset]:
    adj: dict = {n: set() for n in nodes}
    for s, t, _ in edges:
        adj[s].add(t)
    found = []
    for comp in _sccs_by_bitmask(nodes, adj):
        k = len(comp)
        if k == 1 and comp[0] not in adj[comp[0]]:
            continue
        if k > limit:
            raise LoopLimitExceeded(
                f"strongly connected component of {k} nodes exceeds limit {limit}"
            )
        index = {n: i for i, n in enumerate(comp)}
        fwd = [0] * k
        bwd = [0] * k
        for n in comp:
            for m in adj[n]:
                if m in index:
                    fwd[index[n]] |= 1 << index[m]
                    bwd[index[m]] |= 1 << index[n]
        for mask in range(1, 1 << k):
            low = (mask & -mask).bit_length() - 1
            if mask == 1 << low:
                if fwd[low] & mask:
                    found.append(frozenset((comp[low],)))
                continue
            if _closure(fwd, low, mask) != mask or _closure(bwd, low, mask) != mask:
                continue
            found.append(frozenset(comp[i] for i in range(k) if mask >> i & 1))
    return found


def _closure(adj: list[int], start: int, mask: int) -> int:
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        nxt &= mask & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def _decompose(nodes: list, edges: list) -> list[frozenset]:
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from((s, t) for s, t, _ in edges)
    found: set[frozenset] = set()
    visited: set[frozenset] = set()

    def walk(sub: frozenset) -> None:
        if sub in visited:
            return
        visited.add(sub)
        view = g.subgraph(sub)
        for comp in nx.strongly_connected_components(view):
            comp = frozenset(comp)
            if len(comp) == 1:
                (v,) = comp
                if not g.has_edge(v, v):
                    continue
            found.add(comp)
            # every smaller strongly connected subset misses some node of comp
            for v in comp:
                walk(comp - {v})

    walk(frozenset(nodes))
    return list(found)


def loop_nest(nodes: list, edges: list, preds: Mapping) -> list[frozenset]:
    """Loops of the nesting hierarchy: each maximal strongly connected
    component, then recursively the components left after deleting that
    component's back edges."""
    found: list[frozenset] = []

    def walk(members, sub_edges) -> None:
        g = nx.DiGraph()
        g.add_nodes_from(members)
        g.add_edges_from((s, t) for s, t, _ in sub_edges)
        for comp in nx.strongly_connected_components(g):
            comp = frozenset(comp)
            inner = [e for e in sub_edges if e[0] in comp and e[1] in comp]
            if not inner:
                continue
            found.append(comp)
            be = _back_edges(comp, inner, preds)
            if be:
                walk(comp, [e for e in inner if e not in be])

    walk(nodes, edges)
    return found


def enumerate_loops(
    edges: Iterable,
    nodes: Optional[Iterable] = None,
    method: str = "auto",
    limit: int = 16,
) -> LoopSet:
    """Every strongly connected node set with at least one internal edge.

    ``method`` is ``"exhaustive"`` (subset enumeration, raises
    LoopLimitExceeded past ``limit`` nodes in one component),
    ``"decompose"`` (recursive SCC decomposition with node deletion) or
    ``"auto"`` (exhaustive when within the limit).
    """
    order, edge_list, preds = _normalize(nodes, edges)
    if method == "exhaustive":
        sets = _exhaustive(order, edge_list, limit)
    elif method == "decompose":
        sets = _decompose(order, edge_list)
    elif method == "auto":
        try:
            sets = _exhaustive(order, edge_list, limit)
        except LoopLimitExceeded:
            sets = _decompose(order, edge_list)
    else:
        raise ValueError(f"unknown loop enumeration method {method!r}")
    loops = [Loop(s, _back_edges(s, edge_list, preds)) for s in set(sets)]
    loops.sort(key=Loop.sort_key)
    nest = [Loop(s, _back_edges(s, edge_list, preds)) for s in set(loop_nest(order, edge_list, preds))]
    nest.sort(key=Loop.sort_key)
    return LoopSet(tuple(loops), tuple(nest))


def cfg_loops(cfg: Cfg, method: str = "auto", limit: int = 16) -> LoopSet:
    return enumerate_loops(cfg.edges, cfg.nodes, method=method, limit=limit)


# ---------------------------------------------------------------------------
# Data and def-order dependence


def _succ_pairs(cfg: Cfg) -> dict[int, list[tuple[int, tuple]]]:
    out: dict = {n: [] for n in cfg.nodes}
    for e in cfg.edges:
        out[e[0]].append((e[1], e))
    return out


def reaching_endpoints(cfg: Cfg, s: int, var: str, blocked: frozenset = frozenset()) -> set[int]:
    """Nodes ``t`` with a path of >= 1 edge from ``s`` whose interior
    nodes do not define ``var`` and which uses no edge in ``blocked``."""
    succ = _succ_pairs(cfg)
    seen: set[int] = set()
    work = deque()
    for t, e in succ[s]:
        if e not in blocked and t not in seen:
            seen.add(t)
            work.append(t)
    while work:
        v = work.popleft()
        if var in cfg.nodes[v].defs:
            continue
        for t, e in succ[v]:
            if e not in blocked and t not in seen:
                seen.add(t)
                work.append(t)
    return seen


def reachable(cfg: Cfg, s: int, blocked: frozenset = frozenset(), reflexive: bool = True) -> set[int]:
    succ = _succ_pairs(cfg)
    seen: set[int] = set()
    work = [s]
    while work:
        v = work.pop()
        for t, e in succ[v]:
            if e not in blocked and t not in seen:
                seen.add(t)
                work.append(t)
    if reflexive:
        seen.add(s)
    return seen


def data_dependence(cfg: Cfg, loops: LoopSet, family: str = "nest") -> tuple[frozenset, frozenset]:
    """Loop-independent and loop-carried data dependences ``(s, t, var)``."""
    lidd, lcdd = set(), set()
    users: dict[str, list[int]] = {}
    for n, st in cfg.stmts:
        for v in st.uses:
            users.setdefault(v, []).append(n)
    for s, st in cfg.stmts:
        for w in st.defs:
            plain = reaching_endpoints(cfg, s, w)
            for t in users.get(w, ()):
                if t not in plain:
                    continue
                be = loops.be(s, t, family)
                if not loops.share_loop(s, t):
                    lidd.add((s, t, w))
                elif t in reaching_endpoints(cfg, s, w, be):
                    lidd.add((s, t, w))
                else:
                    lcdd.add((s, t, w))
    return frozenset(lidd), frozenset(lcdd)


def def_order_dependence(
    cfg: Cfg, lidd: Iterable, loops: LoopSet, family: str = "nest"
) -> frozenset[tuple[int, int]]:
    """Pairs ``(s, t)``: ``t`` is def-order dependent on ``s``."""
    by_use: dict[tuple[int, str], set[int]] = {}
    for s, u, w in lidd:
        by_use.setdefault((u, w), set()).add(s)
    out = set()
    candidates = set()
    for (u, w), defs in by_use.items():
        for s in defs:
            for t in defs:
                if s != t:
                    candidates.add((s, t))
    for s, t in candidates:
        if not loops.share_loop(s, t):
            if t in reachable(cfg, s):
                out.add((s, t))
            continue
        be = loops.be(s, t, family)
        fwd = t in reachable(cfg, s, be)
        if fwd:
            out.add((s, t))
            continue
        back = s in reachable(cfg, t, be)
        if not back:
            # mutually reachable only through back edges: ordered both ways
            out.add((s, t))
            out.add((t, s))
    return frozenset(out)


@dataclass(frozen=True)
class ReachSets:
    R: frozenset
    R_prime: frozenset
    UR: frozenset
    UR_prime: frozenset


def reach_sets(cfg: Cfg, loops: LoopSet, n: int) -> ReachSets:
    allnodes = frozenset(cfg.nodes)
    r = frozenset(reachable(cfg, n))
    rp = frozenset(reachable(cfg, n, loops.back_edges))
    return ReachSets(r, rp, allnodes - r, allnodes - rp)


# ---------------------------------------------------------------------------
# Bundled analysis


@dataclass(frozen=True)
class Analysis:
    cfg: Cfg
    aug: AugmentedCfg
    postdom: Mapping
    cd: frozenset
    loops: LoopSet
    lidd: frozenset
    lcdd: frozenset
    deford: frozenset

    def __hash__(self) -> int:
        return hash(self.cfg)

    def __eq__(self, other) -> bool:
        return isinstance(other, Analysis) and other.cfg == self.cfg


@lru_cache(maxsize=256)
def analyze(cfg: Cfg, loop_method: str = "auto", family: str = "nest") -> Analysis:
    aug = augment_cfg(cfg)
    pd = strong_postdom(aug)
    cd = control_dependence(aug, pd)
    loops = cfg_loops(cfg, method=loop_method)
    lidd, lcdd = data_dependence(cfg, loops, family)
    deford = def_order_dependence(cfg, lidd, loops, family)
    return Analysis(cfg, aug, pd, cd, loops, lidd, lcdd, deford)


def dependence_lines(a: Analysis) -> list[str]:
    from .ir import node_name

    lines = [f"CD {node_name(s)} {node_name(t)} {q}" for s, t, q in sorted(a.cd, key=_cd_key)]
    lines += [f"LIDD {s} {t} {w}" for s, t, w in sorted(a.lidd)]
    lines += [f"LCDD {s} {t} {w}" for s, t, w in sorted(a.lcdd)]
    lines += [f"DEFORD {s} {t}" for s, t in sorted(a.deford)]
    return lines


def _cd_key(e):
    return (e[0], e[1], 0 if e[2] == "T" else 1)


def is_if_or_entry(cfg: Cfg, n: int) -> bool:
    return n == ENTRY or isinstance(cfg.nodes.get(n), If)
