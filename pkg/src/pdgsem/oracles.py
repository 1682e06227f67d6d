"""Slow, literal reference implementations used to cross-check the
analyses in :mod:`pdgsem.dependence`.

Each oracle follows the wording of the definition it checks and
enumerates paths or subsets directly, so it is only practical for small
graphs.
"""

from __future__ import annotations

from itertools import combinations
from typing import Hashable, Iterable, Mapping

import networkx as nx

from .ir import EXIT, AugmentedCfg, Cfg

Node = Hashable


def avoiding_maximal_path(succ: Mapping[Node, Iterable[Node]], s: Node, t: Node) -> bool:
    """Is there a maximal path from ``s`` that never visits ``t``?

    Walks every simple path from ``s`` in the graph minus ``t``.  A path
    is maximal and finite when it ends at a node without successors; an
    edge back onto the current path closes a lasso, i.e. an infinite
    maximal path.
    """
    if s == t:
        return False
    path = [s]
    on = {s}

    def dfs(v) -> bool:
        nxt = list(succ.get(v, ()))
        if not nxt:
            return True
        for w in nxt:
            if w == t:
                continue
            if w in on:
                return True
            path.append(w)
            on.add(w)
            if dfs(w):
                return True
            path.pop()
            on.discard(w)
        return False

    return dfs(s)


def postdom_by_paths(nodes: Iterable[Node], succ: Mapping[Node, Iterable[Node]]) -> dict:
    """``{t: frozenset of s}`` with ``t`` on every maximal path from ``s``."""
    nodes = list(nodes)
    return {
        t: frozenset(s for s in nodes if not avoiding_maximal_path(succ, s, t)) for t in nodes
    }


def control_dependence_by_paths(g: AugmentedCfg, pd: Mapping) -> frozenset:
    """Control dependence by the path wording: some path s -> ... -> t of
    at least one edge whose nodes after ``s`` are all post-dominated by
    ``t``, while ``t`` does not strictly post-dominate ``s``."""
    succ = {n: [t for t, _ in g.succ[n]] for n in g.nodes}
    out = set()
    for s in g.nodes:
        labelled = [(u, lab) for u, lab in g.succ[s] if lab is not None]
        if not labelled:
            continue
        for t in g.nodes:
            if t == EXIT:
                continue
            if t != s and s in pd[t]:
                continue
            if not _path_inside(succ, s, t, pd[t]):
                continue
            for u, lab in labelled:
                if u in pd[t]:
                    out.add((s, t, lab))
    return frozenset(out)


def _path_inside(succ, s, t, allowed) -> bool:
    stack = [w for w in succ.get(s, ()) if w in allowed]
    seen = set(stack)
    while stack:
        v = stack.pop()
        if v == t:
            return True
        for w in succ.get(v, ()):
            if w in allowed and w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def loops_by_subsets(nodes: Iterable[Node], edges: Iterable) -> set[frozenset]:
    """Every node subset whose induced subgraph is strongly connected and
    has at least one edge, found by testing all subsets with networkx."""
    nodes = sorted(set(nodes))
    pairs = {(e[0], e[1]) for e in edges}
    out = set()
    for k in range(1, len(nodes) + 1):
        for sub in combinations(nodes, k):
            members = set(sub)
            inner = [(a, b) for a, b in pairs if a in members and b in members]
            if not inner:
                continue
            g = nx.DiGraph()
            g.add_nodes_from(members)
            g.add_edges_from(inner)
            if nx.is_strongly_connected(g):
                out.add(frozenset(members))
    return out


def reaching_paths(cfg: Cfg, s: int, var: str, limit: int = 100_000):
    """Yield every reaching path from ``s`` for ``var`` as a tuple of
    edges: at least one edge, interior nodes distinct, none of them
    defining ``var``; the last node may be anything."""
    out_edges = {n: [] for n in cfg.nodes}
    for e in cfg.edges:
        out_edges[e[0]].append(e)
    count = 0
    stack = [((e,), {e[1]}) for e in out_edges[s]]
    while stack:
        path, seen = stack.pop()
        count += 1
        if count > limit:
            raise RuntimeError("reaching-path enumeration limit exceeded")
        yield path
        end = path[-1][1]
        if end == s or var in cfg.nodes[end].defs:
            continue
        for e in out_edges[end]:
            if e[1] in seen and e[1] != s:
                continue
            stack.append((path + (e,), seen | {e[1]}))


def data_dependence_by_paths(cfg: Cfg, loops) -> tuple[frozenset, frozenset]:
    lidd, lcdd = set(), set()
    for s, st in cfg.stmts:
        for w in st.defs:
            hits: dict = {}
            for path in reaching_paths(cfg, s, w):
                t = path[-1][1]
                if w in cfg.nodes[t].uses:
                    hits.setdefault(t, []).append(path)
            for t, paths in hits.items():
                if not loops.share_loop(s, t):
                    lidd.add((s, t, w))
                    continue
                be = loops.be(s, t)
                if any(not (set(p) & be) for p in paths):
                    lidd.add((s, t, w))
                else:
                    lcdd.add((s, t, w))
    return frozenset(lidd), frozenset(lcdd)


def _path_exists(cfg: Cfg, s: int, t: int, blocked=frozenset()) -> bool:
    """A path of zero or more edges from ``s`` to ``t`` avoiding ``blocked``."""
    g = nx.DiGraph()
    g.add_nodes_from(cfg.nodes)
    g.add_edges_from((a, b) for a, b, lab in cfg.edges if (a, b, lab) not in blocked)
    return nx.has_path(g, s, t)


def def_order_by_cases(cfg: Cfg, lidd: Iterable, loops) -> frozenset:
    """Def-order dependence checked case by case with networkx paths."""
    users: dict = {}
    for s, u, w in lidd:
        users.setdefault((u, w), set()).add(s)
    out = set()
    for (u, w), defs in users.items():
        for s in defs:
            for t in defs:
                if s == t:
                    continue
                if not loops.share_loop(s, t):
                    if _path_exists(cfg, s, t):
                        out.add((s, t))
                    continue
                be = loops.be(s, t)
                if _path_exists(cfg, s, t, be):
                    out.add((s, t))
                elif not _path_exists(cfg, t, s, be):
                    out.add((s, t))
                    out.add((t, s))
    return frozenset(out)
