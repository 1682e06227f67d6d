"""Random CFGs for differential testing.

Programs are grown from a small structured grammar (sequences, diamonds,
while and do-while loops whose counters only ever decrease) and then a
few edges are retargeted at random to produce unstructured and
irreducible shapes.  Every retarget is kept only if the graph stays
valid, every node still reaches the return node and, when loops are
disabled, the graph stays acyclic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .ir import Assign, BinOp, Cfg, Const, If, Ret, Var, validate_cfg


@dataclass(frozen=True)
class GenParams:
    max_nodes: int = 12
    loop_bias: float = 0.35
    max_vars: int = 3
    retargets: int = 2

    def __post_init__(self):
        if self.max_nodes < 2:
            raise ValueError("max_nodes must be at least 2")
        if not 0.0 <= self.loop_bias <= 1.0:
            raise ValueError("loop_bias must lie in [0, 1]")
        if self.max_vars < 1:
            raise ValueError("max_vars must be at least 1")


class _Builder:
    def __init__(self, rng: random.Random, p: GenParams):
        self.rng = rng
        self.p = p
        self.data = [f"v{i}" for i in range(p.max_vars)]
        self.counters = 0
        self.stmts: dict[int, object] = {}
        self.edges: set = set()
        self.next_id = 0

    # -- expressions -------------------------------------------------------

    def operand(self):
        if self.rng.random() < 0.3:
            return Const(self.rng.randint(-3, 3))
        return Var(self.rng.choice(self.data))

    def rhs(self):
        r = self.rng.random()
        if r < 0.25:
            return self.operand()
        op = self.rng.choice(["+", "+", "-", "-", "*"])
        right = Const(self.rng.randint(1, 2)) if op == "*" else self.operand()
        return BinOp(op, Var(self.rng.choice(self.data)), right)

    def cond(self):
        op = self.rng.choice(["<", "<=", ">", ">=", "==", "!="])
        return BinOp(op, Var(self.rng.choice(self.data)), self.operand())

    # -- statement tree ----------------------------------------------------

    def block(self, budget: int, depth: int) -> list:
        items = []
        while budget > 0:
            item, used = self.item(budget, depth)
            items.append(item)
            budget -= used
            if self.rng.random() < 0.3:
                break
        return items

    def item(self, budget: int, depth: int):
        r = self.rng.random()
        if depth < 3 and budget >= 3 and r < self.p.loop_bias:
            counter = f"c{self.counters}"
            self.counters += 1
            body = self.block(budget - 2, depth + 1)
            kind = self.rng.choice(["while", "dowhile"])
            return (kind, counter, body), 2 + _size(body)
        if depth < 3 and budget >= 2 and r < self.p.loop_bias + (1 - self.p.loop_bias) * 0.35:
            then = self.block(max(1, (budget - 1) // 2), depth + 1)
            rest = budget - 1 - _size(then)
            other = self.block(rest, depth + 1) if rest > 0 and self.rng.random() < 0.6 else []
            return ("if", self.cond(), then, other), 1 + _size(then) + _size(other)
        return ("assign", self.rng.choice(self.data), self.rhs()), 1

    # -- lowering ----------------------------------------------------------

    def new(self, stmt) -> int:
        n = self.next_id
        self.next_id += 1
        self.stmts[n] = stmt
        return n

    def lower_block(self, items: list, succ: int) -> int:
        for item in reversed(items):
            succ = self.lower(item, succ)
        return succ

    def lower(self, item, succ: int) -> int:
        kind = item[0]
        if kind == "assign":
            n = self.new(Assign(item[1], item[2]))
            self.edges.add((n, succ, None))
            return n
        if kind == "if":
            n = self.new(If(item[1]))
            self.edges.add((n, self.lower_block(item[2], succ), "T"))
            self.edges.add((n, self.lower_block(item[3], succ), "F"))
            return n
        counter, body = item[1], item[2]
        test = self.new(If(BinOp(">", Var(counter), Const(0))))
        dec = self.new(Assign(counter, BinOp("-", Var(counter), Const(1))))
        self.edges.add((dec, test, None))
        entry = self.lower_block(body, dec)
        self.edges.add((test, entry, "T"))
        self.edges.add((test, succ, "F"))
        return test if kind == "while" else entry


def _size(items: list) -> int:
    total = 0
    for it in items:
        if it[0] == "assign":
            total += 1
        elif it[0] == "if":
            total += 1 + _size(it[2]) + _size(it[3])
        else:
            total += 2 + _size(it[2])
    return total


def _reach(adj: dict, start) -> set:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _acceptable(stmts: dict, edges: set, start: int, ret: int, acyclic: bool) -> bool:
    succ: dict = {}
    pred: dict = {}
    for s, t, _ in edges:
        succ.setdefault(s, set()).add(t)
        pred.setdefault(t, set()).add(s)
    if start in pred:
        return False
    if _reach(succ, start) != set(stmts) or _reach(pred, ret) != set(stmts):
        return False
    if any(len(succ.get(n, ())) < 2 for n, st in stmts.items() if isinstance(st, If)):
        return False
    if acyclic:
        indeg = {n: len(pred.get(n, ())) for n in stmts}
        ready = [n for n, d in indeg.items() if d == 0]
        seen = 0
        while ready:
            v = ready.pop()
            seen += 1
            for w in succ.get(v, ()):
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        if seen != len(stmts):
            return False
    return True


def _renumber(stmts: dict, edges: set, start: int) -> Cfg:
    """Number nodes 0.. in breadth-first order from the start node."""
    succ: dict = {}
    for s, t, lab in sorted(edges, key=lambda e: (e[0], e[2] or "", e[1])):
        succ.setdefault(s, []).append(t)
    order = [start]
    seen = {start}
    for v in order:
        for w in succ.get(v, ()):
            if w not in seen:
                seen.add(w)
                order.append(w)
    ix = {n: i for i, n in enumerate(order)}
    return Cfg.build(
        {ix[n]: st for n, st in stmts.items()},
        [(ix[s], ix[t], lab) for s, t, lab in edges],
        ix[start],
    )


def random_cfg(seed: int, params: Optional[GenParams] = None, **kw) -> Cfg:
    """A valid CFG determined entirely by ``seed`` and ``params``."""
    p = params or GenParams(**kw)
    rng = random.Random(seed)
    b = _Builder(rng, p)
    budget = max(0, p.max_nodes - 2)
    items = b.block(budget, 0) if budget else []
    while items and _size(items) > budget:
        items.pop()
    ret = b.new(Ret(rng.choice(b.data)))
    body = b.lower_block(items, ret)
    start = b.new(Assign(rng.choice(b.data), b.rhs()))
    b.edges.add((start, body, None))
    stmts, edges = b.stmts, set(b.edges)

    acyclic = p.loop_bias == 0
    movable = sorted(e for e in edges if e[0] != start)
    for _ in range(rng.randint(0, p.retargets) if movable else 0):
        e = rng.choice(movable)
        t = rng.choice(sorted(n for n in stmts if n != start))
        cand = (edges - {e}) | {(e[0], t, e[2])}
        if len(cand) != len(edges) or t == e[1]:
            continue
        if _acceptable(stmts, cand, start, ret, acyclic):
            edges = cand
            movable = sorted(x for x in edges if x[0] != start)
    cfg = _renumber(stmts, edges, start)
    bad = validate_cfg(cfg)
    assert not bad, bad
    return cfg


def random_store(cfg: Cfg, rng: random.Random, lo: int = -4, hi: int = 4) -> dict:
    return {x: rng.randint(lo, hi) for x in cfg.variables}
