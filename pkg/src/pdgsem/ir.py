"""Three-statement IR: expressions, statements, control flow graphs.

A program is a set of numbered nodes, each holding an assignment, a
conditional or a return, connected by flow edges.  Conditionals carry a
``T`` and an ``F`` edge; assignments carry one unlabeled edge.

The text format is line oriented::

    # sum 1..3
    node 1: s := 0
    node 2: i := 1
    node 3: if i <= 3
    edge 1 -> 2
    edge 3 -T-> 4
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Union

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

# Reserved ids for the synthetic nodes of the augmented graph.  Parsed ids
# are non-negative, so these never collide.
ENTRY = -1
EXIT = -2

IDENT_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*\Z")
KEYWORDS = frozenset({"node", "edge", "if", "ret", "T", "F"})


class Truth(enum.Enum):
    TRUE = "T"
    FALSE = "F"

    def __repr__(self) -> str:
        return self.value

    __str__ = __repr__


TRUE = Truth.TRUE
FALSE = Truth.FALSE

Value = Union[int, Truth]


def format_value(v: Value) -> str:
    return v.value if isinstance(v, Truth) else str(v)


def node_name(n: int) -> str:
    if n == ENTRY:
        return "entry"
    if n == EXIT:
        return "exit"
    return str(n)


# ---------------------------------------------------------------------------
# Expressions


class EvalError(RuntimeError):
    """Raised when an expression cannot be evaluated (type error or overflow)
    or a condition is not a truth value."""


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, BinOp]

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")

_PREC = {"+": 1, "-": 1, "*": 2}
for _op in CMP_OPS:
    _PREC[_op] = 0


def expr_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    return frozenset()


def _level(e: Expr) -> int:
    return _PREC[e.op] if isinstance(e, BinOp) else 3


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return format_value(e.value)
    if isinstance(e, Var):
        return e.name
    lvl = _PREC[e.op]
    left = format_expr(e.left)
    right = format_expr(e.right)
    if lvl == 0:
        # comparisons are non-associative: both operands must be arith
        if _level(e.left) == 0:
            left = f"({left})"
        if _level(e.right) == 0:
            right = f"({right})"
    else:
        if _level(e.left) < lvl:
            left = f"({left})"
        if _level(e.right) <= lvl:
            right = f"({right})"
    return f"{left} {e.op} {right}"


def _check_int(v: int) -> int:
    if v < INT_MIN or v > INT_MAX:
        raise EvalError(f"integer overflow: {v} outside 64-bit range")
    return v


def eval_expr(e: Expr, env: Mapping[str, Value]) -> Value:
    """Evaluate ``e`` under ``env``.

    Arithmetic is 64-bit signed; leaving that range raises EvalError
    instead of wrapping.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}") from None
    a = eval_expr(e.left, env)
    b = eval_expr(e.right, env)
    op = e.op
    if op in ARITH_OPS:
        if isinstance(a, Truth) or isinstance(b, Truth):
            raise EvalError(f"type error: {format_value(a)} {op} {format_value(b)}")
        if op == "+":
            return _check_int(a + b)
        if op == "-":
            return _check_int(a - b)
        return _check_int(a * b)
    if isinstance(a, Truth) != isinstance(b, Truth):
        raise EvalError(f"type error: {format_value(a)} {op} {format_value(b)}")
    if isinstance(a, Truth):
        if op == "==":
            return TRUE if a is b else FALSE
        if op == "!=":
            return TRUE if a is not b else FALSE
        raise EvalError(f"type error: ordering on truth values ({op})")
    if op == "==":
        r = a == b
    elif op == "!=":
        r = a != b
    elif op == "<":
        r = a < b
    elif op == "<=":
        r = a <= b
    elif op == ">":
        r = a > b
    else:
        r = a >= b
    return TRUE if r else FALSE


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Assign:
    target: str
    rhs: Expr

    @property
    def uses(self) -> frozenset[str]:
        return expr_vars(self.rhs)

    @property
    def defs(self) -> frozenset[str]:
        return frozenset((self.target,))

    def __str__(self) -> str:
        return f"{self.target} := {format_expr(self.rhs)}"


@dataclass(frozen=True)
class If:
    cond: Expr

    @property
    def uses(self) -> frozenset[str]:
        return expr_vars(self.cond)

    @property
    def defs(self) -> frozenset[str]:
        return frozenset()

    def __str__(self) -> str:
        return f"if {format_expr(self.cond)}"


@dataclass(frozen=True)
class Ret:
    var: str

    @property
    def uses(self) -> frozenset[str]:
        return frozenset((self.var,))

    @property
    def defs(self) -> frozenset[str]:
        return frozenset()

    def __str__(self) -> str:
        return f"ret {self.var}"


Stmt = Union[Assign, If, Ret]

# (src, dst, label) with label None, "T" or "F"
Edge = tuple[int, int, Optional[str]]

_LABEL_RANK = {None: 0, "T": 1, "F": 2}


def edge_key(e: Edge) -> tuple[int, int, int]:
    return (e[0], e[1], _LABEL_RANK[e[2]])


def format_edge(e: Edge) -> str:
    arrow = "->" if e[2] is None else f"-{e[2]}->"
    return f"{node_name(e[0])} {arrow} {node_name(e[1])}"


# ---------------------------------------------------------------------------
# Graphs


@dataclass(frozen=True)
class Cfg:
    """A control flow graph.  Immutable and hashable."""

    stmts: tuple[tuple[int, Stmt], ...]
    edges: frozenset[Edge]
    start: int

    @classmethod
    def build(
        cls,
        nodes: Mapping[int, Stmt],
        edges: Iterable[Edge],
        start: Optional[int] = None,
    ) -> "Cfg":
        edges = frozenset(edges)
        if start is None:
            start = infer_start(nodes, edges)
        return cls(tuple(sorted(nodes.items())), edges, start)

    @cached_property
    def nodes(self) -> dict[int, Stmt]:
        return dict(self.stmts)

    @cached_property
    def succ(self) -> dict[int, list[tuple[int, Optional[str]]]]:
        out: dict[int, list] = {n: [] for n, _ in self.stmts}
        for s, t, lab in sorted(self.edges, key=edge_key):
            out.setdefault(s, []).append((t, lab))
        return out

    @cached_property
    def pred(self) -> dict[int, list[int]]:
        out: dict[int, list] = {n: [] for n, _ in self.stmts}
        for s, t, _ in sorted(self.edges, key=edge_key):
            out.setdefault(t, []).append(s)
        return out

    @cached_property
    def variables(self) -> tuple[str, ...]:
        names: set[str] = set()
        for _, st in self.stmts:
            names |= st.uses | st.defs
        return tuple(sorted(names))

    @cached_property
    def ret_node(self) -> int:
        rets = [n for n, st in self.stmts if isinstance(st, Ret)]
        if len(rets) != 1:
            raise CfgError([Violation(f"expected one ret node, found {len(rets)}")])
        return rets[0]

    def successor(self, n: int, label: Optional[str]) -> int:
        for t, lab in self.succ[n]:
            if lab == label:
                return t
        raise KeyError((n, label))


@dataclass(frozen=True)
class AugmentedCfg:
    """A Cfg plus ``entry`` (T to start, F to exit) and ``exit``."""

    cfg: Cfg
    edges: frozenset[Edge]

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        return (ENTRY,) + tuple(n for n, _ in self.cfg.stmts) + (EXIT,)

    @cached_property
    def succ(self) -> dict[int, list[tuple[int, Optional[str]]]]:
        out: dict[int, list] = {n: [] for n in self.nodes}
        for s, t, lab in sorted(self.edges, key=edge_key):
            out[s].append((t, lab))
        return out


def augment_cfg(cfg: Cfg) -> AugmentedCfg:
    extra = {
        (ENTRY, cfg.start, "T"),
        (ENTRY, EXIT, "F"),
        (cfg.ret_node, EXIT, None),
    }
    return AugmentedCfg(cfg, cfg.edges | extra)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    message: str
    node: Optional[int] = None
    edge: Optional[Edge] = None

    def __str__(self) -> str:
        return self.message


class CfgError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class IRSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


def infer_start(nodes: Mapping[int, Stmt], edges: Iterable[Edge]) -> int:
    has_pred = {t for _, t, _ in edges}
    roots = sorted(n for n in nodes if n not in has_pred)
    if not roots:
        raise CfgError([Violation("missing start: every node has a predecessor")])
    if len(roots) > 1:
        raise CfgError(
            [Violation(f"ambiguous start: nodes {roots} have no predecessor")]
        )
    return roots[0]


def validate_cfg(cfg: Cfg) -> list[Violation]:
    """Return one Violation per broken structural invariant."""
    out: list[Violation] = []
    nodes = cfg.nodes
    for e in sorted(cfg.edges, key=edge_key):
        for end in (e[0], e[1]):
            if end not in nodes:
                out.append(Violation(f"edge {format_edge(e)} references unknown node {end}", edge=e))
        if e[2] not in (None, "T", "F"):
            out.append(Violation(f"edge {e} has bad label", edge=e))
    if cfg.start not in nodes:
        out.append(Violation(f"start node {cfg.start} does not exist", node=cfg.start))
        return out
    for n, st in cfg.stmts:
        if n < 0:
            out.append(Violation(f"node id {n} is negative", node=n))
        names = set(st.uses | st.defs)
        for name in sorted(names):
            if not IDENT_RE.match(name) or name in KEYWORDS:
                out.append(Violation(f"node {n}: bad identifier {name!r}", node=n))
        outs = [lab for t, lab in cfg.succ.get(n, [])]
        if isinstance(st, Assign):
            if len(outs) != 1:
                out.append(Violation(f"assign-node {n} has {len(outs)} successors, expected 1", node=n))
            elif outs[0] is not None:
                out.append(Violation(f"assign-node {n} edge is labeled {outs[0]}", node=n))
        elif isinstance(st, If):
            for lab in ("T", "F"):
                if outs.count(lab) == 0:
                    out.append(Violation(f"if-node {n} lacks {lab} successor", node=n))
            if len(outs) != 2 or outs.count("T") > 1 or outs.count("F") > 1:
                out.append(Violation(f"if-node {n} must have exactly one T and one F edge", node=n))
        elif isinstance(st, Ret):
            if outs:
                out.append(Violation(f"ret-node {n} has a successor", node=n))
        else:
            out.append(Violation(f"node {n}: unknown statement {st!r}", node=n))
    if cfg.pred.get(cfg.start):
        out.append(Violation(f"start node {cfg.start} has a predecessor", node=cfg.start))
    sinks = [n for n in nodes if not cfg.succ.get(n)]
    rets = [n for n, st in cfg.stmts if isinstance(st, Ret)]
    if len(sinks) != 1:
        out.append(Violation(f"expected exactly one node without successors, found {sorted(sinks)}"))
    if len(rets) != 1:
        out.append(Violation(f"expected exactly one ret node, found {sorted(rets)}"))
    seen = {cfg.start}
    stack = [cfg.start]
    while stack:
        n = stack.pop()
        for t, _ in cfg.succ.get(n, []):
            if t in nodes and t not in seen:
                seen.add(t)
                stack.append(t)
    for n in sorted(set(nodes) - seen):
        out.append(Violation(f"node {n} is unreachable from start", node=n))
    return out


def check_cfg(cfg: Cfg) -> Cfg:
    problems = validate_cfg(cfg)
    if problems:
        raise CfgError(problems)
    return cfg


# ---------------------------------------------------------------------------
# Text format

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)"
    r"|(?P<op>-T->|-F->|->|:=|==|!=|<=|>=|[<>+\-*():]))"
)


def _tokenize(line: str, lineno: int) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    line = line.rstrip()
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(line[pos:]) - len(line[pos:].lstrip()))
            raise IRSyntaxError(f"unexpected character {line[col - 1]!r}", lineno, col)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, toks, lineno: int, width: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.width = width

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def error(self, msg: str):
        tok = self.peek()
        col = tok[2] if tok else self.width + 1
        raise IRSyntaxError(msg, self.lineno, col)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok is None:
            self.error(f"expected {value or kind}, got end of line")
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            self.error(f"expected {value or kind}, got {tok[1]!r}")
        self.i += 1
        return tok

    def at(self, value) -> bool:
        tok = self.peek()
        return tok is not None and tok[0] == "op" and tok[1] == value

    def done(self):
        if self.peek() is not None:
            self.error(f"unexpected {self.peek()[1]!r}")

    def integer(self) -> int:
        v = int(self.take("int")[1])
        if v > INT_MAX:
            self.i -= 1
            self.error("integer literal out of 64-bit range")
        return v

    def ident(self) -> str:
        tok = self.take("ident")
        if tok[1] in KEYWORDS:
            self.i -= 1
            self.error(f"keyword {tok[1]!r} used as identifier")
        return tok[1]

    def expr(self) -> Expr:
        left = self.arith()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] in CMP_OPS:
            self.i += 1
            left = BinOp(tok[1], left, self.arith())
        return left

    def arith(self) -> Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.atom()
        while self.at("*"):
            self.take()
            left = BinOp("*", left, self.atom())
        return left

    def atom(self) -> Expr:
        tok = self.peek()
        if tok is None:
            self.error("expected expression")
        if tok[0] == "int":
            return Const(self.integer())
        if self.at("-") and self.i + 1 < len(self.toks) and self.toks[self.i + 1][0] == "int":
            # negative literal, as printed for Const(-k)
            self.take()
            v = -int(self.take("int")[1])
            if v < INT_MIN:
                self.i -= 1
                self.error("integer literal out of 64-bit range")
            return Const(v)
        if tok[0] == "ident":
            if tok[1] == "T":
                self.i += 1
                return Const(TRUE)
            if tok[1] == "F":
                self.i += 1
                return Const(FALSE)
            return Var(self.ident())
        if self.at("("):
            self.take()
            e = self.expr()
            self.take("op", ")")
            return e
        self.error(f"expected expression, got {tok[1]!r}")

    def stmt(self) -> Stmt:
        tok = self.peek()
        if tok and tok[0] == "ident" and tok[1] == "if":
            self.take()
            return If(self.expr())
        if tok and tok[0] == "ident" and tok[1] == "ret":
            self.take()
            return Ret(self.ident())
        target = self.ident()
        self.take("op", ":=")
        return Assign(target, self.expr())


def parse_expr(text: str) -> Expr:
    p = _Parser(_tokenize(text, 1), 1, len(text))
    e = p.expr()
    p.done()
    return e


def parse_cfg(text: str, validate: bool = True) -> Cfg:
    """Parse IR source into a Cfg; the start node is inferred."""
    nodes: dict[int, Stmt] = {}
    edges: list[Edge] = []
    edge_lines: list[tuple[Edge, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        p = _Parser(_tokenize(line, lineno), lineno, len(line))
        head = p.take("ident")
        if head[1] == "node":
            nid = p.integer()
            p.take("op", ":")
            st = p.stmt()
            p.done()
            if nid in nodes:
                raise IRSyntaxError(f"duplicate node id {nid}", lineno, head[2])
            nodes[nid] = st
        elif head[1] == "edge":
            src = p.integer()
            arrow = p.take("op")[1]
            if arrow not in ("->", "-T->", "-F->"):
                p.i -= 1
                p.error(f"expected arrow, got {arrow!r}")
            dst = p.integer()
            p.done()
            label = None if arrow == "->" else arrow[1]
            edge_lines.append(((src, dst, label), lineno))
        else:
            raise IRSyntaxError(f"expected 'node' or 'edge', got {head[1]!r}", lineno, head[2])
    seen_edges = set()
    for e, lineno in edge_lines:
        for end in (e[0], e[1]):
            if end not in nodes:
                raise IRSyntaxError(f"edge references unknown node {end}", lineno, 1)
        if e in seen_edges:
            raise IRSyntaxError(f"duplicate edge {format_edge(e)}", lineno, 1)
        seen_edges.add(e)
        edges.append(e)
    if not nodes:
        raise CfgError([Violation("missing start: program has no nodes")])
    cfg = Cfg.build(nodes, edges)
    return check_cfg(cfg) if validate else cfg


def print_cfg(cfg: Cfg) -> str:
    lines = [f"node {n}: {st}" for n, st in cfg.stmts]
    lines += [f"edge {format_edge(e)}" for e in sorted(cfg.edges, key=edge_key)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Stores and the CFG interpreter

Store = dict


def parse_value(text: str) -> Value:
    text = text.strip()
    if text == "T":
        return TRUE
    if text == "F":
        return FALSE
    v = int(text)
    return _check_int(v)


def parse_store(text: str) -> dict[str, Value]:
    """Parse ``x=1,y=T`` (commas or newlines separate bindings)."""
    out: dict[str, Value] = {}
    for part in re.split(r"[,\n]", text):
        part = part.split("#", 1)[0].strip()
        if not part:
            continue
        name, sep, val = part.partition("=")
        name = name.strip()
        if not sep or not IDENT_RE.match(name) or name in KEYWORDS:
            raise ValueError(f"bad binding {part!r}; expected IDENT=INT|T|F")
        if name in out:
            raise ValueError(f"variable {name!r} bound twice")
        try:
            out[name] = parse_value(val)
        except (ValueError, EvalError):
            raise ValueError(f"bad value in binding {part!r}") from None
    return out


def format_store(store: Mapping[str, Value]) -> str:
    return ",".join(f"{k}={format_value(store[k])}" for k in sorted(store))


def check_store(cfg: Cfg, store: Mapping[str, Value]) -> None:
    missing = [v for v in cfg.variables if v not in store]
    if missing:
        raise ValueError(f"initial store is missing bindings for {missing}")


def cfg_step(cfg: Cfg, n: int, store: Mapping[str, Value]) -> tuple[Optional[int], dict]:
    """Execute node ``n``; return (next node or None after ret, new store)."""
    st = cfg.nodes[n]
    if isinstance(st, Assign):
        v = eval_expr(st.rhs, store)
        new = dict(store)
        new[st.target] = v
        return cfg.succ[n][0][0], new
    if isinstance(st, If):
        c = eval_expr(st.cond, store)
        if not isinstance(c, Truth):
            raise EvalError(f"non-truth condition at node {n}: {c}")
        return cfg.successor(n, c.value), dict(store)
    return None, dict(store)


@dataclass
class CfgTrace:
    steps: list[tuple[int, dict]] = field(default_factory=list)
    final_store: dict = field(default_factory=dict)
    verdict: str = "terminated"
    error: Optional[str] = None

    @property
    def order(self) -> list[int]:
        return [n for n, _ in self.steps]

    @property
    def stores(self) -> list[dict]:
        return [s for _, s in self.steps]

    @property
    def terminated(self) -> bool:
        return self.verdict == "terminated"


def cfg_run(cfg: Cfg, store0: Mapping[str, Value], bound: int = 10_000) -> CfgTrace:
    check_store(cfg, store0)
    if bound < 1:
        raise ValueError("bound must be >= 1")
    trace = CfgTrace()
    n: Optional[int] = cfg.start
    store = dict(store0)
    for _ in range(bound):
        trace.steps.append((n, store))
        try:
            n, store = cfg_step(cfg, n, store)
        except EvalError as exc:
            trace.verdict = "runtime-error"
            trace.error = str(exc)
            trace.final_store = store
            return trace
        if n is None:
            trace.final_store = store
            return trace
    trace.verdict = "bound-exceeded"
    trace.final_store = store
    return trace


def returned_value(cfg: Cfg, trace: CfgTrace) -> Optional[Value]:
    if not trace.terminated:
        return None
    st = cfg.nodes[cfg.ret_node]
    return trace.final_store[st.var]
