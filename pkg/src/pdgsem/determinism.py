"""The deterministic-PDG conditions.

A PDG is deterministic when

1. two controllers of the same node never become active together,
2. two definitions reaching one use that can both execute in the same
   branch are ordered by a def-order edge, and
3. a data edge whose source lies in the body of a CDG-loop node ``r``
   ends inside ``r``'s starred subgraph.

:func:`check_dpdg` reports every failing instance with its witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .ir import node_name
from .pdg import Pdg, mca, subgraph


@dataclass(frozen=True)
class DpdgViolation:
    cond: int
    witness: tuple
    explanation: str

    def line(self) -> str:
        w = ",".join(_fmt(x) for x in self.witness)
        return f"VIOLATION cond={self.cond} witness={w} {self.explanation}"

    def as_dict(self) -> dict:
        return {
            "cond": self.cond,
            "witness": [_fmt(x) for x in self.witness],
            "explanation": self.explanation,
        }


def _fmt(x) -> str:
    if isinstance(x, int):
        return node_name(x)
    return str(x)


@dataclass
class DpdgReport:
    violations: list[DpdgViolation] = field(default_factory=list)

    @property
    def deterministic(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        return "deterministic" if self.deterministic else "non-deterministic"

    def by_condition(self, cond: int) -> list[DpdgViolation]:
        return [v for v in self.violations if v.cond == cond]

    def lines(self) -> list[str]:
        if self.deterministic:
            return ["DETERMINISTIC"]
        return [v.line() for v in self.violations]


def shared_branch(pdg: Pdg, p: int, q: int) -> list[tuple[int, str]]:
    """Pairs (r, Q) with r in mca(p, q) and both p and q in G_Q*(r)."""
    out = []
    for r in sorted(mca(pdg, p, q)):
        for lab in ("T", "F"):
            g = subgraph(pdg, r, "G" + lab + "S")
            if p in g and q in g:
                out.append((r, lab))
    return out


def condition1(pdg: Pdg) -> list[DpdgViolation]:
    out = []
    preds: dict[int, set[int]] = {}
    for s, t, _ in pdg.C:
        preds.setdefault(t, set()).add(s)
    for n in sorted(preds):
        for p, q in combinations(sorted(preds[n]), 2):
            if p in subgraph(pdg, q, "GS") or q in subgraph(pdg, p, "GS"):
                continue
            for r, lab in shared_branch(pdg, p, q)[:1]:
                out.append(
                    DpdgViolation(
                        1,
                        (p, q, n, r),
                        f"controllers {node_name(p)} and {node_name(q)} of {node_name(n)} "
                        f"both lie in G_{lab}*({node_name(r)})",
                    )
                )
    return out


def condition2(pdg: Pdg) -> list[DpdgViolation]:
    out = []
    defs: dict[tuple[int, str], set[int]] = {}
    for s, t, w in pdg.F:
        defs.setdefault((t, w), set()).add(s)
    for (u, w), srcs in sorted(defs.items()):
        for p, q in combinations(sorted(srcs), 2):
            if (p, q) in pdg.D or (q, p) in pdg.D:
                continue
            for r, lab in shared_branch(pdg, p, q)[:1]:
                out.append(
                    DpdgViolation(
                        2,
                        (p, q, u, r),
                        f"definitions of {w} at {p} and {q} both reach {u}, share "
                        f"G_{lab}*({node_name(r)}) and are unordered by D",
                    )
                )
    return out


def condition3(pdg: Pdg) -> list[DpdgViolation]:
    out = []
    looped = sorted({n for lp in pdg.cdg_loops.loops for n in lp.nodes})
    edges = [(s, t, f"f_{w}") for s, t, w in pdg.F] + [(s, t, "d") for s, t in pdg.D]
    for r in looped:
        g = subgraph(pdg, r, "G")
        gs = subgraph(pdg, r, "GS")
        for p, q, kind in sorted(edges):
            if p in g and q not in gs:
                out.append(
                    DpdgViolation(
                        3,
                        (p, q, r),
                        f"{kind}({p},{q}) leaves the subgraph of CDG-loop node {node_name(r)}",
                    )
                )
    return out


def check_dpdg(pdg: Pdg) -> DpdgReport:
    return DpdgReport(condition1(pdg) + condition2(pdg) + condition3(pdg))
