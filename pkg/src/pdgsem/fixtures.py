"""Named example programs.

W, F5, F6 and FIG12 carry known loop and looping-edge structure that the
tests assert on. The remaining programs are small probes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .ir import Cfg, parse_cfg, parse_store


@dataclass(frozen=True)
class Fixture:
    name: str
    source: str
    init: str
    note: str = ""
    deterministic: bool = True

    @property
    def cfg(self) -> Cfg:
        return _parse(self.source)

    @property
    def store(self) -> dict:
        return parse_store(self.init)


@lru_cache(maxsize=None)
def _parse(source: str) -> Cfg:
    return parse_cfg(source)


P_STRAIGHT = Fixture(
    "P_STRAIGHT",
    """\
node 1: x := 1
node 2: y := x + 1
node 3: ret y
edge 1 -> 2
edge 2 -> 3
""",
    "x=0,y=0",
    "three-node straight line",
)

P_INDEP = Fixture(
    "P_INDEP",
    """\
node 1: x := 1
node 2: y := 2
node 3: z := x + y
node 4: ret z
edge 1 -> 2
edge 2 -> 3
edge 3 -> 4
""",
    "x=0,y=0,z=0",
    "two independent assignments feeding a sum",
)

P_DIAMOND = Fixture(
    "P_DIAMOND",
    """\
node 0: if c > 0
node 1: x := 1
node 2: x := 2
node 3: y := x
node 4: ret y
edge 0 -T-> 1
edge 0 -F-> 2
edge 1 -> 3
edge 2 -> 3
edge 3 -> 4
""",
    "c=1,x=0,y=0",
    "if/join with one definition per arm",
)

P_NESTED = Fixture(
    "P_NESTED",
    """\
node 0: if a > 0
node 1: if b > 0
node 2: x := a + b
node 3: x := a - b
node 4: y := x * 2
node 5: y := 7
node 6: ret y
edge 0 -T-> 1
edge 0 -F-> 5
edge 1 -T-> 2
edge 1 -F-> 3
edge 2 -> 4
edge 3 -> 4
edge 4 -> 6
edge 5 -> 6
""",
    "a=1,b=0,x=0,y=0",
    "conditional nested in one arm of another",
)

# do-while: 4 tests at the bottom; its T edge re-enters 2
W = Fixture(
    "W",
    """\
node 1: s := 0
node 2: s := s + i
node 3: i := i + 1
node 4: if i < 3
node 5: ret s
edge 1 -> 2
edge 2 -> 3
edge 3 -> 4
edge 4 -T-> 2
edge 4 -F-> 5
""",
    "i=0,s=0",
    "bottom-tested loop; 5 is control dependent on 4",
)

SUM3 = Fixture(
    "SUM3",
    """\
node 1: s := 0
node 2: i := 1
node 3: if i <= 3
node 4: s := s + i
node 5: i := i + 1
node 6: ret s
edge 1 -> 2
edge 2 -> 3
edge 3 -T-> 4
edge 3 -F-> 6
edge 4 -> 5
edge 5 -> 3
""",
    "i=0,s=0",
    "while loop summing 1..3",
)

# irreducible loop {1..6} entered at 1 or at 4
F5 = Fixture(
    "F5",
    """\
node 0: if a > 0
node 1: k := k - 1
node 2: s := s + 1
node 3: if k > 0
node 4: s := s + 2
node 5: k := k - 1
node 6: if k > 0
node 7: ret s
edge 0 -T-> 1
edge 0 -F-> 4
edge 1 -> 2
edge 2 -> 3
edge 3 -T-> 4
edge 3 -F-> 7
edge 4 -> 5
edge 5 -> 6
edge 6 -T-> 1
edge 6 -F-> 7
""",
    "a=1,k=3,s=0",
    "two-entry loop with iteration statements 3 and 6",
)

F5_ALT = Fixture(
    "F5_ALT",
    F5.source,
    "a=0,k=4,s=1",
    "F5 entered through node 4",
)

F6 = Fixture(
    "F6",
    """\
node 0: s := 0
node 1: i := i - 1
node 2: s := s + 1
node 3: j := j - 1
node 4: if j > 0
node 5: if i > 0
node 6: ret s
edge 0 -> 1
edge 1 -> 2
edge 2 -> 3
edge 3 -> 4
edge 4 -T-> 2
edge 4 -F-> 5
edge 5 -T-> 1
edge 5 -F-> 6
""",
    "i=2,j=2,s=0",
    "loop {2,3,4} nested in loop {1..5}",
)

# the back edge 3 -> 1 re-enters the T arm of 0
FIG12 = Fixture(
    "FIG12",
    """\
node 0: if c > 0
node 1: x := x + 1
node 2: y := y + 1
node 3: if x < 3
node 4: ret x
edge 0 -T-> 1
edge 0 -F-> 2
edge 1 -> 3
edge 2 -> 3
edge 3 -T-> 1
edge 3 -F-> 4
""",
    "c=1,x=0,y=0",
    "back edge from an if into one arm of a conditional",
    deterministic=False,
)

P_LICM = Fixture(
    "P_LICM",
    """\
node 1: t := x * y
node 2: s := s + t
node 3: i := i - 1
node 4: if i > 0
node 5: ret s
edge 1 -> 2
edge 2 -> 3
edge 3 -> 4
edge 4 -T-> 2
edge 4 -F-> 5
""",
    "i=3,s=0,t=0,x=2,y=3",
    "do-while after hoisting an invariant product",
)

P_BREAK = Fixture(
    "P_BREAK",
    """\
node 1: s := 0
node 2: if i > 0
node 3: s := s + i
node 4: if s > 5
node 5: i := i - 1
node 6: ret s
edge 1 -> 2
edge 2 -T-> 3
edge 2 -F-> 6
edge 3 -> 4
edge 4 -T-> 6
edge 4 -F-> 5
edge 5 -> 2
""",
    "i=4,s=0",
    "while loop with an early exit",
)

# x is produced at 5 and consumed at 2 only across the back edge 6 -> 1
STUCKL = Fixture(
    "STUCKL",
    """\
node 0: if a > 0
node 1: k := k - 1
node 2: s := s + x
node 3: if k > 0
node 4: k := k - 1
node 5: x := x + 1
node 6: if k > 0
node 7: ret s
edge 0 -T-> 1
edge 0 -F-> 4
edge 1 -> 2
edge 2 -> 3
edge 3 -T-> 4
edge 3 -F-> 7
edge 4 -> 5
edge 5 -> 6
edge 6 -T-> 1
edge 6 -F-> 7
""",
    "a=0,k=4,s=0,x=1",
    "loop-carried producer that runs before its consumer on entry",
)

SPIN = Fixture(
    "SPIN",
    """\
node 0: x := 0
node 1: if T
node 2: ret x
edge 0 -> 1
edge 1 -T-> 1
edge 1 -F-> 2
""",
    "x=0",
    "never terminates",
)

CATALOG: dict[str, Fixture] = {
    f.name: f
    for f in (
        P_STRAIGHT,
        P_INDEP,
        P_DIAMOND,
        P_NESTED,
        W,
        SUM3,
        F5,
        F5_ALT,
        F6,
        FIG12,
        P_LICM,
        P_BREAK,
        STUCKL,
        SPIN,
    )
}


def fixture(name: str) -> Fixture:
    return CATALOG[name]
