"""Graphviz export for CFGs and PDGs.

Output is fully determined by the graph: nodes and edges are emitted in
sorted order so the same input always yields byte-identical text.
"""

from __future__ import annotations

from .ir import ENTRY, EXIT, Cfg, node_name
from .pdg import Pdg


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _node_id(n: int) -> str:
    return _quote(node_name(n)) if n in (ENTRY, EXIT) else _quote(f"n{n}")


def _node_line(n: int, label: str, shape: str = "box") -> str:
    return f"  {_node_id(n)} [label={_quote(label)}, shape={shape}];"


def _cfg_dot(cfg: Cfg, name: str) -> str:
    lines = [f"digraph {_quote(name)} {{"]
    for n, st in sorted(cfg.nodes.items()):
        lines.append(_node_line(n, f"{n}: {st}"))
    for s, t, lab in sorted(cfg.edges, key=lambda e: (e[0], e[1], e[2] or "")):
        attrs = f" [label={_quote(lab)}]" if lab else ""
        lines.append(f"  {_node_id(s)} -> {_node_id(t)}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _pdg_dot(pdg: Pdg, name: str) -> str:
    lines = [f"digraph {_quote(name)} {{"]
    lines.append(_node_line(ENTRY, "entry", "ellipse"))
    for n, st in pdg.stmts:
        lines.append(_node_line(n, f"{n}: {st}"))
    for k in pdg.edge_keys:
        a, b = _node_id(k.src), _node_id(k.dst)
        if k.kind == "C":
            attrs = f"label={_quote(k.tag)}, style=solid"
        elif k.kind == "F":
            attrs = f"label={_quote(k.tag)}, style=dashed"
        elif k.kind == "L":
            attrs = f"label={_quote(k.tag)}, style=dotted"
        else:
            attrs = "style=bold"
        lines.append(f"  {a} -> {b} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(g, name: str = "G") -> str:
    """DOT text for a :class:`Cfg` or :class:`Pdg`."""
    if isinstance(g, Cfg):
        return _cfg_dot(g, name)
    if isinstance(g, Pdg):
        return _pdg_dot(g, name)
    raise TypeError(f"cannot export {type(g).__name__} to DOT")
