"""Command line interface: ``pdgsem <subcommand> ...``.

Exit codes: 0 success or pass, 1 a check failed, 2 usage or parse
error, 3 a step/state/path limit was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .dependence import analyze, dependence_lines
from .determinism import check_dpdg
from .dot import export_dot
from .execution import machine, pdg_run
from .explore import check_confluence, check_equivalence, explore_all, lemma_audit
from .fuzz import fuzz_campaign
from .generate import GenParams
from .ir import (
    ENTRY,
    EXIT,
    CfgError,
    IRSyntaxError,
    Truth,
    cfg_run,
    check_store,
    format_store,
    format_value,
    node_name,
    parse_cfg,
    parse_store,
    returned_value,
    validate_cfg,
)
from .pdg import MODES, McaLimitExceeded, build_pdg, mca, pdg_lines, subgraph

OK, FAIL, USAGE, LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _jv(v):
    return v.value if isinstance(v, Truth) else v


def _node(text: str) -> int:
    if text == "entry":
        return ENTRY
    if text == "exit":
        return EXIT
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"bad node id {text!r}") from None


def _nodes_str(ns) -> str:
    return "{" + ", ".join(node_name(n) for n in sorted(ns)) + "}"


def _load(path: str, validate: bool = True):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    return parse_cfg(text, validate=validate)


def _store(args, cfg):
    if args.init is not None and args.init_file is not None:
        raise UsageError("give only one of --init and --init-file")
    text = args.init
    if args.init_file is not None:
        try:
            with open(args.init_file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(str(exc)) from None
    if text is None:
        raise UsageError("an initial store is required (--init or --init-file)")
    try:
        store = parse_store(text)
        check_store(cfg, store)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return store


def _emit(args, data, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(data, indent=1, sort_keys=True))
    else:
        for line in lines:
            print(line)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check(args) -> int:
    cfg = _load(args.file, validate=False)
    bad = validate_cfg(cfg)
    lines = ["OK"] if not bad else [f"VIOLATION {v}" for v in bad]
    _emit(args, {"ok": not bad, "violations": [str(v) for v in bad]}, lines)
    return OK if not bad else FAIL


def cmd_deps(args) -> int:
    a = analyze(_load(args.file))
    data = {
        "CD": [[node_name(s), node_name(t), q] for s, t, q in sorted(a.cd)],
        "LIDD": [list(e) for e in sorted(a.lidd)],
        "LCDD": [list(e) for e in sorted(a.lcdd)],
        "DEFORD": [list(e) for e in sorted(a.deford)],
    }
    _emit(args, data, dependence_lines(a))
    return OK


def cmd_pdg(args) -> int:
    cfg = _load(args.file)
    pdg = build_pdg(cfg)
    data: dict = {}
    lines: list[str] = []
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(export_dot(pdg))
        data["dot"] = args.dot
    if args.subgraph is not None:
        n = _node(args.subgraph)
        if n not in pdg.nodes:
            raise UsageError(f"unknown node {args.subgraph}")
        ns = subgraph(pdg, n, args.mode)
        data["subgraph"] = {"node": node_name(n), "mode": args.mode, "nodes": sorted(ns)}
        lines.append(_nodes_str(ns))
    if args.mca:
        p, q = (_node(x) for x in args.mca)
        for x in (p, q):
            if x not in pdg.nodes:
                raise UsageError(f"unknown node {node_name(x)}")
        ns = mca(pdg, p, q)
        data["mca"] = [node_name(x) for x in sorted(ns)]
        lines.append(_nodes_str(ns))
    if args.subgraph is None and not args.mca:
        lines = pdg_lines(pdg)
        data["edges"] = lines
    _emit(args, data, lines)
    return OK


def cmd_run_cfg(args) -> int:
    cfg = _load(args.file)
    store = _store(args, cfg)
    tr = cfg_run(cfg, store, args.bound)
    lines = []
    if args.trace:
        lines += [f"step {i}: exec {n}; store {format_store(s)}" for i, (n, s) in enumerate(tr.steps)]
    value = returned_value(cfg, tr)
    lines.append(f"verdict: {tr.verdict}")
    lines.append(f"steps: {len(tr.steps)}")
    if tr.error:
        lines.append(f"error: {tr.error}")
    if tr.terminated:
        lines.append(f"returned: {format_value(value)}")
    data = {
        "verdict": tr.verdict,
        "steps": len(tr.steps),
        "order": tr.order,
        "returned": _jv(value),
        "final_store": {k: _jv(v) for k, v in sorted(tr.final_store.items())},
        "error": tr.error,
    }
    _emit(args, data, lines)
    return {"terminated": OK, "bound-exceeded": LIMIT}.get(tr.verdict, FAIL)


def cmd_run_pdg(args) -> int:
    cfg = _load(args.file)
    store = _store(args, cfg)
    pdg = build_pdg(cfg)
    run = pdg_run(pdg, store, args.strategy, args.seed, args.bound, audit=args.audit)
    lines = []
    if args.trace:
        lines += [
            f"step {i}: exec {n}; Next was {_nodes_str(nx)}"
            for i, ((_, n), nx) in enumerate(zip(run.steps, run.nexts))
        ]
    lines.append(f"verdict: {run.verdict}")
    lines.append(f"steps: {run.length}")
    if run.error:
        lines.append(f"error: {run.error}")
    if run.ret_count:
        lines.append(f"returned: {format_value(run.ret_value)}")
    for f in run.audit_failures:
        lines.append(f"AUDIT {f}")
    data = {
        "verdict": run.verdict,
        "steps": run.length,
        "order": run.order,
        "returned": _jv(run.ret_value),
        "error": run.error,
        "audit_failures": run.audit_failures,
    }
    _emit(args, data, lines)
    if run.verdict == "bound-exceeded":
        return LIMIT
    return OK if run.verdict == "quiescent" and not run.audit_failures else FAIL


def cmd_explore(args) -> int:
    cfg = _load(args.file)
    store = _store(args, cfg)
    pdg = build_pdg(cfg)
    ex = explore_all(pdg, store, args.max_states, args.max_depth)
    data = ex.summary()
    lines = [f"{k}: {v}" for k, v in data.items()]
    if ex.complete:
        rep = check_dpdg(pdg)
        conf = check_confluence(ex, rep)
        audit = lemma_audit(pdg, ex, rep)
        data["confluence"] = {"passed": conf.passed, "alarm": conf.alarm, "detail": conf.detail}
        data["audit"] = {"checked": list(audit.checked), "pairs": audit.pairs, "diamonds": audit.diamonds, "failures": audit.failures}
        lines.append(f"confluence: {'PASS' if conf.passed else 'FAIL'} ({conf.detail})" + (" ALARM" if conf.alarm else ""))
        lines.append(f"audit: {len(audit.failures)} failure(s) over {audit.pairs} pair(s), {audit.diamonds} diamond(s)")
        lines += [f"AUDIT {f}" for f in audit.failures]
    _emit(args, data, lines)
    return OK if ex.complete else LIMIT


def cmd_dpdg(args) -> int:
    pdg = build_pdg(_load(args.file))
    rep = check_dpdg(pdg)
    data = {"verdict": rep.verdict, "violations": [v.as_dict() for v in rep.violations]}
    _emit(args, data, rep.lines())
    return OK if rep.deterministic else FAIL


def cmd_equiv(args) -> int:
    cfg = _load(args.file)
    store = _store(args, cfg)
    v = check_equivalence(cfg, store, args.bound, max_states=args.max_states)
    lines = [f"status: {v.status}"]
    if v.cfg_value is not None:
        lines.append(f"cfg returned: {format_value(v.cfg_value)}")
    if v.guided_ok is not None:
        lines.append(f"guided run: {v.guided_detail}")
        lines.append(f"pdg runs compared: {v.compared} ({v.method}); stuck: {v.stuck}")
    lines += [f"MISMATCH {m}" for m in v.mismatches]
    data = {
        "status": v.status,
        "cfg_value": _jv(v.cfg_value),
        "guided_ok": v.guided_ok,
        "guided": v.guided_detail,
        "method": v.method,
        "compared": v.compared,
        "stuck": v.stuck,
        "mismatches": v.mismatches,
    }
    _emit(args, data, lines)
    if v.status.startswith("skipped"):
        return LIMIT
    return OK if v.passed else FAIL


def cmd_fuzz(args) -> int:
    params = GenParams(max_nodes=args.max_nodes, loop_bias=args.loop_bias, max_vars=args.max_vars)
    rep = fuzz_campaign(args.seed, args.count, params, dynamic=not args.static_only)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json() + "\n")
    if args.json:
        print(rep.to_json())
    else:
        for line in rep.summary_lines():
            print(line)
    t = rep.totals
    bad = t["cond23_violations"] or t["static_lemma_failures"] or t["guided_failed"]
    bad = bad or t["value_mismatch_programs"] or t["confluence_alarms"] or t["audit_failure_programs"]
    return FAIL if bad else OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdgsem", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, file=True, store=False):
        p = sub.add_parser(name, help=help_)
        if file:
            p.add_argument("file", help="program in the IR text format")
        if store:
            p.add_argument("--init", help="initial store, e.g. 'x=1,y=T'")
            p.add_argument("--init-file", help="file holding the initial store")
        p.add_argument("--json", action="store_true", help="emit JSON")
        p.set_defaults(fn=fn)
        return p

    add("check", cmd_check, "validate a program")
    add("deps", cmd_deps, "print the control and data dependences")
    p = add("pdg", cmd_pdg, "build the PDG")
    p.add_argument("--dot", metavar="OUT", help="write Graphviz DOT to OUT")
    p.add_argument("--subgraph", metavar="NODE", help="print a subgraph node set")
    p.add_argument("--mode", choices=MODES, default="G")
    p.add_argument("--mca", nargs=2, metavar=("P", "Q"), help="print mca(P, Q)")
    p = add("run-cfg", cmd_run_cfg, "run the CFG interpreter", store=True)
    p.add_argument("--bound", type=int, default=10_000)
    p.add_argument("--trace", action="store_true")
    p = add("run-pdg", cmd_run_pdg, "run the PDG semantics", store=True)
    p.add_argument("--strategy", choices=("min-id", "random"), default="min-id")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bound", type=int, default=10_000)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--audit", action="store_true", help="check the pairwise lemmas at every step")
    p = add("explore", cmd_explore, "explore every PDG interleaving", store=True)
    p.add_argument("--max-states", type=int, default=100_000)
    p.add_argument("--max-depth", type=int, default=10_000)
    add("dpdg", cmd_dpdg, "check the deterministic-PDG conditions")
    p = add("equiv", cmd_equiv, "compare CFG and PDG results", store=True)
    p.add_argument("--bound", type=int, default=10_000)
    p.add_argument("--max-states", type=int, default=100_000)
    p = add("fuzz", cmd_fuzz, "run a differential fuzz campaign", file=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-nodes", type=int, default=12)
    p.add_argument("--loop-bias", type=float, default=0.35)
    p.add_argument("--max-vars", type=int, default=3)
    p.add_argument("--static-only", action="store_true", help="skip the dynamic checks")
    p.add_argument("--out", help="write the full JSON report here")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, IRSyntaxError, CfgError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except McaLimitExceeded as exc:
        print(f"limit exceeded: {exc}", file=sys.stderr)
        return LIMIT


if __name__ == "__main__":
    sys.exit(main())
