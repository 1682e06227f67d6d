"""The eleven acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed at the end
of the pytest run (and immediately when run with ``-s``).
"""

import random
import time

import pytest

from pdgsem import oracles
from pdgsem.dependence import analyze, cfg_loops, enumerate_loops, postdom_fixpoint
from pdgsem.determinism import check_dpdg
from pdgsem.explore import check_confluence, explore_all, lemma_audit
from pdgsem.fixtures import CATALOG, F5, F6, FIG12, W
from pdgsem.fuzz import fuzz_campaign
from pdgsem.ir import cfg_run, returned_value
from pdgsem.pdg import build_pdg, iteration_statements, looping_edges, subgraph

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

CONFLUENCE_FIXTURES = [
    "P_STRAIGHT", "P_INDEP", "P_DIAMOND", "P_NESTED", "W", "SUM3",
    "F5", "F5_ALT", "F6", "P_LICM", "STUCKL",
]


def report(n: int, ok: bool, detail: str, seconds: float) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({seconds:.2f}s) {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def campaign():
    t0 = time.perf_counter()
    rep = fuzz_campaign(0, 500)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="module")
def explorations():
    t0 = time.perf_counter()
    out = {}
    for name, fx in sorted(CATALOG.items()):
        if name == "SPIN":
            continue
        pdg = build_pdg(fx.cfg)
        out[name] = (pdg, check_dpdg(pdg), explore_all(pdg, fx.store, max_states=100_000))
    return out, time.perf_counter() - t0


def test_criterion_01_f5_subgraph_table():
    t0 = time.perf_counter()
    expected = {
        (0, "G"): {1, 2, 3, 4, 5, 6, 7},
        (0, "GT"): {1, 2, 3, 7},
        (0, "GF"): {4, 5, 6, 7},
        (3, "G"): {4, 5, 6, 7},
        (3, "GT"): {4, 5, 6},
        (3, "GF"): {7},
        (6, "G"): {1, 2, 3, 7},
        (6, "GT"): {1, 2, 3},
        (6, "GF"): {7},
    }
    pdg = build_pdg(F5.cfg)
    got = {k: set(subgraph(pdg, *k)) for k in expected}
    wrong = {k: sorted(v) for k, v in got.items() if v != expected[k]}
    dt = time.perf_counter() - t0
    ok = not wrong and dt < 1
    report(1, ok, f"{9 - len(wrong)}/9 sets match; differing: {wrong}", dt)
    assert ok, wrong


def test_criterion_02_loop_facts():
    t0 = time.perf_counter()
    problems = []

    def expect(what, got, want):
        if got != want:
            problems.append(f"{what}: {got} != {want}")

    f5_loops = {lp.nodes: {(s, t) for s, t, _ in lp.back_edges} for lp in cfg_loops(F5.cfg).loops}
    expect("F5 loop {1..6}", f5_loops.get(frozenset(range(1, 7))), {(3, 4), (6, 1)})
    f6_loops = {lp.nodes: {(s, t) for s, t, _ in lp.back_edges} for lp in cfg_loops(F6.cfg).loops}
    expect("F6 loop {1..5}", f6_loops.get(frozenset(range(1, 6))), {(5, 1)})
    expect("F6 loop {2,3,4}", f6_loops.get(frozenset({2, 3, 4})), {(4, 2)})
    p5 = build_pdg(F5.cfg)
    expect("F5 CDG loops", {lp.nodes: lp.back_edges for lp in p5.cdg_loops.loops},
           {frozenset({3, 6}): {(3, 6, "T"), (6, 3, "T")}})
    expect("F5 looping edges", set(looping_edges(p5)),
           {(3, 4, "T"), (3, 5, "T"), (3, 6, "T"), (6, 1, "T"), (6, 2, "T"), (6, 3, "T")})
    pw = build_pdg(W.cfg)
    expect("W CDG loops", {lp.nodes: lp.back_edges for lp in pw.cdg_loops.loops},
           {frozenset({4}): {(4, 4, "T")}})
    expect("W looping edges", set(looping_edges(pw)), {(4, 2, "T"), (4, 3, "T"), (4, 4, "T")})
    its = iteration_statements(F5.cfg, cfg_loops(F5.cfg))
    expect("F5 iteration statements", its.get(frozenset(range(1, 7))), {3, 6})
    dt = time.perf_counter() - t0
    ok = not problems and dt < 1
    report(2, ok, "all stated loop facts hold" if not problems else "; ".join(problems), dt)
    assert ok, problems


def test_criterion_03_weak_control_dependence():
    t0 = time.perf_counter()
    ok = (4, 5, "F") in analyze(W.cfg).cd
    dt = time.perf_counter() - t0
    ok = ok and dt < 1
    report(3, ok, "(4,5,F) in CD on W", dt)
    assert ok


def test_criterion_04_condition_2_and_3(campaign):
    rep, dt = campaign
    bad = [(p.index, p.cond23) for p in rep.programs if p.cond23]
    sizes_ok = all(p.nodes <= 12 for p in rep.programs)
    ok = len(rep.programs) == 500 and not bad and sizes_ok and dt < 60
    report(4, ok, f"{len(bad)} of 500 programs with a condition 2/3 violation", dt)
    assert ok, bad[:5]


def test_criterion_05_guided_runs(campaign):
    rep, dt = campaign
    term = [p for p in rep.programs if p.cfg_verdict == "terminated"]
    failed = [p for p in term if not p.guided_ok]
    first = ", ".join(f"#{p.index} {p.guided}" for p in failed[:3])
    ok = len(term) >= 200 and not failed and dt < 120
    report(
        5, ok,
        f"{len(term) - len(failed)}/{len(term)} terminating programs replay"
        + (f"; first failures: {first}" if failed else ""),
        dt,
    )
    assert ok, first


def test_criterion_06_single_final_state(explorations):
    out, dt = explorations
    rows = []
    for name in CONFLUENCE_FIXTURES:
        pdg, rep, ex = out[name]
        conf = check_confluence(ex, rep)
        rows.append((name, rep.deterministic and ex.complete and ex.states <= 100_000 and conf.passed, conf.detail))
    bad = [r for r in rows if not r[1]]
    names = {r[0] for r in rows}
    ok = len(rows) >= 10 and {"SUM3", "P_DIAMOND", "F5_ALT"} <= names and not bad and dt < 120
    report(6, ok, f"{len(rows) - len(bad)}/{len(rows)} deterministic fixtures confluent", dt)
    assert ok, bad


def test_criterion_07_return_values(campaign, explorations):
    t0 = time.perf_counter()
    rep, _ = campaign
    fuzz_bad = [(p.index, p.mismatches) for p in rep.programs if p.mismatches]
    compared = sum(p.compared for p in rep.programs)
    out, _ = explorations
    fx_bad = []
    for name in CONFLUENCE_FIXTURES:
        fx = CATALOG[name]
        want = returned_value(fx.cfg, cfg_run(fx.cfg, fx.store))
        _, _, ex = out[name]
        compared += sum(ex.ret_values.values())
        if any(type(v) is not type(want) or v != want for v in ex.ret_values):
            fx_bad.append((name, dict(ex.ret_values), want))
    ok = not fuzz_bad and not fx_bad and compared > 0
    report(7, ok, f"{compared} compared runs, {len(fuzz_bad) + len(fx_bad)} programs with a mismatch",
           time.perf_counter() - t0)
    assert ok, (fuzz_bad[:3], fx_bad)


def test_criterion_08_lemma_audits(explorations):
    t0 = time.perf_counter()
    out, _ = explorations
    failures = {}
    pairs = diamonds = 0
    for name, (pdg, rep, ex) in out.items():
        audit = lemma_audit(pdg, ex, rep)
        pairs += audit.pairs
        diamonds += audit.diamonds
        if audit.failures:
            failures[name] = audit.failures[:3]
    ok = not failures
    report(8, ok, f"{len(out)} fixtures, {pairs} executable pairs, {diamonds} diamonds, "
           f"failures: {failures or 'none'}", time.perf_counter() - t0)
    assert ok, failures


def test_criterion_09_static_lemmas(campaign):
    rep, _ = campaign
    bad = [(p.index, p.static) for p in rep.programs if p.static]
    ok = len(rep.programs) == 500 and not bad
    report(9, ok, f"{len(bad)} of 500 programs fail the static reachability checks", 0.0)
    assert ok, bad[:5]


def test_criterion_10_fig12_negative():
    t0 = time.perf_counter()
    rep = check_dpdg(build_pdg(FIG12.cfg))
    wit = [v.witness for v in rep.by_condition(1)]
    dt = time.perf_counter() - t0
    ok = not rep.deterministic and bool(wit) and dt < 1
    report(10, ok, "condition-1 witnesses " + str([v.line() for v in rep.by_condition(1)]), dt)
    assert ok


def random_digraph(rng: random.Random, max_nodes: int):
    n = rng.randint(1, max_nodes)
    p = rng.uniform(0.1, 0.45)
    edges = sorted({(a, b) for a in range(n) for b in range(n) if rng.random() < p})
    return list(range(n)), edges


def test_criterion_11_oracle_agreement():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    pd_bad = lp_bad = 0
    for _ in range(200):
        nodes, edges = random_digraph(rng, 7)
        succ = {v: [b for a, b in edges if a == v] for v in nodes}
        pd_bad += postdom_fixpoint(nodes, succ) != oracles.postdom_by_paths(nodes, succ)
    for _ in range(200):
        nodes, edges = random_digraph(rng, 10)
        a = enumerate_loops(edges, nodes, method="exhaustive").loops
        b = enumerate_loops(edges, nodes, method="decompose").loops
        lp_bad += a != b
    dt = time.perf_counter() - t0
    ok = pd_bad == 0 and lp_bad == 0 and dt < 60
    report(11, ok, f"post-dominance {200 - pd_bad}/200, loop enumeration {200 - lp_bad}/200", dt)
    assert ok
