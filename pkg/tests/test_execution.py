import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import prog
from pdgsem.execution import (
    ACT,
    CHK,
    UNCHK,
    EdgeKey,
    NotExecutable,
    apply_udav,
    apply_udec,
    guided_run,
    init_state,
    machine,
    next_nodes,
    pdg_run,
    pdg_step,
)
from pdgsem.fixtures import CATALOG, F5, P_INDEP, P_STRAIGHT, SPIN, SUM3, W
from pdgsem.generate import random_cfg, random_store
from pdgsem.ir import ENTRY, cfg_run, returned_value
from pdgsem.pdg import Pdg, build_pdg


def run_to(pdg, store, order):
    s = init_state(pdg, store)
    for n in order:
        s = pdg_step(pdg, s, n)
    return s


def status(pdg, s, kind, src, dst, tag):
    return machine(pdg).ec_get(s.ec, EdgeKey(kind, src, dst, tag))


def test_initial_state(two_node):
    pdg = build_pdg(two_node)
    s = init_state(pdg, {"x": 0})
    assert status(pdg, s, "C", ENTRY, 1, "T") is ACT
    assert status(pdg, s, "C", ENTRY, 2, "T") is ACT
    assert status(pdg, s, "F", 1, 2, "x") is UNCHK
    m = machine(pdg)
    assert all(v == 0 for v in m.avail_dict(s.av).values())


def test_f5_initial_act_edges_are_entry_edges():
    pdg = build_pdg(F5.cfg)
    s = init_state(pdg, F5.store)
    act = [k for k, v in machine(pdg).econf_dict(s.ec).items() if v is ACT]
    assert sorted(act) == sorted(k for k in pdg.edge_keys if k.kind == "C" and k.src == ENTRY)


def test_next_examples():
    pdg = build_pdg(P_INDEP.cfg)
    assert next_nodes(pdg, init_state(pdg, P_INDEP.store)) == [1, 2]
    pdg = build_pdg(P_STRAIGHT.cfg)
    assert next_nodes(pdg, init_state(pdg, P_STRAIGHT.store)) == [1]


LOOP_XY = """
node 1: y := 0
node 2: x := y
node 3: y := x + 1
node 4: if y < 5
node 5: ret y
edge 1 -> 2
edge 2 -> 3
edge 3 -> 4
edge 4 -T-> 2
edge 4 -F-> 5
"""


def test_loop_carried_edge_waits_for_its_consumer():
    pdg = build_pdg(prog(LOOP_XY))
    assert (3, 2, "y") in pdg.L
    s = run_to(pdg, {"x": 0, "y": 0}, [1])
    assert "condL" in machine(pdg).why_not(s, 3)
    s = pdg_step(pdg, s, 2)
    assert status(pdg, s, "L", 3, 2, "y") is CHK
    assert 3 in next_nodes(pdg, s)


def test_udav_reads_before_writing():
    pdg = build_pdg(W.cfg)
    m = machine(pdg)
    s = run_to(pdg, {"i": 1, "s": 0}, [1, 2])
    av = apply_udav(pdg, 3, s.av)
    assert m.av_get(av, 3, "i") == 2  # l(3,3,i)
    assert m.av_get(av, 4, "i") == 2  # f(3,4,i)
    assert apply_udav(pdg, 4, av) == av


def test_udav_writes_every_consumer():
    pdg = build_pdg(prog("node 1: x := 5; node 2: y := x; node 3: z := x + y; node 4: ret z;"
                         "edge 1 -> 2; edge 2 -> 3; edge 3 -> 4"))
    m = machine(pdg)
    s = init_state(pdg, {"x": 0, "y": 0, "z": 0})
    av = apply_udav(pdg, 1, s.av)
    assert m.av_get(av, 2, "x") == m.av_get(av, 3, "x") == 5
    changed = [k for k, v in m.avail_dict(av).items() if v != m.avail_dict(s.av)[k]]
    assert sorted(changed) == [(2, "x"), (3, "x")]


def test_w_true_branch_reactivates_the_body():
    pdg = build_pdg(W.cfg)
    s = run_to(pdg, {"i": 0, "s": 0}, [1, 2, 3])
    ec = apply_udec(pdg, 4, s)
    m = machine(pdg)
    for d in (2, 3, 4):
        assert m.ec_get(ec, EdgeKey("C", 4, d, "T")) is ACT
    assert m.ec_get(ec, EdgeKey("C", 4, 5, "F")) is UNCHK


def test_assign_marks_outgoing_and_clears_incoming():
    pdg = build_pdg(P_STRAIGHT.cfg)
    s = pdg_step(pdg, init_state(pdg, P_STRAIGHT.store), 1)
    assert status(pdg, s, "F", 1, 2, "x") is CHK
    assert status(pdg, s, "C", ENTRY, 1, "T") is UNCHK


def test_consumer_releases_loop_carried_producer():
    pdg = build_pdg(W.cfg)
    s = run_to(pdg, {"i": 0, "s": 0}, [1])
    assert status(pdg, s, "L", 3, 2, "i") is UNCHK
    s = pdg_step(pdg, s, 2)
    assert status(pdg, s, "L", 3, 2, "i") is CHK


def test_step_examples(two_node):
    pdg = build_pdg(two_node)
    s0 = init_state(pdg, {"x": 0})
    assert pdg_step(pdg, s0, 1) == pdg_step(pdg, s0, 1)
    s1 = pdg_step(pdg, s0, 1)
    assert machine(pdg).av_get(s1.av, 2, "x") == 1
    with pytest.raises(NotExecutable):
        pdg_step(pdg, s0, 2)
    with pytest.raises(NotExecutable):
        pdg_step(pdg, s0, ENTRY)


def test_runs_of_independent_assignments():
    pdg = build_pdg(P_INDEP.cfg)
    assert pdg_run(pdg, P_INDEP.store).ret_value == 3
    for seed in range(10):
        run = pdg_run(pdg, P_INDEP.store, "random", seed)
        assert run.verdict == "quiescent" and run.ret_value == 3


def test_sum3_run():
    run = pdg_run(build_pdg(SUM3.cfg), SUM3.store)
    assert run.ret_value == 6
    assert run.ret_value == returned_value(SUM3.cfg, cfg_run(SUM3.cfg, SUM3.store))


def test_spin_exceeds_bound():
    assert pdg_run(build_pdg(SPIN.cfg), SPIN.store, bound=200).verdict == "bound-exceeded"


def test_unknown_strategy():
    with pytest.raises(ValueError):
        pdg_run(build_pdg(W.cfg), W.store, strategy="max-id")


# -- guided runs ----------------------------------------------------------------

REPLAYING = ["P_STRAIGHT", "P_INDEP", "P_DIAMOND", "P_NESTED", "W", "SUM3", "F5", "F5_ALT", "F6", "P_LICM", "STUCKL"]


@pytest.mark.parametrize("name", REPLAYING)
def test_guided_run_replays_fixture(name):
    fx = CATALOG[name]
    t = cfg_run(fx.cfg, fx.store)
    g = guided_run(build_pdg(fx.cfg), fx.store, t.order, t.stores)
    assert g.ok, g.describe()
    assert g.steps == len(t.order)
    assert g.ret_value == returned_value(fx.cfg, t)


def test_guided_run_detects_a_missing_flow_edge():
    cfg = P_STRAIGHT.cfg
    pdg = build_pdg(cfg)
    cut = Pdg.build(pdg.stmts, pdg.C, pdg.F - {(1, 2, "x")}, pdg.L, pdg.D)
    t = cfg_run(cfg, P_STRAIGHT.store)
    g = guided_run(cut, P_STRAIGHT.store, t.order, t.stores)
    assert not g.ok
    assert (g.index, g.node) == (1, 2)
    assert "disagree" in g.reason


def test_guided_run_on_early_exit_loop_deadlocks():
    # G_F(4) reaches back into the loop, so the false branch of 4 resets
    # the loop-carried edges into 2 and 3 before 5 has run
    fx = CATALOG["P_BREAK"]
    pdg = build_pdg(fx.cfg)
    t = cfg_run(fx.cfg, fx.store)
    g = guided_run(pdg, fx.store, t.order, t.stores)
    assert not g.ok
    assert (g.index, g.node) == (4, 5)
    assert "condL" in g.reason
    assert pdg_run(pdg, fx.store).verdict == "stuck"


# -- properties -----------------------------------------------------------------


@given(st.integers(0, 10**6), st.integers(0, 50))
def test_only_control_edges_become_active(seed, rseed):
    cfg = random_cfg(seed)
    pdg = build_pdg(cfg)
    store = random_store(cfg, random.Random(seed))
    run = pdg_run(pdg, store, "random", rseed, bound=300)
    m = machine(pdg)
    for s in [st for st, _ in run.steps] + [run.final]:
        for k, v in m.econf_dict(s.ec).items():
            assert v is not ACT or k.kind == "C"


@given(st.integers(0, 10**6), st.integers(0, 50))
def test_random_runs_agree_with_the_cfg_when_they_finish(seed, rseed):
    cfg = random_cfg(seed)
    pdg = build_pdg(cfg)
    store = random_store(cfg, random.Random(seed))
    t = cfg_run(cfg, store, 2000)
    run = pdg_run(pdg, store, "random", rseed, bound=8000)
    if t.terminated and run.verdict == "quiescent":
        assert run.ret_value == returned_value(cfg, t)
