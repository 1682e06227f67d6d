import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdgsem.determinism import check_dpdg, condition2
from pdgsem.fixtures import CATALOG, F5, FIG12, P_STRAIGHT, SUM3
from pdgsem.fuzz import fuzz_campaign
from pdgsem.generate import GenParams, random_cfg
from pdgsem.ir import ENTRY
from pdgsem.pdg import Pdg, build_pdg


def cdg(pdg):
    g = nx.MultiDiGraph()
    g.add_nodes_from(pdg.nodes)
    for s, t, q in pdg.C:
        g.add_edge(s, t, label=q)
    return g


def starred(pdg, r, label):
    """G_label*(r) by plain graph reachability over every C edge."""
    g = cdg(pdg)
    seeds = {t for _, t, d in g.out_edges(r, data=True) if d["label"] == label}
    out = set(seeds)
    for s in seeds:
        out |= nx.descendants(g, s)
    return out


def test_fig12_violates_condition_1():
    rep = check_dpdg(build_pdg(FIG12.cfg))
    assert not rep.deterministic
    assert [v.witness for v in rep.by_condition(1)] == [(0, 3, 1, ENTRY)]
    assert rep.by_condition(2) == [] and rep.by_condition(3) == []
    assert rep.lines()[0].startswith("VIOLATION cond=1 witness=0,3,1,entry")


def test_straight_line_is_deterministic():
    rep = check_dpdg(build_pdg(P_STRAIGHT.cfg))
    assert rep.deterministic and rep.lines() == ["DETERMINISTIC"]


@pytest.mark.parametrize("name", sorted(set(CATALOG) - {"FIG12"}))
def test_other_fixtures_are_deterministic(name):
    assert check_dpdg(build_pdg(CATALOG[name].cfg)).deterministic


@pytest.mark.parametrize("fx", [SUM3, F5], ids=lambda f: f.name)
def test_dropping_def_order_edges_breaks_condition_2(fx):
    pdg = build_pdg(fx.cfg)
    assert pdg.D
    cut = Pdg.build(pdg.stmts, pdg.C, pdg.F, pdg.L, set())
    bad = condition2(cut)
    assert bad
    for v in bad:
        p, q, u, r = v.witness
        assert {(p, q), (q, p)} & pdg.D


def test_fig12_witness_by_reachability():
    pdg = build_pdg(FIG12.cfg)
    p, q, n, r = check_dpdg(pdg).violations[0].witness
    preds = {s for s, t, _ in pdg.C if t == n}
    assert {p, q} <= preds
    assert any({p, q} <= starred(pdg, r, lab) for lab in "TF")


def test_campaign_reports_condition_1_only():
    rep = fuzz_campaign(0, 150, dynamic=False)
    assert rep.totals["cond1_violators"] > 0
    assert rep.totals["cond23_violations"] == 0


@given(st.integers(0, 10**6))
def test_violation_witnesses_recheck(seed):
    pdg = build_pdg(random_cfg(seed, GenParams(loop_bias=0.5, retargets=3)))
    g = cdg(pdg)
    for v in check_dpdg(pdg).violations:
        if v.cond == 1:
            p, q, n, r = v.witness
            assert g.has_edge(p, n) and g.has_edge(q, n)
            assert any({p, q} <= starred(pdg, r, lab) for lab in "TF")
        elif v.cond == 2:
            p, q, u, r = v.witness
            assert {(p, u), (q, u)} <= {(s, t) for s, t, _ in pdg.F}
            assert (p, q) not in pdg.D and (q, p) not in pdg.D
            assert any({p, q} <= starred(pdg, r, lab) for lab in "TF")
        else:
            p, q, r = v.witness
            assert q not in starred(pdg, r, "T") | starred(pdg, r, "F")


def test_condition_2_counterexample_seed_2569():
    # both definitions of v2 leave the loop through different exits; C
    # closure puts them in one branch and nothing orders them
    rep = check_dpdg(build_pdg(random_cfg(2569)))
    assert [v.witness for v in rep.by_condition(2)] == [(3, 4, 6, 1)]
