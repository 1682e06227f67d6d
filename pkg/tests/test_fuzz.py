import random

import pytest

from pdgsem.determinism import check_dpdg
from pdgsem.explore import explore_all, lemma_audit
from pdgsem.fuzz import fuzz_campaign, program_seed, static_checks
from pdgsem.generate import GenParams, random_cfg, random_store
from pdgsem.pdg import build_pdg


def test_campaign_is_reproducible():
    p = GenParams(max_nodes=9)
    a = fuzz_campaign(3, 25, p)
    b = fuzz_campaign(3, 25, p)
    assert a.to_json() == b.to_json()


def test_program_seeds_do_not_collide():
    seeds = {program_seed(s, i) for s in range(5) for i in range(1000)}
    assert len(seeds) == 5000


def test_count_must_be_positive():
    with pytest.raises(ValueError):
        fuzz_campaign(0, 0)


def test_seed_zero_hundred_has_no_condition_2_or_3_hits():
    rep = fuzz_campaign(0, 100, dynamic=False)
    assert rep.totals["cond23_violations"] == 0
    assert rep.totals["static_lemma_failures"] == 0


def test_report_fields():
    rep = fuzz_campaign(1, 5)
    d = rep.to_dict()
    assert d["count"] == 5 and len(d["programs"]) == 5
    assert set(d["totals"]) >= {"cond23_violations", "guided_failed", "stuck_programs"}
    assert rep.summary_lines()[0] == "programs: 5"


def test_static_checks_clean_on_loops():
    for seed in range(200):
        assert static_checks(random_cfg(seed, GenParams(loop_bias=0.6))) == []


def test_f_and_l_writers_race_on_seed_115():
    # a dPDG whose exploration has two final states: an F writer and an L
    # writer of the same avail cell are executable together
    cfg = random_cfg(115)
    pdg = build_pdg(cfg)
    rep = check_dpdg(pdg)
    assert rep.deterministic
    assert (1, 5, "v0") in pdg.F and (4, 5, "v0") in pdg.L
    ex = explore_all(pdg, random_store(cfg, random.Random(115)))
    assert len(ex.finals) > 1
    audit = lemma_audit(pdg, ex, rep)
    assert any(f.startswith("diamond: 1,4") for f in audit.failures)
