import json
import subprocess
import sys
from pathlib import Path

import pytest

from pdgsem.cli import main
from pdgsem.fixtures import CATALOG
from pdgsem.ir import print_cfg


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, fx in CATALOG.items():
        p = tmp_path / f"{name.lower()}.ir"
        p.write_text(print_cfg(fx.cfg))
        out[name] = (str(p), fx.init)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check(files, capsys, tmp_path):
    assert run(capsys, "check", files["W"][0]) == (0, "OK\n")
    bad = tmp_path / "bad.ir"
    bad.write_text("node 1: x := 1\nnode 2: ret x\nnode 3: ret x\nedge 1 -> 2\nedge 2 -> 3\n")
    code, out = run(capsys, "check", str(bad))
    assert code == 1 and "ret-node 2 has a successor" in out


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.ir"
    bad.write_text("node 1: x := \n")
    assert main(["check", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["deps", "/nonexistent.ir"]) == 2


def test_bad_store(files, capsys):
    path, _ = files["W"]
    assert main(["run-cfg", path, "--init", "i=0"]) == 2
    assert main(["run-cfg", path, "--init", "i=zero,s=0"]) == 2
    assert main(["run-cfg", path]) == 2


def test_deps(files, capsys):
    code, out = run(capsys, "deps", files["W"][0])
    assert code == 0 and "CD 4 5 F" in out.splitlines()
    code, out = run(capsys, "deps", files["W"][0], "--json")
    assert ["4", "5", "F"] in json.loads(out)["CD"]


def test_pdg_queries(files, capsys, tmp_path):
    path = files["F5"][0]
    code, out = run(capsys, "pdg", path, "--subgraph", "0", "--mode", "GF")
    assert (code, out) == (0, "{4, 5, 6, 7}\n")
    code, out = run(capsys, "pdg", path, "--mca", "2", "5")
    assert code == 0
    code, out = run(capsys, "pdg", files["P_STRAIGHT"][0], "--mca", "1", "2", "--json")
    assert json.loads(out)["mca"] == ["entry"]
    dot = tmp_path / "f5.dot"
    assert main(["pdg", path, "--dot", str(dot)]) == 0
    assert dot.read_text().startswith('digraph "G" {')
    assert main(["pdg", path, "--subgraph", "99"]) == 2


def test_runs(files, capsys):
    path, init = files["SUM3"]
    code, out = run(capsys, "run-cfg", path, "--init", init)
    assert code == 0 and "returned: 6" in out
    code, out = run(capsys, "run-pdg", path, "--init", init, "--trace", "--audit")
    assert code == 0 and out.startswith("step 0: exec ") and "returned: 6" in out
    code, out = run(capsys, "run-pdg", path, "--init", init, "--strategy", "random", "--seed", "4", "--json")
    assert json.loads(out)["returned"] == 6


def test_limits(files, capsys):
    path, init = files["SPIN"]
    assert main(["run-cfg", path, "--init", init, "--bound", "30"]) == 3
    assert main(["run-pdg", path, "--init", init, "--bound", "30"]) == 3
    assert main(["explore", path, "--init", init, "--max-depth", "30"]) == 3
    assert main(["equiv", path, "--init", init, "--bound", "30"]) == 3


def test_explore_and_equiv(files, capsys):
    path, init = files["F5"]
    code, out = run(capsys, "explore", path, "--init", init, "--json")
    data = json.loads(out)
    assert code == 0 and data["final_states"] == 1 and data["confluence"]["passed"]
    code, out = run(capsys, "equiv", path, "--init", init)
    assert code == 0 and out.startswith("status: pass")
    path, init = files["P_BREAK"]
    code, out = run(capsys, "equiv", path, "--init", init)
    assert code == 1 and "failed at step 4 (node 5)" in out


def test_dpdg(files, capsys):
    code, out = run(capsys, "dpdg", files["FIG12"][0])
    assert code == 1 and out.startswith("VIOLATION cond=1 witness=0,3,1,entry")
    code, out = run(capsys, "dpdg", files["SUM3"][0], "--json")
    assert code == 0 and json.loads(out) == {"verdict": "deterministic", "violations": []}


def test_fuzz(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out = run(capsys, "fuzz", "--seed", "0", "--count", "20", "--static-only", "--out", str(report))
    assert code == 0 and "programs: 20" in out
    assert json.loads(report.read_text())["count"] == 20


def test_console_script_runs_as_module(files):
    proc = subprocess.run(
        [sys.executable, "-m", "pdgsem.cli", "check", files["W"][0]],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "OK\n"


def test_exported_programs_match_fixtures():
    root = Path(__file__).resolve().parent.parent / "programs"
    for name, fx in CATALOG.items():
        assert (root / f"{name.lower()}.ir").read_text() == print_cfg(fx.cfg)
