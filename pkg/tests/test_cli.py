from __future__ import annotations

import filecmp

import numpy as np
import pytest

from betrun.cli import main
from betrun.solvers import TspInstance
from betrun.solvers.tsp import format_tsplib
from betrun.trace import read_dataset


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def dataset(tmp_path, capsys):
    d = tmp_path / "syn"
    code, _, _ = run_cli(capsys, "gen-traces", "--source", "synthetic", "--out", d, "--n", 100, "--budget-ms", 20_000, "--seed", 1)
    assert code == 0
    return d


def test_gen_traces_synthetic(dataset):
    ds = read_dataset(dataset)
    assert len(ds.traces) == 100
    assert all(tr.end_time == 20_000 for tr in ds.traces)


def test_run_replay_is_deterministic(dataset, capsys):
    args = ("run", "--mode", "replay", "--dataset", dataset, "--preset", "f17", "--budget-ms", 20_000, "--seed", 7)
    code, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert code == 0 and out1 == out2
    fields = out1.strip().split(",")
    assert fields[1:7] == ["current-best", "20000", "8000", "40", "1", "0"]


def test_single_preset_equals_explicit_plan(dataset, capsys):
    _, a, _ = run_cli(capsys, "run", "--dataset", dataset, "--preset", "single", "--budget-ms", 5000, "--seed", 3)
    _, b, _ = run_cli(capsys, "run", "--dataset", dataset, "--k", 1, "--t1-ms", 0, "--budget-ms", 5000, "--seed", 3)
    assert a == b


def test_unknown_decider_exits_2(dataset, capsys):
    code, _, err = run_cli(capsys, "run", "--dataset", dataset, "--preset", "f17", "--budget-ms", 1000, "--decider", "oracle")
    assert code == 2 and "unknown decider" in err


def test_usage_errors_exit_2(tmp_path, capsys):
    code, _, err = run_cli(capsys, "run", "--dataset", tmp_path / "missing", "--preset", "single", "--budget-ms", 10)
    assert code == 2 and err
    code, _, _ = run_cli(capsys, "run", "--budget-ms", 10)  # neither preset nor k/t1
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--budget-ms", "notanumber"])
    assert exc.value.code == 2


def test_gen_traces_unwritable_path_exits_1(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run_cli(capsys, "gen-traces", "--source", "synthetic", "--out", blocker / "sub", "--n", 2, "--budget-ms", 100)
    assert code == 1 and err


def test_gen_traces_tsp_is_reproducible(tmp_path, capsys):
    inst = TspInstance("cities", np.random.default_rng(0).integers(0, 500, size=(12, 2)))
    path = tmp_path / "cities.tsp"
    path.write_text(format_tsplib(inst))
    for out in ("a", "b"):
        code, _, _ = run_cli(capsys, "gen-traces", "--source", "tsp", "--instance", path, "--out", tmp_path / out,
                             "--n", 3, "--budget-ms", 2000, "--seed", 4)
        assert code == 0
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    assert not cmp.diff_files and len(cmp.same_files) == 4


def test_gen_traces_mvc_triangle(tmp_path, capsys):
    path = tmp_path / "tri.edges"
    path.write_text("1 2\n2 3\n1 3\n")
    code, _, _ = run_cli(capsys, "gen-traces", "--source", "mvc", "--instance", path, "--out", tmp_path / "t", "--n", 5, "--budget-ms", 50)
    assert code == 0
    assert all(tr.qualities[-1] == 2 for tr in read_dataset(tmp_path / "t").traces)


def test_run_live_mode(tmp_path, capsys):
    path = tmp_path / "g.edges"
    path.write_text("1 2\n2 3\n3 4\n4 1\n1 3\n")
    code, out, _ = run_cli(capsys, "run", "--mode", "live", "--instance", path, "--k", 4, "--t1-ms", 40,
                           "--budget-ms", 400, "--tau", "zero", "--seed", 2)
    assert code == 0
    assert out.strip().split(",")[-2] == "2"


def test_beatability_and_compare(dataset, capsys):
    code, out, _ = run_cli(capsys, "beatability", "--dataset", dataset, "--budget-ms", 20_000, "--t1-ms", 8000, "--k", 40, "--samples", 500)
    assert code == 0 and out.startswith("instance,probability")
    code, out, _ = run_cli(capsys, "compare-f17", "--dataset", dataset, "--budget-ms", 20_000, "--decider", "current-best",
                           "--samples", 20, "--jobs", 1)
    assert code == 0 and ",identical," in out


def test_campaign_end_to_end(dataset, tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text(
        f"[campaign]\ndatasets = {dataset.name}\nseed = 3\nsamples = 10\noutput = rep\n\n"
        "[grid]\ntotal_budget_ms = 20000\ninit_fraction = 0.4\nk = 40\ndeciders = current-best, random\n"
    )
    code, out, _ = run_cli(capsys, "campaign", cfg, "--jobs", 1)
    assert code == 0 and "self-test: pass" in out
    rows = (tmp_path / "rep" / "results.csv").read_text().splitlines()
    assert len(rows) == 2 + 20
    verdicts = (tmp_path / "rep" / "verdicts.csv").read_text()
    assert "current-best/k40/m1/even/t1=0.4T,20000,f17,identical" in verdicts
    code, _, _ = run_cli(capsys, "campaign", cfg, "--jobs", 2, "--output", tmp_path / "rep2")
    assert code == 0
    cmp = filecmp.dircmp(tmp_path / "rep", tmp_path / "rep2")
    assert not cmp.diff_files and len(cmp.same_files) == 5


def test_help_documents_every_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for cmd in ("run", "campaign", "gen-traces", "beatability", "compare-f17"):
        assert cmd in out
