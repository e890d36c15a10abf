from __future__ import annotations

import json
from pathlib import Path

import pytest

from magym.cli import main
from magym.scenario import serialize_scenario
from magym.trace import read_trace

from conftest import tiny_scenario


@pytest.fixture
def tiny_path(tmp_path) -> Path:
    doc = tiny_scenario(seed_tasks=4, duration_sigma=0.3)
    path = tmp_path / "tiny.json"
    path.write_text(serialize_scenario(doc), encoding="utf-8")
    return path


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


def test_run_writes_one_trace_per_seed(tiny_path, tmp_path, capsys):
    out = tmp_path / "traces"
    code = run_cli("run", "--scenario", tiny_path, "--policy", "random",
                   "--seeds", "1..5", "--out", out)
    assert code == 0
    files = sorted(out.glob("*.jsonl"))
    assert [f.name for f in files] == [f"tiny_random_{s}.jsonl" for s in range(1, 6)]
    printed = capsys.readouterr().out.strip().splitlines()
    assert len(printed) == 5


def test_run_rejects_invalid_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"id": "x"}', encoding="utf-8")
    code = run_cli("run", "--scenario", bad, "--policy", "random", "--out", tmp_path / "o")
    assert code == 1
    assert "rejected" in capsys.readouterr().err


def test_run_twice_produces_identical_bytes(tiny_path, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_cli("run", "--scenario", tiny_path, "--policy", "greedy", "--seeds", "3", "--out", out1)
    run_cli("run", "--scenario", tiny_path, "--policy", "greedy", "--seeds", "3", "--out", out2)
    a = (out1 / "tiny_greedy_3.jsonl").read_bytes()
    b = (out2 / "tiny_greedy_3.jsonl").read_bytes()
    assert a == b


def test_run_uses_magym_seed_env(tiny_path, tmp_path, monkeypatch):
    monkeypatch.setenv("MAGYM_SEED", "7")
    out = tmp_path / "traces"
    assert run_cli("run", "--scenario", tiny_path, "--policy", "random", "--out", out) == 0
    assert (out / "tiny_random_7.jsonl").exists()


def test_evaluate_table_and_csv(tiny_path, tmp_path, capsys):
    out = tmp_path / "traces"
    run_cli("run", "--scenario", tiny_path, "--policy", "random", "--seeds", "1,2", "--out", out)
    run_cli("run", "--scenario", tiny_path, "--policy", "greedy", "--seeds", "1,2", "--out", out)
    capsys.readouterr()

    code = run_cli("evaluate", *sorted(out.glob("*.jsonl")))
    table = capsys.readouterr().out
    assert code == 0
    lines = [l for l in table.strip().splitlines() if l]
    assert len(lines) == 3  # header + one row per (scenario, policy)
    assert "tiny" in table and "greedy" in table and "random" in table

    csv_file = tmp_path / "summary.csv"
    code = run_cli("evaluate", "--format", "csv", "--out", csv_file, *sorted(out.glob("*.jsonl")))
    csv_text = capsys.readouterr().out
    assert code == 0
    header = csv_text.splitlines()[0].split(",")
    assert header[:3] == ["scenario", "policy", "seeds"]
    assert "goal_achievement_mean" in header
    assert csv_file.read_text(encoding="utf-8") == csv_text


def test_evaluate_identical_seeds_zero_std(tiny_path, tmp_path, capsys):
    out = tmp_path / "traces"
    run_cli("run", "--scenario", tiny_path, "--policy", "greedy", "--seeds", "4", "--out", out)
    trace = out / "tiny_greedy_4.jsonl"
    clone = out / "tiny_greedy_5.jsonl"
    text = trace.read_text(encoding="utf-8")
    clone.write_text(text, encoding="utf-8")
    capsys.readouterr()
    assert run_cli("evaluate", "--format", "csv", trace, clone) == 0
    row = capsys.readouterr().out.strip().splitlines()[1].split(",")
    stds = [float(v) for v in row[4::2]]
    assert all(s == 0.0 for s in stds)


def test_evaluate_footer_matches_replay_recomputation(tiny_path, tmp_path, capsys):
    out = tmp_path / "traces"
    run_cli("run", "--scenario", tiny_path, "--policy", "random", "--seeds", "1..3", "--out", out)
    capsys.readouterr()
    assert run_cli("evaluate", "--verify", *sorted(out.glob("*.jsonl"))) == 0


def test_evaluate_names_corrupt_traces_but_processes_rest(tiny_path, tmp_path, capsys):
    out = tmp_path / "traces"
    run_cli("run", "--scenario", tiny_path, "--policy", "random", "--seeds", "1", "--out", out)
    corrupt = out / "corrupt.jsonl"
    corrupt.write_text("not json\n", encoding="utf-8")
    capsys.readouterr()
    code = run_cli("evaluate", corrupt, out / "tiny_random_1.jsonl")
    captured = capsys.readouterr()
    assert code == 1
    assert "corrupt.jsonl" in captured.err
    assert "tiny" in captured.out  # the healthy trace still aggregated


def test_inspect_first_n_rows(tiny_path, tmp_path, capsys):
    out = tmp_path / "traces"
    run_cli("run", "--scenario", tiny_path, "--policy", "random", "--seeds", "2", "--out", out)
    capsys.readouterr()
    assert run_cli("inspect", out / "tiny_random_2.jsonl", "--first", "30") == 0
    lines = capsys.readouterr().out.splitlines()
    numbered = [l for l in lines if l and not l.startswith("#")]
    assert len(numbered) == 30
    assert numbered[0].lstrip().startswith("1 ")


def test_inspect_filter_by_type(tiny_path, tmp_path, capsys):
    out = tmp_path / "traces"
    run_cli("run", "--scenario", tiny_path, "--policy", "greedy", "--seeds", "1", "--out", out)
    capsys.readouterr()
    assert run_cli("inspect", out / "tiny_greedy_1.jsonl", "--type", "assign_task") == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l and not l.startswith("#")]
    assert lines and all("assign_task" in l for l in lines)


def test_inspect_corrupt_trace_fails(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{}\n", encoding="utf-8")
    assert run_cli("inspect", bad) == 1
    assert "bad.jsonl" in capsys.readouterr().err


def test_validate_accepts_bundled_and_rejects_broken(tmp_path, capsys):
    assert run_cli("validate", "legal_contract_negotiation") == 0
    assert "ok:" in capsys.readouterr().out

    broken = tmp_path / "broken.json"
    doc = json.loads(serialize_scenario(tiny_scenario(seed_tasks=2)))
    doc["preference_schedule"][0]["weights"] = {"quality": 0.4}
    broken.write_text(json.dumps(doc), encoding="utf-8")
    assert run_cli("validate", broken) == 1
    assert "error" in capsys.readouterr().out


def test_trace_footer_metrics_parse_back(tiny_path, tmp_path):
    out = tmp_path / "traces"
    run_cli("run", "--scenario", tiny_path, "--policy", "assign_all", "--seeds", "1", "--out", out)
    trace = read_trace(out / "tiny_assign_all_1.jsonl")
    metrics = trace.footer["metrics"]
    assert set(metrics) >= {
        "preference_alignment",
        "constraint_adherence",
        "goal_achievement",
        "stakeholder_management",
        "completion_time_hours",
        "hard_violation",
    }


def test_parallel_jobs_produce_same_traces(tiny_path, tmp_path):
    seq, par = tmp_path / "seq", tmp_path / "par"
    run_cli("run", "--scenario", tiny_path, "--policy", "random", "--seeds", "1..4", "--out", seq)
    run_cli("run", "--scenario", tiny_path, "--policy", "random", "--seeds", "1..4",
            "--out", par, "--jobs", "4")
    for seed in range(1, 5):
        name = f"tiny_random_{seed}.jsonl"
        assert (seq / name).read_bytes() == (par / name).read_bytes()
