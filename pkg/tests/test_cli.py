import csv
import json

from src.localcast.services.trace_service import file_digest, read_trace_jsonl
from src.scripts.cli import cli, main


def test_gen_then_run(runner, tmp_path):
    scenario = tmp_path / "s.json"
    trace = tmp_path / "trace.jsonl"
    result = runner.invoke(cli, ["gen", "--kind", "uniform_square", "--n", "16", "--seed", "1", "--out", str(scenario)])
    assert result.exit_code == 0, result.output
    assert len(json.loads(scenario.read_text())["nodes"]) == 16

    result = runner.invoke(
        cli, ["run", "--scenario", str(scenario), "--variant", "alg1", "--seed", "7", "--out", str(trace)]
    )
    assert result.exit_code == 0, result.output
    assert read_trace_jsonl(trace)


def test_run_is_reproducible(tmp_path):
    scenario = tmp_path / "s.json"
    assert main(["gen", "--n", "12", "--seed", "2", "--out", str(scenario)]) == 0
    digests = []
    for name in ("a.jsonl", "b.jsonl"):
        out = tmp_path / name
        assert main(["run", "--scenario", str(scenario), "--variant", "alg2", "--seed", "3", "--out", str(out)]) == 0
        digests.append(file_digest(out))
    assert digests[0] == digests[1]


def test_gen_to_stdout_notices_missing_seed(runner):
    result = runner.invoke(cli, ["gen", "--kind", "line", "--n", "3"])
    assert result.exit_code == 0
    assert "no --seed given" in result.output
    assert '"nodes"' in result.output


def test_unknown_flag_is_usage_error():
    assert main(["gen", "--bogus"]) == 2
    assert main(["nonsense"]) == 2


def test_bad_scenario_is_config_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_bound": 1, "nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 0, "x": 1, "y": 0}]}')
    assert main(["run", "--scenario", str(bad), "--seed", "0", "--out", str(tmp_path / "t.jsonl")]) == 2
    assert main(["run", "--scenario", str(tmp_path / "missing.json"), "--seed", "0"]) == 2


def test_infeasible_generator_is_config_error(tmp_path):
    assert main(["gen", "--n", "64", "--density", "1e14", "--seed", "0", "--out", str(tmp_path / "s.json")]) == 2


def test_lowerbound_writes_csv(tmp_path):
    out = tmp_path / "lb.csv"
    instance = tmp_path / "instance.json"
    code = main(
        [
            "lowerbound", "--n", "256", "--policy", "fixed:auto", "--tmax", "128",
            "--seed", "0", "--out", str(out), "--instance-out", str(instance),
        ]
    )
    assert code == 0
    with open(out, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 128
    assert all(row["holds"] == "true" for row in rows)
    data = json.loads(instance.read_text())
    assert "protocol" in data["model"]
    assert data["n_bound"] >= len(data["nodes"])


def test_lowerbound_rejects_non_power_of_two(tmp_path):
    assert main(["lowerbound", "--n", "100", "--seed", "0", "--out", str(tmp_path / "lb.csv")]) == 2


def test_sweep_then_fit(tmp_path):
    summary = tmp_path / "summary.csv"
    code = main(
        [
            "sweep", "--kind", "clustered", "--variant", "alg2", "--n", "16",
            "--cluster-size", "2", "--cluster-size", "4", "--cluster-size", "8", "--cluster-size", "16",
            "--trials", "3", "--seed", "1", "--out", str(summary),
        ]
    )
    assert code == 0
    report = tmp_path / "fit.json"
    assert main(["fit", "--summary", str(summary), "--form", "N_plus_log2", "--out", str(report)]) == 0
    data = json.loads(report.read_text())
    assert set(data) == {"form", "a", "b", "residual", "cells"}
    assert {cell["N_x"] for cell in data["cells"]} == {2, 4, 8, 16}


def test_fit_too_few_rows_is_config_error(tmp_path):
    summary = tmp_path / "summary.csv"
    summary.write_text("node_id,n,N_x,wake,halt\n0,16,2,0,10\n")
    assert main(["fit", "--summary", str(summary), "--out", str(tmp_path / "fit.json")]) == 2


def test_verify_calculus_and_chain(tmp_path):
    out = tmp_path / "verify.jsonl"
    code = main(["verify", "--suite", "calculus", "--suite", "chain", "--mc-trials", "0", "--seed", "0", "--out", str(out)])
    assert code == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["suite"] for r in records] == ["calculus", "chain"]
    assert all(r["passed"] for r in records)
    assert all(isinstance(r["passed"], bool) and isinstance(r["violations"], int) for r in records)


def test_verify_slot_scans_small(runner):
    result = runner.invoke(
        cli, ["verify", "--suite", "lemma-a1", "--suite", "disjoint", "--n", "16", "--trials", "2", "--seed", "0"]
    )
    assert result.exit_code == 0, result.output
    assert "lemma-a1: ok" in result.output
    assert "disjoint: ok" in result.output


def test_verify_unknown_suite():
    assert main(["verify", "--suite", "nope"]) == 2
