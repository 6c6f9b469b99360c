import json

import polars as pl
import pytest

from src.app import main
from src.data.instances import cost_to_dict, graph_to_dict, write_instance
from src.optimization.cost import CostFunction, LocalTerm, build_cost
from src.optimization.statevec import load_amplitudes


@pytest.fixture
def k4_file(tmp_path, k4_instance):
    path = tmp_path / "k4.json"
    write_instance(graph_to_dict(k4_instance), path)
    return path


@pytest.fixture
def constant_file(tmp_path):
    path = tmp_path / "constant.json"
    write_instance(cost_to_dict(build_cost(3, 2.5, [])), path)
    return path


def test_generate_is_byte_identical(tmp_path):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    for path in (first, second):
        arguments = ["generate", "graph", "--v", "8", "--p", "0.5", "--seed", "3"]
        assert main(arguments + ["--out", str(path)]) == 0

    assert first.read_bytes() == second.read_bytes()
    record = json.loads(first.read_text())
    assert record["kind"] == "graph"
    assert record["seed"] == 3


def test_generate_cost_to_stdout(capsys):
    assert main(["generate", "cost", "--n", "5", "--m", "2", "--seed", "1"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["kind"] == "cost"
    assert record["n"] == 5
    assert record["c_min"] < record["c_max"]


def test_verify_passes_on_k4(k4_file, capsys):
    assert main(["verify", str(k4_file), "--b", "2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"]
    assert report["failed"] == []
    assert max(report["residuals"].values()) < 1e-10
    assert "generated_at" in report


def test_verify_detects_a_corrupted_phase_table(k4_file, capsys):
    assert main(["verify", str(k4_file), "--b", "2", "--corrupt"]) == 1
    report = json.loads(capsys.readouterr().out)
    assert not report["passed"]
    assert "product_decomposition" in report["failed"]


def test_verify_rejects_zero_control_qubits(k4_file):
    with pytest.raises(SystemExit) as excinfo:
        main(["verify", str(k4_file), "--b", "0"])
    assert excinfo.value.code == 2


def test_sample_with_a_single_trial(k4_file, tmp_path):
    out, summary_path = tmp_path / "runs.jsonl", tmp_path / "summary.json"
    arguments = ["sample", str(k4_file), "--b", "2", "--trials", "1"]
    assert main(arguments + ["--out", str(out), "--summary", str(summary_path)]) == 0

    lines = out.read_text().splitlines()
    assert len(lines) == 1
    run = json.loads(lines[0])
    assert list(run) == ["b", "mode", "trial", "seed", "repetitions", "result", "cost"]
    assert (run["b"], run["mode"], run["trial"], run["seed"]) == (2, "closed_form", 0, 0)
    assert run["repetitions"] >= 1
    assert len(run["result"]) == 4
    assert isinstance(run["cost"], float)

    summary = json.loads(summary_path.read_text())
    assert summary["trials"] == 1
    assert summary["mode"] == "closed_form"
    assert summary["config"]["trials"] == 1


def test_sweep_writes_csv_and_metadata(k4_file, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", str(k4_file), "--b-list", "1,2,4", "--out", str(out)]) == 0

    df = pl.read_csv(out)
    assert df["b"].to_list() == [1.0, 2.0, 4.0]
    assert df["checks"].to_list() == ["ok"] * 3

    meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
    assert meta["c_zero"] == pytest.approx(0.0)
    assert not meta["degenerate"]
    assert meta["monotonicity_violations"] == []
    assert meta["max_consistency_residual"] < 1e-10


def test_sweep_flags_a_constant_cost(constant_file, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", str(constant_file), "--out", str(out)]) == 0

    meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
    assert meta["degenerate"]
    # degenerate rows have an empty accuracy cell
    assert pl.read_csv(out)["accuracy"].null_count() == 6


def test_compare_is_reproducible_across_thread_counts(k4_file, tmp_path):
    outputs = []
    for threads in ("1", "3"):
        out = tmp_path / f"compare_{threads}.json"
        arguments = ["compare", str(k4_file), "--b", "4", "--trials", "6", "--sa-steps", "50"]
        arguments += ["--seed", "5", "--threads", threads, "--no-timestamp", "--out", str(out)]
        assert main(arguments) == 0
        outputs.append(out.read_bytes())

    assert outputs[0] == outputs[1]
    record = json.loads(outputs[0])
    assert "generated_at" not in record
    assert record["comparison"]["simulated_annealing"]["evaluations_per_run"] == 51


def test_compare_writes_the_load_table(k4_file, tmp_path):
    table = tmp_path / "loads.csv"
    arguments = ["compare", str(k4_file), "--b", "2", "--trials", "3", "--sa-steps", "20"]
    arguments += ["--out", str(tmp_path / "compare.json"), "--csv", str(table)]
    assert main(arguments) == 0

    df = pl.read_csv(table)
    assert df["load_unit"].to_list() == [
        "circuit_executions",
        "cost_evaluations",
        "cost_evaluations",
    ]


def test_compare_with_zero_trials(k4_file, capsys):
    assert main(["compare", str(k4_file), "--b", "2", "--trials", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["comparison"] == {}


def test_compare_rejects_an_inverted_schedule(k4_file):
    arguments = ["compare", str(k4_file), "--b", "2", "--t-start", "0.1", "--t-end", "1.0"]
    assert main(arguments) == 2


def test_gate_mode_above_the_qubit_cap(k4_file, monkeypatch):
    monkeypatch.setenv("QANNEAL_MAX_QUBITS", "6")
    assert main(["sample", str(k4_file), "--b", "3", "--trials", "2", "--mode", "gate"]) == 2


def test_malformed_instance_exits_with_usage_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    assert main(["sweep", str(path)]) == 2


def test_invalid_environment_value(k4_file, monkeypatch):
    monkeypatch.setenv("QANNEAL_MAX_REPETITIONS", "-3")
    assert main(["sample", str(k4_file), "--b", "1", "--trials", "1"]) == 2


def test_sample_reports_cutoff_errors_when_postselection_underflows(tmp_path):
    path = tmp_path / "two_state.json"
    cost = CostFunction(
        n=1, constant=0.0, terms=(LocalTerm((0,), (0.0, 1.0)),), c_min=-0.5, c_max=1.5
    )
    write_instance(cost_to_dict(cost), path)

    out, summary_path = tmp_path / "runs.jsonl", tmp_path / "summary.json"
    arguments = ["sample", str(path), "--b", "5000", "--trials", "2"]
    assert main(arguments + ["--out", str(out), "--summary", str(summary_path)]) == 0

    runs = [json.loads(line) for line in out.read_text().splitlines()]
    assert [run["trial"] for run in runs] == [0, 1]
    assert all("repetitions" in run["error"] for run in runs)

    summary = json.loads(summary_path.read_text())
    assert summary["failed_trials"] == 2
    assert summary["p0b"] == 0.0
    assert summary["expected_repetitions"] == "inf"
    assert summary["mean_repetitions"] is None


def test_verify_dumps_the_final_amplitudes(k4_file, tmp_path, capsys):
    dump = tmp_path / "final.bin"
    assert main(["verify", str(k4_file), "--b", "2", "--dump", str(dump)]) == 0

    report = json.loads(capsys.readouterr().out)
    assert report["residuals"]["amplitude_dump"] == 0.0
    assert "dump" not in report["config"]
    assert dump.stat().st_size == 16 * 2**6
    assert load_amplitudes(dump, 4, 2).norm() == pytest.approx(1.0)


def test_verify_checks_the_preparation_and_both_branches(k4_file, capsys):
    assert main(["verify", str(k4_file), "--b", "1", "--corrupt"]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["residuals"]["hadamard_preparation"] < 1e-12
    assert "u_pm_branches" in report["failed"]


def test_generated_cost_file_carries_m_and_density(tmp_path):
    out = tmp_path / "cost.json"
    arguments = ["generate", "cost", "--n", "6", "--m", "3", "--density", "0.4"]
    assert main(arguments + ["--seed", "2", "--out", str(out)]) == 0

    record = json.loads(out.read_text())
    assert (record["m"], record["density"], record["seed"]) == (3, 0.4, 2)
