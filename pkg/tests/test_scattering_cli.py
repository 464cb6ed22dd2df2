import json

import numpy as np
import pytest

import scattering_cli
from circuit_engine import StateVector, load_qasm, qasm_state_fidelity
from run_config import load_run_config
from run_store import load_state
from scattering_cli import EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, EXIT_RUNTIME, main
from scattering_experiments import run_table_cell
from wave_packets import PrepVariant, build_packet_circuit

SIX_SITES = {
    "model": {"n_sites": 6, "j_coupling": 0.4, "h_field": 1.0, "g_coupling": 0.05},
    "packets": [
        {"center": 2, "momentum": "7*pi/16", "width": 1.0, "window": [1, 3]},
        {"center": 5, "momentum": "-7*pi/16", "width": 1.0, "window": [4, 6]},
    ],
    "trotter": {"dt": 0.1, "n_steps": 5},
    "vacuum": {"source": "exact_ground"},
}

EIGHT_SITES = {
    "model": {"n_sites": 8, "j_coupling": 0.4, "h_field": 1.0, "g_coupling": 0.1},
    "packets": [
        {"center": 2, "momentum": "3*pi/8", "width": 1.5, "window": [1, 4]},
        {"center": 6, "momentum": "-3*pi/8", "width": 1.5, "window": [5, 8]},
    ],
    "trotter": {"dt": 0.1, "n_steps": 0},
}


@pytest.fixture
def write_config(tmp_path):
    def write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return write


def test_evolve_writes_dataset(tmp_path, write_config):
    run_dir = tmp_path / "run"
    assert main(["evolve", "--config", write_config(SIX_SITES), "--output", str(run_dir)]) == EXIT_OK
    lines = (run_dir / "trajectory.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == ["t"] + [f"n_{j}" for j in range(1, 7)] + [f"S_{c}" for c in range(1, 6)]
    assert len(lines) == 1 + 6
    assert (run_dir / "trajectory.json").exists()
    assert json.loads((run_dir / "config_echo.json").read_text(encoding="utf-8"))["model"]["n_sites"] == 6


def test_evolve_is_reproducible(tmp_path, write_config):
    config = write_config(SIX_SITES)
    main(["evolve", "--config", config, "--output", str(tmp_path / "first")])
    main(["evolve", "--config", config, "--output", str(tmp_path / "second")])
    for name in ("trajectory.csv", "config_echo.json"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


def test_zero_steps_and_format_flag(tmp_path, write_config):
    data = {**SIX_SITES, "trotter": {"dt": 0.1, "n_steps": 0}}
    run_dir = tmp_path / "run"
    assert main(["evolve", "--config", write_config(data), "--output", str(run_dir), "--format", "csv"]) == EXIT_OK
    assert len((run_dir / "trajectory.csv").read_text(encoding="utf-8").splitlines()) == 2
    assert not (run_dir / "trajectory.json").exists()


def test_invalid_config_creates_nothing(tmp_path, write_config):
    data = json.loads(json.dumps(SIX_SITES))
    data["packets"][0]["width"] = -1
    run_dir = tmp_path / "run"
    assert main(["evolve", "--config", write_config(data), "--output", str(run_dir)]) == EXIT_CONFIG
    assert not run_dir.exists()


def test_table_without_grid_is_a_config_error(tmp_path, write_config):
    run_dir = tmp_path / "run"
    assert main(["table", "--config", write_config(SIX_SITES), "--output", str(run_dir)]) == EXIT_CONFIG
    assert not run_dir.exists()


def test_runtime_failure(tmp_path, write_config):
    data = {
        "model": {"n_sites": 14, "j_coupling": 0.4},
        "packets": [{"center": 4, "momentum": 0.5, "width": 1.0}],
        "vacuum": {"source": "exact_ground"},
    }
    assert main(["evolve", "--config", write_config(data), "--output", str(tmp_path / "run")]) == EXIT_RUNTIME


def test_prepare_reports_metrics(tmp_path, write_config):
    run_dir = tmp_path / "run"
    assert main(["prepare", "--config", write_config(EIGHT_SITES), "--output", str(run_dir)]) == EXIT_OK
    metrics = json.loads((run_dir / "metrics.json").read_text(encoding="utf-8"))
    assert metrics["cnot_depth"] == 18
    assert metrics["term_count"] == 6
    assert 0 < metrics["post_selection_probability"] <= 1
    state, header = load_state(str(run_dir))
    assert state.n_qubits == 8
    assert header["norm"] == pytest.approx(1.0)


def test_export_circuit(tmp_path, write_config):
    config = write_config(EIGHT_SITES)
    main(["export", "--config", config, "--output", str(tmp_path / "plain")])
    text = (tmp_path / "plain" / "circuit.qasm").read_text(encoding="utf-8")
    assert text.startswith("OPENQASM 3.0;")
    assert "ccx" in text
    assert load_qasm(text).num_qubits == 12
    metrics = json.loads((tmp_path / "plain" / "metrics.json").read_text(encoding="utf-8"))
    assert metrics["reimport_fidelity"] == pytest.approx(1.0, abs=1e-9)

    run = load_run_config(config)
    circuit = build_packet_circuit(run.packets, PrepVariant.TRUNCATED_UNITARY, 8)
    start = StateVector.random(12, np.random.default_rng(8))
    assert qasm_state_fidelity(text, circuit, start) == pytest.approx(1.0, abs=1e-9)

    main(["export", "--config", config, "--output", str(tmp_path / "expanded"), "--expand-toffoli"])
    assert "ccx" not in (tmp_path / "expanded" / "circuit.qasm").read_text(encoding="utf-8")


def test_vqe_command(tmp_path, write_config):
    data = {"model": {"n_sites": 2, "j_coupling": 0.0}, "vqe": {"max_iterations": 200, "learning_rate": 0.3}}
    run_dir = tmp_path / "run"
    assert main(["vqe", "--config", write_config(data), "--output", str(run_dir), "--seed", "4"]) == EXIT_OK
    summary = json.loads((run_dir / "vqe.json").read_text(encoding="utf-8"))
    assert summary["exact_energy"] == pytest.approx(-2.0)
    assert summary["seed"] == 4
    assert summary["energy"] >= summary["exact_energy"] - 1e-9


def table_config():
    return {**SIX_SITES, "trotter": {"dt": 0.1, "n_steps": 2}, "grid": [[0.4, 0.01], [0.4, 0.05]]}


def test_table_sweep(tmp_path, write_config):
    run_dir = tmp_path / "run"
    assert main(["table", "--config", write_config(table_config()), "--output", str(run_dir), "--jobs", "1"]) == EXIT_OK
    for name in ("error_report.txt", "error_report.csv", "error_report.json", "error_report_per_site.json", "analysis.json"):
        assert (run_dir / name).exists(), name
    report = json.loads((run_dir / "error_report.json").read_text(encoding="utf-8"))
    assert [row["g_coupling"] for row in report["rows"]] == [0.01, 0.05]
    for row in report["rows"]:
        assert np.isclose(row["occupation_twp"], row["occupation_tuwp"], atol=1e-6)


def test_table_partial_failure(tmp_path, write_config, monkeypatch):
    real = scattering_cli.table1_reports

    def runner(params, *rest):
        if params.g_coupling > 0.04:
            raise RuntimeError("injected failure")
        return run_table_cell(params, *rest)

    def flaky(*args, **kwargs):
        return real(*args, cell_runner=runner, **kwargs)

    monkeypatch.setattr(scattering_cli, "table1_reports", flaky)
    run_dir = tmp_path / "run"
    assert main(["table", "--config", write_config(table_config()), "--output", str(run_dir), "--jobs", "1"]) == EXIT_PARTIAL
    text = (run_dir / "error_report.txt").read_text(encoding="utf-8")
    assert "FAILED: RuntimeError: injected failure" in text
