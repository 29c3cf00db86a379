"""CLI: exit codes, output files, determinism of cheap commands.

The full bench-xor path is exercised by the acceptance suite; here the
focus is argument/config handling and the simulate/train/sweep commands
with small budgets.
"""

import filecmp

import pytest
import yaml

from mtjsnn.cli import (
    EXIT_CONFIG,
    EXIT_DIVERGENCE,
    EXIT_EPOCHS_EXHAUSTED,
    EXIT_OK,
    EXIT_SIMULATION,
    main,
)


def write_config(tmp_path, doc, name="config.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def xor_doc(**overrides):
    doc = {"schema_version": 1, "network": {"preset": "xor"}}
    doc.update(overrides)
    return doc


class TestSimulate:
    def test_happy_path_writes_trace_and_spikes(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc(stimulus={"A": [0.0], "bias": [0.0]}))
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_OK
        assert (out / "trace.csv").exists()
        assert (out / "spikes.txt").exists()
        header = (out / "trace.csv").read_text().splitlines()[0]
        assert header.startswith("time_ns,")

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc(stimulus={"A": [0.0], "bias": [0.0]}))
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["simulate", "--config", cfg, "--out", str(out1)])
        main(["simulate", "--config", cfg, "--out", str(out2)])
        assert filecmp.cmp(out1 / "trace.csv", out2 / "trace.csv", shallow=False)
        assert filecmp.cmp(out1 / "spikes.txt", out2 / "spikes.txt", shallow=False)

    def test_config_error_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, xor_doc(sim={"dt": -0.001}))
        code = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_unknown_key_exit_2_names_key(self, tmp_path, capsys):
        doc = xor_doc()
        doc["network"]["bogus"] = 1
        cfg = write_config(tmp_path, doc)
        code = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == EXIT_CONFIG
        assert "network.bogus" in capsys.readouterr().err

    def test_missing_config_exit_2(self, tmp_path):
        code = main(["simulate", "--config", str(tmp_path / "nope.yaml"),
                     "--out", str(tmp_path / "out")])
        assert code == EXIT_CONFIG

    def test_simulation_failure_exit_3(self, tmp_path):
        # stimulus outside the horizon passes config validation but fails in
        # the simulator
        cfg = write_config(tmp_path, xor_doc(stimulus={"A": [99.0]}))
        code = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == EXIT_SIMULATION


class TestTrain:
    def test_epoch_budget_exhausted_exit_4(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc(train={"max_epochs": 1, "seed": 2}))
        out = tmp_path / "out"
        code = main(["train", "--config", cfg, "--out", str(out)])
        assert code == EXIT_EPOCHS_EXHAUSTED
        # partial history still written
        assert (out / "history.csv").exists()
        assert (out / "weights.out").exists()

    def test_eta_zero_constant_loss_exit_4(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc(
            train={"eta": 0.0, "max_epochs": 3, "seed": 2}))
        out = tmp_path / "out"
        assert main(["train", "--config", cfg, "--out", str(out)]) == EXIT_EPOCHS_EXHAUSTED
        rows = (out / "history.csv").read_text().splitlines()[1:]
        losses = {r.split(",")[1] for r in rows}
        assert len(rows) == 3 and len(losses) == 1

    def test_divergence_exit_5(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc(
            train={"eta": 50.0, "init_jitter": 0.0, "tol": 1e-4, "seed": 2}))
        code = main(["train", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == EXIT_DIVERGENCE

    def test_seed_flag_overrides_config(self, tmp_path):
        doc = xor_doc(train={"max_epochs": 1, "seed": 2})
        cfg = write_config(tmp_path, doc)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["train", "--config", cfg, "--out", str(out1)])
        main(["train", "--config", cfg, "--out", str(out2), "--seed", "3"])
        assert (out1 / "weights.out").read_text() != (out2 / "weights.out").read_text()


class TestSweepLatency:
    def test_tlr_sweep_blanks_then_decreasing(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc(
            sweep={"backend": "tlr", "drives": [0.5, 0.9, 1.2, 1.5, 2.0],
                   "dt": 0.005, "horizon": 15.0}))
        out = tmp_path / "out"
        assert main(["sweep-latency", "--config", cfg, "--out", str(out)]) == EXIT_OK
        lines = (out / "latency.csv").read_text().splitlines()
        assert lines[0] == "drive,latency_ns"
        cells = [ln.split(",")[1] for ln in lines[1:]]
        assert cells[0] == "" and cells[1] == ""
        values = [float(c) for c in cells[2:]]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_single_point(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc(
            sweep={"backend": "tlr", "drives": [2.0]}))
        out = tmp_path / "out"
        assert main(["sweep-latency", "--config", cfg, "--out", str(out)]) == EXIT_OK
        assert len((out / "latency.csv").read_text().splitlines()) == 2

    def test_missing_sweep_section_exit_2(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc())
        assert main(["sweep-latency", "--config", cfg,
                     "--out", str(tmp_path / "out")]) == EXIT_CONFIG

    def test_macrospin_sweep_decreasing(self, tmp_path):
        cfg = write_config(tmp_path, xor_doc(
            sweep={"backend": "macrospin", "drives": [1.0, 1.5, 2.0],
                   "dt": 0.005, "horizon": 15.0}))
        out = tmp_path / "out"
        assert main(["sweep-latency", "--config", cfg, "--out", str(out)]) == EXIT_OK
        lines = (out / "latency.csv").read_text().splitlines()[1:]
        values = [float(ln.split(",")[1]) for ln in lines]
        assert all(a > b for a, b in zip(values, values[1:]))
