"""Command-line interface: simulate | train | bench-xor | sweep-latency.

Exit codes:
    0  success
    2  config error (the offending key is named)
    3  simulation failure
    4  training epoch budget exhausted
    5  training divergence guard tripped
    6  bench-xor decode or mechanism-check failure

All output files are written atomically (write to a temporary file in the
same directory, then rename), so a crashed run never leaves a truncated
CSV behind.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from typing import Callable, Optional

import numpy as np

from .config import Config, TrainSpec, load_config
from .errors import ConfigError, DivergenceError, InvalidInputError, MtjsnnError
from .macrospin import integrate_macrospin, initial_state
from .network import Network, SimConfig, Trace, simulate_network
from .tlr import TlrParams, run_tlr
from .trainer import TrainConfig, TrainHistory, train
from .xorbench import run_xor_eval, write_row_traces, xor_dataset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_EPOCHS_EXHAUSTED = 4
EXIT_DIVERGENCE = 5
EXIT_MECHANISM = 6


def atomic_write(path: str, writer: Callable[[str], None]) -> None:
    """Run ``writer(tmp_path)`` then atomically rename onto ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path: str, text: str) -> None:
    def writer(tmp: str) -> None:
        with open(tmp, "w") as fh:
            fh.write(text)
    atomic_write(path, writer)


def _weights_text(net: Network) -> str:
    lines = [f"{s.pre}->{s.post} {repr(float(s.weight))}" for s in net.synapses]
    return "\n".join(lines) + "\n"


def initial_weights(net: Network, spec: TrainSpec, seed: int) -> Network:
    """Config weights perturbed by the seeded uniform initialization jitter."""
    if spec.init_jitter == 0:
        return net
    rng = np.random.default_rng(seed)
    base = net.weight_vector()
    return net.with_weights(base + rng.uniform(-spec.init_jitter, spec.init_jitter, base.size))


def _train_config(spec: TrainSpec, seed: int) -> TrainConfig:
    return TrainConfig(
        eta=spec.eta,
        fd_epsilon=spec.fd_epsilon,
        max_epochs=spec.max_epochs,
        tol=spec.tol,
        no_spike_penalty_time=spec.no_spike_penalty_time,
        seed=seed,
        parallel=spec.parallel,
    )


def cmd_simulate(cfg: Config, out_dir: str, seed: int) -> int:
    net = cfg.network
    if cfg.stimulus is not None:
        net = net.with_schedules(cfg.stimulus)
    try:
        trace = simulate_network(net, cfg.sim)
    except MtjsnnError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    atomic_write(os.path.join(out_dir, "trace.csv"), trace.to_csv)
    write_text(os.path.join(out_dir, "spikes.txt"), trace.spikes_text())
    return EXIT_OK


def _run_training(cfg: Config, seed: int) -> tuple[Network, TrainHistory]:
    net0 = initial_weights(cfg.network, cfg.train, seed)
    dataset = xor_dataset(cfg.encoding, cfg.sim.horizon)
    train_sim = SimConfig(dt=cfg.train.dt, horizon=cfg.sim.horizon)
    return train(net0, dataset, _train_config(cfg.train, seed), sim=train_sim)


def _write_train_outputs(out_dir: str, net: Network, history: TrainHistory) -> None:
    write_text(os.path.join(out_dir, "weights.out"), _weights_text(net))
    atomic_write(os.path.join(out_dir, "history.csv"), history.to_csv)


def cmd_train(cfg: Config, out_dir: str, seed: int) -> int:
    try:
        net, history = _run_training(cfg, seed)
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except MtjsnnError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    _write_train_outputs(out_dir, net, history)
    if not history.converged:
        print(f"epoch budget exhausted after {history.epochs} epochs", file=sys.stderr)
        return EXIT_EPOCHS_EXHAUSTED
    return EXIT_OK


def cmd_bench_xor(cfg: Config, out_dir: str, seed: int) -> int:
    try:
        net, history = _run_training(cfg, seed)
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except MtjsnnError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    _write_train_outputs(out_dir, net, history)
    if not history.converged:
        print(f"epoch budget exhausted after {history.epochs} epochs", file=sys.stderr)
        return EXIT_EPOCHS_EXHAUSTED

    try:
        report = run_xor_eval(net, cfg.sim, cfg.encoding)
        write_row_traces(net, cfg.sim, cfg.encoding, out_dir)
    except MtjsnnError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    write_text(os.path.join(out_dir, "xor_report.txt"), report.text())
    print(report.text(), end="")
    if not report.all_rows_pass:
        for r in report.rows:
            if not r.passed:
                print(f"decode failure on row (a={r.row.a}, b={r.row.b})", file=sys.stderr)
        return EXIT_MECHANISM
    if not report.mechanisms_ok:
        for name, ok in (("threshold_gate", report.threshold_gate_ok),
                         ("latency_shift", report.latency_shift_ok),
                         ("refraction", report.refraction_ok)):
            if not ok:
                print(f"mechanism check failed: {name}", file=sys.stderr)
        return EXIT_MECHANISM
    return EXIT_OK


def _tlr_latency(params: TlrParams, drive: float, dt: float, horizon: float) -> Optional[float]:
    n = int(round(horizon / dt))
    run = run_tlr(params, np.full(n + 1, drive), dt)
    return run.onsets[0] if run.onsets else None


def _macrospin_latency(params, v_gate: float, dt: float, horizon: float) -> Optional[float]:
    trace = integrate_macrospin(initial_state(params), params, lambda t: v_gate, dt, horizon)
    times = trace.switching_times()
    return times[0] if times else None


def cmd_sweep_latency(cfg: Config, out_dir: str, seed: int) -> int:
    sweep = cfg.sweep
    if sweep is None:
        print("config error: sweep: missing sweep section", file=sys.stderr)
        return EXIT_CONFIG
    rows = ["drive,latency_ns"]
    try:
        for drive in sweep.drives:
            if sweep.backend == "tlr":
                latency = _tlr_latency(sweep.params, drive, sweep.dt, sweep.horizon)
            else:
                latency = _macrospin_latency(sweep.params, drive, sweep.dt, sweep.horizon)
            rows.append(f"{repr(float(drive))},{'' if latency is None else repr(float(latency))}")
    except MtjsnnError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    write_text(os.path.join(out_dir, "latency.csv"), "\n".join(rows) + "\n")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "bench-xor": cmd_bench_xor,
    "sweep-latency": cmd_sweep_latency,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mtjsnn",
        description="Deterministic simulator and trainer for latency-coded spiking networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a YAML config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the training seed from the config")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        key = exc.key or "<root>"
        print(f"config error: {key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(args.out, exist_ok=True)
    seed = args.seed if args.seed is not None else cfg.train.seed
    try:
        return COMMANDS[args.command](cfg, args.out, seed)
    except InvalidInputError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
