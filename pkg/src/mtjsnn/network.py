"""Feedforward spiking network on a shared fixed time grid.

Synapses are memoryless voltage amplifiers: the drive delivered to a
postsynaptic neuron is the weighted sum of its presynaptic output voltages
at the same instant.  Sources (encoding and bias neurons) have no dynamics;
they emit the standard pulse at scheduled onset times.  Neurons may use the
phenomenological TLR backend or the macrospin physics backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import macrospin as ms
from . import tlr
from .errors import InvalidInputError, NumericalFailureError

TLR_BACKEND = "tlr"
MACROSPIN_BACKEND = "macrospin"


@dataclass(frozen=True)
class Source:
    id: str
    spike_times: tuple[float, ...] = ()
    amplitude: float = 1.0   # volts
    duration: float = 1.2    # ns


@dataclass(frozen=True)
class Neuron:
    id: str
    backend: str = TLR_BACKEND
    params: Union[tlr.TlrParams, ms.MacrospinParams] = field(default_factory=tlr.TlrParams)


@dataclass(frozen=True)
class Synapse:
    pre: str
    post: str
    weight: float  # drive-units per volt


@dataclass(frozen=True)
class Network:
    neurons: tuple[Neuron, ...]
    synapses: tuple[Synapse, ...]
    sources: tuple[Source, ...]

    def neuron(self, nid: str) -> Neuron:
        for n in self.neurons:
            if n.id == nid:
                return n
        raise InvalidInputError(f"unknown neuron {nid!r}")

    def in_edges(self, post: str) -> list[Synapse]:
        return [s for s in self.synapses if s.post == post]

    def with_weights(self, weights: np.ndarray) -> "Network":
        """Copy with the synapse weight vector replaced (same edge order)."""
        if len(weights) != len(self.synapses):
            raise InvalidInputError("weight vector length mismatch")
        new = tuple(replace(s, weight=float(w)) for s, w in zip(self.synapses, weights))
        return replace(self, synapses=new)

    def weight_vector(self) -> np.ndarray:
        return np.array([s.weight for s in self.synapses], dtype=float)

    def with_schedules(self, schedules: dict[str, list[float]]) -> "Network":
        """Copy with source spike schedules replaced by id."""
        new = []
        for src in self.sources:
            if src.id in schedules:
                new.append(replace(src, spike_times=tuple(schedules[src.id])))
            else:
                new.append(src)
        return replace(self, sources=tuple(new))


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.001    # ns
    horizon: float = 5.0  # ns

    def __post_init__(self):
        if not (0 < self.dt <= 0.01):
            raise InvalidInputError("dt must be in (0, 0.01] ns")
        if self.horizon < 10 * self.dt:
            raise InvalidInputError("horizon must be >= 10*dt")


@dataclass
class Trace:
    time: np.ndarray
    signals: dict[str, np.ndarray]
    spike_onsets: dict[str, list[float]]

    def to_csv(self, path) -> None:
        names = list(self.signals)
        with open(path, "w") as fh:
            fh.write("time_ns," + ",".join(names) + "\n")
            cols = [self.signals[n] for n in names]
            for k in range(self.time.size):
                row = [repr(float(self.time[k]))]
                row.extend(repr(float(c[k])) for c in cols)
                fh.write(",".join(row) + "\n")

    def spikes_text(self) -> str:
        lines = []
        for nid, onsets in self.spike_onsets.items():
            if onsets:
                lines.append(f"{nid}: " + " ".join(repr(float(t)) for t in onsets))
            else:
                lines.append(f"{nid}: -")
        return "\n".join(lines) + "\n"


def validate_topology(net: Network) -> list[str]:
    """Return a list of invariant violations; empty means the network is valid."""
    violations = []
    neuron_ids = [n.id for n in net.neurons]
    source_ids = [s.id for s in net.sources]
    all_ids = neuron_ids + source_ids
    seen = set()
    for nid in all_ids:
        if nid in seen:
            violations.append(f"duplicate id {nid!r}")
        seen.add(nid)

    for s in net.synapses:
        if s.post not in neuron_ids:
            violations.append(f"synapse {s.pre!r}->{s.post!r}: post is not a neuron")
        if s.pre not in neuron_ids and s.pre not in source_ids:
            violations.append(f"synapse {s.pre!r}->{s.post!r}: unknown pre id")
        if not math.isfinite(s.weight):
            violations.append(f"synapse {s.pre!r}->{s.post!r}: non-finite weight")

    # cycle check on the neuron-to-neuron subgraph (source edges cannot cycle)
    order = _topo_order(net, neuron_ids)
    if order is None:
        violations.append("synapse graph contains a cycle (network must be feedforward)")
    return violations


def _topo_order(net: Network, neuron_ids: list[str]) -> Optional[list[str]]:
    deps = {nid: set() for nid in neuron_ids}
    for s in net.synapses:
        if s.pre in deps and s.post in deps:
            deps[s.post].add(s.pre)
    order = []
    ready = [nid for nid in neuron_ids if not deps[nid]]
    while ready:
        nid = ready.pop(0)
        order.append(nid)
        for other, d in deps.items():
            if nid in d:
                d.discard(nid)
                if not d and other not in order and other not in ready:
                    ready.append(other)
    if len(order) != len(neuron_ids):
        return None
    return order


def synaptic_drive(net: Network, post_id: str, presyn_voltages: dict[str, float]) -> float:
    """Instantaneous drive: sum of weight * presynaptic voltage over in-edges."""
    total = 0.0
    for s in net.in_edges(post_id):
        if s.pre not in presyn_voltages:
            raise InvalidInputError(f"missing presynaptic voltage for {s.pre!r}")
        total += s.weight * presyn_voltages[s.pre]
    return total


def simulate_network(net: Network, sim: SimConfig) -> Trace:
    """Advance all neurons on the shared grid in topological order.

    Feedforward topology plus instantaneous synapses let each neuron be
    integrated over the full horizon once all its presynaptic voltage
    series are known.  Deterministic: identical inputs give identical traces.
    """
    violations = validate_topology(net)
    if violations:
        raise InvalidInputError("invalid network: " + "; ".join(violations))
    for src in net.sources:
        for t_spk in src.spike_times:
            if not (0 <= t_spk <= sim.horizon):
                raise InvalidInputError(
                    f"source {src.id!r} schedule entry {t_spk} outside [0, horizon]"
                )

    n_steps = int(round(sim.horizon / sim.dt))
    time = sim.dt * np.arange(n_steps + 1)

    signals: dict[str, np.ndarray] = {}
    onsets: dict[str, list[float]] = {}
    voltages: dict[str, np.ndarray] = {}

    for src in net.sources:
        v = tlr.source_waveform(time, list(src.spike_times), src.amplitude, src.duration)
        voltages[src.id] = v
        signals[f"{src.id}.v"] = v
        onsets[src.id] = [float(t) for t in src.spike_times]

    order = _topo_order(net, [n.id for n in net.neurons])
    for nid in order:
        neuron = net.neuron(nid)
        drive = np.zeros_like(time)
        for s in net.in_edges(nid):
            drive = drive + s.weight * voltages[s.pre]
        try:
            if neuron.backend == TLR_BACKEND:
                run = tlr.run_tlr(neuron.params, drive, sim.dt)
                v_out, state_series, n_onsets = run.v_out, run.accumulation, run.onsets
            elif neuron.backend == MACROSPIN_BACKEND:
                p = neuron.params
                trace = ms.integrate_macrospin(
                    ms.initial_state(p), p, drive, sim.dt, sim.horizon
                )
                v_out = p.v_dd - trace.v_node
                state_series = trace.alignment()
                n_onsets = trace.switching_times()
            else:
                raise InvalidInputError(f"unknown backend {neuron.backend!r}")
        except NumericalFailureError as exc:
            raise NumericalFailureError(f"neuron {nid!r}: {exc}") from exc
        voltages[nid] = v_out
        signals[f"{nid}.drive"] = drive
        signals[f"{nid}.v"] = v_out
        signals[f"{nid}.state"] = state_series
        onsets[nid] = [float(t) for t in n_onsets]

    return Trace(time=time, signals=signals, spike_onsets=onsets)


def first_spike_time(trace: Trace, nid: str) -> Optional[float]:
    """Earliest recorded spike onset for the given id, or None if silent."""
    if nid not in trace.spike_onsets:
        raise InvalidInputError(f"unknown id {nid!r}")
    times = trace.spike_onsets[nid]
    return min(times) if times else None
