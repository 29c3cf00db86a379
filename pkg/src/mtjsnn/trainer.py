"""Spike-timing gradient descent over full network simulations.

The loss per row is L = (t_actual - t_desired)^2 / 2 on the output
neuron's first spike time.  Weight sensitivities dt/dw are obtained by
central finite differences of two complete simulations per weight, so the
update Delta w = -eta * (dL/dt) * (dt/dw) is exact gradient descent with
respect to the simulator.  Updates are batched over all dataset rows and
applied once per epoch.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .network import Network, SimConfig, first_spike_time, simulate_network, validate_topology


@dataclass(frozen=True)
class TrainConfig:
    eta: float = 0.01                 # learning rate
    fd_epsilon: float = 1e-3          # weight perturbation for finite differences
    max_epochs: int = 10000
    tol: float = 0.05                 # ns, convergence band around targets
    no_spike_penalty_time: Optional[float] = None  # defaults to the sim horizon
    seed: int = 1                     # weight initialization seed
    parallel: bool = False            # evaluate FD simulations in a thread pool

    def __post_init__(self):
        if self.eta < 0:
            raise InvalidInputError("eta must be >= 0")
        if self.fd_epsilon <= 0:
            raise InvalidInputError("fd_epsilon must be > 0")
        if self.tol <= 0:
            raise InvalidInputError("tol must be > 0")


@dataclass
class TrainHistory:
    losses: list[float] = field(default_factory=list)          # ns^2 per epoch
    output_times: list[list[Optional[float]]] = field(default_factory=list)
    weights: list[np.ndarray] = field(default_factory=list)
    converged: bool = False
    epochs: int = 0

    def to_csv(self, path) -> None:
        n_rows = len(self.output_times[0]) if self.output_times else 0
        cols = ",".join(f"t_row{k + 1}" for k in range(n_rows))
        with open(path, "w") as fh:
            fh.write(f"epoch,total_loss_ns2,{cols}\n")
            for e, (loss, times) in enumerate(zip(self.losses, self.output_times)):
                vals = ",".join("" if t is None else repr(float(t)) for t in times)
                fh.write(f"{e},{repr(float(loss))},{vals}\n")


def loss(t_actual: float, t_desired: float) -> float:
    """Half squared timing error in ns^2."""
    if not (math.isfinite(t_actual) and math.isfinite(t_desired)):
        raise InvalidInputError("spike times must be finite")
    return 0.5 * (t_actual - t_desired) ** 2


def loss_gradient_time(t_actual: float, t_desired: float) -> float:
    """Analytic dL/dt of the half squared error."""
    if not (math.isfinite(t_actual) and math.isfinite(t_desired)):
        raise InvalidInputError("spike times must be finite")
    return t_actual - t_desired


def weight_update(grad_time: float, jacobian: float, eta: float) -> float:
    """Delta w = -eta * (dL/dt) * (dt/dw)."""
    if not (math.isfinite(grad_time) and math.isfinite(jacobian) and math.isfinite(eta)):
        raise InvalidInputError("inputs must be finite")
    return -eta * grad_time * jacobian


def _output_time(
    net: Network,
    stimulus: dict[str, list[float]],
    output_id: str,
    sim: SimConfig,
    penalty: float,
) -> float:
    trace = simulate_network(net.with_schedules(stimulus), sim)
    t = first_spike_time(trace, output_id)
    return penalty if t is None else t


def spike_time_jacobian_fd(
    net: Network,
    stimulus: dict[str, list[float]],
    edge_index: int,
    eps: float,
    output_id: str = "o1",
    sim: Optional[SimConfig] = None,
    penalty: Optional[float] = None,
    t_base: Optional[float] = None,
) -> float:
    """Finite-difference sensitivity of the output spike time to one weight.

    Central difference over two full simulations.  When the output is silent
    on one side, the silent time is replaced by the no-spike penalty and a
    one-sided difference against the unperturbed network is used instead
    (firing boundary).  Silent on both sides gives 0.
    """
    sim = sim or SimConfig()
    if penalty is None:
        penalty = sim.horizon
    w = net.weight_vector()
    if not 0 <= edge_index < w.size:
        raise InvalidInputError(f"edge index {edge_index} out of range")

    def t_at(delta: float) -> Optional[float]:
        wp = w.copy()
        wp[edge_index] += delta
        trace = simulate_network(net.with_weights(wp).with_schedules(stimulus), sim)
        return first_spike_time(trace, output_id)

    t_plus = t_at(+eps)
    t_minus = t_at(-eps)
    if t_plus is not None and t_minus is not None:
        return (t_plus - t_minus) / (2.0 * eps)
    if t_plus is None and t_minus is None:
        return 0.0
    # one side silent: one-sided difference across the firing boundary
    if t_base is None:
        t0 = t_at(0.0)
        t_base = penalty if t0 is None else t0
    if t_plus is not None:
        return (t_plus - t_base) / eps
    return (t_base - t_minus) / eps


def _fd_times(net, jobs, sim, parallel):
    """Evaluate perturbed output spike times (None = silent) in fixed order."""
    def run(job):
        weights, stimulus, output_id = job
        trace = simulate_network(net.with_weights(weights).with_schedules(stimulus), sim)
        return first_spike_time(trace, output_id)

    if parallel:
        with ThreadPoolExecutor(max_workers=8) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]


def _fd_jacobian(t_plus, t_minus, t_base, eps):
    """Central difference, falling back to one-sided at the firing boundary."""
    if t_plus is not None and t_minus is not None:
        return (t_plus - t_minus) / (2.0 * eps)
    if t_plus is None and t_minus is None:
        return 0.0
    if t_plus is not None:
        return (t_plus - t_base) / eps
    return (t_base - t_minus) / eps


def train(
    net: Network,
    dataset: list[tuple[dict[str, list[float]], float]],
    config: TrainConfig,
    sim: Optional[SimConfig] = None,
    output_id: str = "o1",
) -> tuple[Network, TrainHistory]:
    """Batch gradient descent on spike timing until all rows hit their targets.

    Each epoch sums the per-row, per-edge updates and applies them once, so
    the result is independent of row ordering.  Stops when every row's
    output time is within ``config.tol`` of its target, or at
    ``config.max_epochs``.  Aborts if the total loss exceeds 1000x its
    initial value.
    """
    sim = sim or SimConfig()
    violations = validate_topology(net)
    if violations:
        raise InvalidInputError("invalid network: " + "; ".join(violations))
    if not dataset:
        raise InvalidInputError("dataset must be non-empty")

    penalty = config.no_spike_penalty_time
    if penalty is None:
        penalty = sim.horizon

    history = TrainHistory()
    weights = net.weight_vector()
    n_edges = weights.size
    initial_loss: Optional[float] = None

    for epoch in range(config.max_epochs):
        current = net.with_weights(weights)
        times = []
        spiked = []
        for stimulus, _t_des in dataset:
            trace = simulate_network(current.with_schedules(stimulus), sim)
            t = first_spike_time(trace, output_id)
            spiked.append(t is not None)
            times.append(penalty if t is None else t)
        total = sum(loss(t, t_des) for t, (_, t_des) in zip(times, dataset))

        history.losses.append(total)
        history.output_times.append(
            [t if ok else None for t, ok in zip(times, spiked)]
        )
        history.weights.append(weights.copy())
        history.epochs = epoch + 1

        if initial_loss is None:
            initial_loss = total
        elif initial_loss > 0 and total > 1000.0 * initial_loss:
            raise DivergenceError(
                f"loss {total:.3g} exceeds 1000x initial {initial_loss:.3g} at epoch {epoch}"
            )

        if all(
            ok and abs(t - t_des) <= config.tol
            for t, ok, (_, t_des) in zip(times, spiked, dataset)
        ):
            history.converged = True
            return net.with_weights(weights), history

        # finite-difference jacobians: 2 simulations per (row, edge), fixed order
        jobs = []
        for stimulus, _t_des in dataset:
            for j in range(n_edges):
                for sign in (+1.0, -1.0):
                    wp = weights.copy()
                    wp[j] += sign * config.fd_epsilon
                    jobs.append((wp, stimulus, output_id))
        results = _fd_times(net, jobs, sim, config.parallel)

        delta = np.zeros(n_edges)
        idx = 0
        for (stimulus, t_des), t_act in zip(dataset, times):
            grad = loss_gradient_time(t_act, t_des)
            for j in range(n_edges):
                t_plus, t_minus = results[idx], results[idx + 1]
                idx += 2
                jac = _fd_jacobian(t_plus, t_minus, t_act, config.fd_epsilon)
                delta[j] += weight_update(grad, jac, config.eta)
        weights = weights + delta

    return net.with_weights(weights), history
