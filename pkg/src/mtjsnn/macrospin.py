"""Single-domain MTJ free-layer dynamics in series with an NMOS transistor.

The free layer is a unit magnetization vector evolving under the
Landau-Lifshitz-Gilbert equation with a Slonczewski spin-transfer term
driven by the device current.  The MTJ sits between the supply rail and the
output node; the transistor pulls the node toward ground, so the node
voltage is ``v_dd - i * R(m)``.  Switching of the free layer changes the
MTJ resistance and shows up as a voltage transient at the node.

Units: time ns, field T, current mA, resistance kOhm, voltage V
(mA * kOhm = V), gyromagnetic ratio rad/(ns*T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InsufficientDataError, InvalidInputError, InvalidStateError, NumericalFailureError
from .tlr import TlrParams

_UNIT_TOL = 1e-6
_NODE_TOL = 1e-9  # volts, circuit bisection tolerance


@dataclass(frozen=True)
class MacrospinParams:
    gamma: float = 176.0            # rad/(ns*T)
    alpha: float = 0.02             # Gilbert damping
    h_easy: float = 0.03            # T, easy-axis anisotropy along the polarizer axis
    h_demag: float = 0.6            # T, out-of-plane demagnetization
    stt_coefficient: float = -25.0  # rad/(ns*mA); negative: positive current drives AP -> P
    polarizer: tuple[float, float, float] = (1.0, 0.0, 0.0)
    r_parallel: float = 2.0         # kOhm
    r_antiparallel: float = 4.0     # kOhm
    v_dd: float = 1.0               # V
    transistor_k: float = 1.0       # mA/V^2
    transistor_vt: float = 0.4      # V

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidInputError("alpha must be > 0")
        if not (self.r_antiparallel > self.r_parallel > 0):
            raise InvalidInputError("need r_antiparallel > r_parallel > 0")
        if self.v_dd <= 0:
            raise InvalidInputError("v_dd must be > 0")
        p = np.asarray(self.polarizer, dtype=float)
        if abs(np.linalg.norm(p) - 1.0) > _UNIT_TOL:
            raise InvalidInputError("polarizer must be a unit vector")

    @property
    def easy_axis(self) -> np.ndarray:
        return np.asarray(self.polarizer, dtype=float)


@dataclass
class MacrospinState:
    m: np.ndarray   # unit vector
    t: float = 0.0  # ns


def initial_state(params: MacrospinParams, tilt_deg: float = 1.0) -> MacrospinState:
    """Antiparallel state tilted in-plane by a fixed angle.

    The exact antiparallel direction is a fixed point of the dynamics, so a
    small deterministic tilt stands in for thermal agitation.
    """
    e = params.easy_axis
    # in-plane perpendicular direction (easy axis is in-plane by convention)
    perp = np.cross(np.array([0.0, 0.0, 1.0]), e)
    n = np.linalg.norm(perp)
    if n < 1e-12:
        perp = np.array([1.0, 0.0, 0.0])
    else:
        perp = perp / n
    th = math.radians(tilt_deg)
    m = -math.cos(th) * e + math.sin(th) * perp
    return MacrospinState(m=m / np.linalg.norm(m), t=0.0)


def _check_unit(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (3,) or abs(np.linalg.norm(m) - 1.0) > _UNIT_TOL:
        raise InvalidStateError("m must be a unit 3-vector")
    return m


def llgs_derivative(m: np.ndarray, params: MacrospinParams, i_device: float) -> np.ndarray:
    """dm/dt in 1/ns; exactly orthogonal to m term by term."""
    m = _check_unit(m)
    e = params.easy_axis
    h_eff = params.h_easy * float(np.dot(m, e)) * e
    h_eff = h_eff - np.array([0.0, 0.0, params.h_demag * m[2]])
    gp = params.gamma / (1.0 + params.alpha ** 2)
    mxh = np.cross(m, h_eff)
    dm = -gp * mxh - gp * params.alpha * np.cross(m, mxh)
    dm = dm + params.stt_coefficient * i_device * np.cross(m, np.cross(m, e))
    return dm


def mtj_resistance(m: np.ndarray, params: MacrospinParams) -> float:
    """Cosine interpolation between parallel and antiparallel resistance."""
    m = _check_unit(m)
    c = float(np.dot(m, params.easy_axis))
    return params.r_parallel + (params.r_antiparallel - params.r_parallel) * (1.0 - c) / 2.0


def nmos_current(v_gate: float, v_drain: float, params: MacrospinParams) -> float:
    """Square-law NMOS drain current in mA; continuous across the triode boundary."""
    if not (math.isfinite(v_gate) and math.isfinite(v_drain)):
        raise InvalidInputError("voltages must be finite")
    v_ov = v_gate - params.transistor_vt
    if v_ov <= 0:
        return 0.0
    if v_drain < v_ov:
        return params.transistor_k * (v_ov * v_drain - 0.5 * v_drain * v_drain)
    return 0.5 * params.transistor_k * v_ov * v_ov


def solve_node(resistance: float, v_gate: float, params: MacrospinParams) -> tuple[float, float]:
    """Self-consistent node voltage and device current for the series circuit.

    Solves v = v_dd - i(v) * R by bisection on v in [0, v_dd].
    """
    def f(v: float) -> float:
        return params.v_dd - nmos_current(v_gate, v, params) * resistance - v

    lo, hi = 0.0, params.v_dd
    f_lo, f_hi = f(lo), f(hi)
    if f_lo < 0 or f_hi > 0:
        raise NumericalFailureError("circuit solve: no bracket in [0, v_dd]")
    while hi - lo > _NODE_TOL:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    v_node = 0.5 * (lo + hi)
    return v_node, nmos_current(v_gate, v_node, params)


@dataclass
class MacrospinTrace:
    time: np.ndarray      # grid points, ns
    v_node: np.ndarray    # V
    i_device: np.ndarray  # mA
    m: np.ndarray         # (n, 3) unit vectors
    params: MacrospinParams = field(repr=False, default=None)

    def alignment(self) -> np.ndarray:
        """Projection of m on the easy axis (+1 parallel, -1 antiparallel)."""
        return self.m @ self.params.easy_axis

    def switching_times(self) -> list[float]:
        """Times where the easy-axis projection crosses zero (linear interp)."""
        a = self.alignment()
        out = []
        for k in range(a.size - 1):
            if a[k] == 0.0:
                out.append(float(self.time[k]))
            elif a[k] * a[k + 1] < 0:
                frac = a[k] / (a[k] - a[k + 1])
                out.append(float(self.time[k] + frac * (self.time[k + 1] - self.time[k])))
        return out


Waveform = Union[Callable[[float], float], np.ndarray, Sequence[float]]


def _gate_at(waveform: Waveform, k: int, t: float) -> float:
    if callable(waveform):
        return float(waveform(t))
    return float(waveform[k])


def integrate_macrospin(
    state: MacrospinState,
    params: MacrospinParams,
    v_gate_waveform: Waveform,
    dt: float,
    horizon: float,
) -> MacrospinTrace:
    """Fixed-step RK4 integration with per-step circuit solve.

    The device current is solved self-consistently from the node equation at
    the start of each step and held constant across the RK4 stages; m is
    renormalized after every step.  ``v_gate_waveform`` is either a callable
    of time or an array of grid-point samples.
    """
    if not (0 < dt <= 0.01):
        raise InvalidInputError("dt must be in (0, 0.01] ns")
    if horizon < dt:
        raise InvalidInputError("horizon must be >= dt")

    n_steps = int(round(horizon / dt))
    time = dt * np.arange(n_steps + 1) + state.t
    m = _check_unit(state.m).copy()

    v_node_series = np.empty(n_steps + 1)
    i_series = np.empty(n_steps + 1)
    m_series = np.empty((n_steps + 1, 3))

    for k in range(n_steps + 1):
        t = time[k]
        r = mtj_resistance(m, params)
        v_gate = _gate_at(v_gate_waveform, k, t)
        v_node, i_dev = solve_node(r, v_gate, params)
        v_node_series[k] = v_node
        i_series[k] = i_dev
        m_series[k] = m
        if k == n_steps:
            break
        k1 = llgs_derivative(m, params, i_dev)
        k2 = llgs_derivative(_renorm(m + 0.5 * dt * k1), params, i_dev)
        k3 = llgs_derivative(_renorm(m + 0.5 * dt * k2), params, i_dev)
        k4 = llgs_derivative(_renorm(m + dt * k3), params, i_dev)
        m = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        m = m / np.linalg.norm(m)

    return MacrospinTrace(time=time, v_node=v_node_series, i_device=i_series, m=m_series, params=params)


def _renorm(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def measure_latency(
    params: MacrospinParams,
    v_gate: float,
    dt: float = 0.005,
    horizon: float = 15.0,
    tilt_deg: float = 1.0,
) -> Optional[float]:
    """Switching latency under a constant gate voltage, or None if no switch."""
    trace = integrate_macrospin(initial_state(params, tilt_deg), params, lambda t: v_gate, dt, horizon)
    crossings = trace.switching_times()
    return crossings[0] if crossings else None


def find_switching_threshold(
    params: MacrospinParams,
    v_lo: float = 0.0,
    v_hi: float = 3.0,
    horizon: float = 20.0,
    dt: float = 0.005,
    tol: float = 1e-3,
    tilt_deg: float = 1.0,
) -> float:
    """Gate voltage separating no-switch from switch within the horizon."""
    if measure_latency(params, v_hi, dt, horizon, tilt_deg) is None:
        raise NumericalFailureError("v_hi does not switch within the horizon")
    while v_hi - v_lo > tol:
        mid = 0.5 * (v_lo + v_hi)
        if measure_latency(params, mid, dt, horizon, tilt_deg) is None:
            v_lo = mid
        else:
            v_hi = mid
    return 0.5 * (v_lo + v_hi)


def fit_latency_law(
    drives: Sequence[float],
    latencies: Sequence[float],
) -> tuple[float, float, float, float]:
    """Least-squares fit of T(V) = floor + q / (V - vth).

    Returns (vth, q, floor, max relative residual).  Uses variable
    projection: for a trial vth the remaining parameters are linear.
    """
    v = np.asarray(drives, dtype=float)
    t = np.asarray(latencies, dtype=float)
    if v.size < 4:
        raise InsufficientDataError("need at least 4 points to fit the latency law")

    v_min = float(v.min())
    span = float(v.max() - v.min()) or 1.0

    def linear_fit(vth: float):
        x = 1.0 / (v - vth)
        a = np.column_stack([np.ones_like(x), x])
        coef, *_ = np.linalg.lstsq(a, t, rcond=None)
        resid = a @ coef - t
        return coef, float(np.sum(resid ** 2))

    def cost(u: float) -> float:
        # vth = v_min - exp(u) keeps the pole strictly below the grid
        _, ssq = linear_fit(v_min - math.exp(u))
        return ssq

    best = minimize_scalar(cost, bounds=(math.log(1e-9 * span), math.log(10.0 * span)),
                           method="bounded", options={"xatol": 1e-12})
    vth = v_min - math.exp(best.x)
    (floor, q), _ = linear_fit(vth)
    pred = floor + q / (v - vth)
    max_rel = float(np.max(np.abs(pred - t) / np.abs(t)))
    return vth, q, max(floor, 0.0), max_rel


@dataclass
class CalibrationResult:
    tlr_params: TlrParams
    max_rel_residual: float
    drives: list[float]
    latencies: list[float]


def calibrate_tlr(
    params: MacrospinParams,
    drive_grid: Sequence[float],
    dt: float = 0.005,
    horizon: float = 15.0,
    tilt_deg: float = 1.0,
) -> CalibrationResult:
    """Fit TLR latency-law parameters to measured macrospin switching latencies."""
    drives, lats = [], []
    for v in drive_grid:
        lat = measure_latency(params, v, dt, horizon, tilt_deg)
        if lat is not None:
            drives.append(float(v))
            lats.append(lat)
    if len(drives) < 4:
        raise InsufficientDataError(
            f"only {len(drives)} grid points switched; need at least 4"
        )
    vth, q, floor, max_rel = fit_latency_law(drives, lats)
    if vth <= 0:
        raise NumericalFailureError("fitted threshold is non-positive; widen the grid")
    tlr = TlrParams(i_threshold=vth, q_switch=q, latency_floor=floor)
    return CalibrationResult(tlr_params=tlr, max_rel_residual=max_rel,
                             drives=drives, latencies=lats)
