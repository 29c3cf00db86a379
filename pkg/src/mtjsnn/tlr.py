"""Phenomenological threshold-latency-refraction (TLR) neuron.

The neuron integrates the excess of its input drive over a firing threshold.
Once the integrated excess reaches ``q_switch`` the neuron emits a single
voltage spike (raised-cosine pulse) and enters an absolute refractory window
during which input is ignored entirely.  Response latency under constant
drive ``I`` follows ``latency_floor + q_switch / (I - i_threshold)``, which
diverges as the drive approaches threshold from above.

Drive is expressed in normalized drive-units (threshold is 1.0 by default),
time in nanoseconds, output voltage in volts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import InvalidInputError

IDLE = "idle"
SPIKING = "spiking"
REFRACTORY = "refractory"


@dataclass(frozen=True)
class TlrParams:
    """Neuron parameters.

    ``t_refractory`` may be set below ``spike_duration`` (including 0) to
    ablate refraction; in that mode a neuron can re-arm while its own pulse
    is still being emitted, which the normal regime forbids.
    """

    i_threshold: float = 1.0        # drive-units
    q_switch: float = 0.1           # drive-units * ns of integrated excess
    latency_floor: float = 0.3      # ns, minimum response delay at strong drive
    spike_amplitude: float = 1.0    # volts
    spike_duration: float = 1.2     # ns
    t_refractory: float = 5.0       # ns, measured from spike onset
    rel_refraction_beta: float = 0.0   # fractional threshold elevation, 0 = off
    rel_refraction_tau: float = 1.0    # ns, decay of the elevation

    def __post_init__(self):
        if not (self.i_threshold > 0 and math.isfinite(self.i_threshold)):
            raise InvalidInputError("i_threshold must be positive and finite")
        if not (self.q_switch > 0 and math.isfinite(self.q_switch)):
            raise InvalidInputError("q_switch must be positive and finite")
        if not (self.spike_duration > 0 and math.isfinite(self.spike_duration)):
            raise InvalidInputError("spike_duration must be positive and finite")
        if self.latency_floor < 0:
            raise InvalidInputError("latency_floor must be >= 0")
        if self.t_refractory < 0:
            raise InvalidInputError("t_refractory must be >= 0")
        if self.rel_refraction_beta < 0:
            raise InvalidInputError("rel_refraction_beta must be >= 0")
        if self.rel_refraction_tau <= 0:
            raise InvalidInputError("rel_refraction_tau must be > 0")

    @property
    def lockout(self) -> float:
        """Absolute lockout measured from spike onset."""
        return self.t_refractory


@dataclass(frozen=True)
class TlrState:
    accumulation: float = 0.0
    phase: str = IDLE
    last_spike_onset: Optional[float] = None


def spike_waveform(params: TlrParams, t_since_onset: float) -> float:
    """Raised-cosine output pulse; 0 outside [0, spike_duration]."""
    if t_since_onset < 0 or not math.isfinite(t_since_onset):
        raise InvalidInputError("t_since_onset must be >= 0 and finite")
    if t_since_onset > params.spike_duration:
        return 0.0
    x = t_since_onset / params.spike_duration
    return params.spike_amplitude * (1.0 - math.cos(2.0 * math.pi * x)) / 2.0


def _output_voltage(params: TlrParams, onset: Optional[float], t: float) -> float:
    if onset is None:
        return 0.0
    dt_on = t - onset
    if dt_on < 0 or dt_on > params.spike_duration:
        return 0.0
    return spike_waveform(params, dt_on)


def effective_threshold(params: TlrParams, t: float, last_onset: Optional[float]) -> float:
    """Firing threshold, elevated after a spike when relative refraction is on."""
    if last_onset is None or params.rel_refraction_beta == 0.0:
        return params.i_threshold
    elapsed = t - last_onset
    if elapsed < 0:
        return params.i_threshold
    boost = params.rel_refraction_beta * math.exp(-elapsed / params.rel_refraction_tau)
    return params.i_threshold * (1.0 + boost)


def tlr_step(
    state: TlrState,
    params: TlrParams,
    drive: float,
    t: float,
    dt: float,
) -> tuple[TlrState, float, Optional[float]]:
    """Advance the neuron from t to t+dt under a piecewise-constant drive.

    Returns the new state, the output voltage at t+dt, and the spike onset
    time if the threshold-crossing occurred during this step.  The onset is
    the linearly interpolated crossing time plus ``latency_floor``.
    """
    if not math.isfinite(drive):
        raise InvalidInputError("drive must be finite")
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidInputError("dt must be positive and finite")

    t_end = t + dt
    acc = state.accumulation
    phase = state.phase
    last = state.last_spike_onset
    onset_out: Optional[float] = None

    window_start = t
    if phase != IDLE:
        rearm = last + params.lockout
        if t_end < rearm:
            new_phase = SPIKING if t_end < last + params.spike_duration else REFRACTORY
            new_state = replace(state, phase=new_phase)
            return new_state, _output_voltage(params, last, t_end), None
        # lockout ends inside this step; integrate only the remainder
        window_start = rearm
        phase = IDLE

    width = t_end - window_start
    if width > 0:
        threshold = effective_threshold(params, window_start, last)
        excess = drive - threshold
        if excess > 0:
            new_acc = acc + excess * width
            if new_acc >= params.q_switch:
                t_cross = window_start + (params.q_switch - acc) / excess
                onset_out = t_cross + params.latency_floor
                last = onset_out
                acc = 0.0
                phase = SPIKING
            else:
                acc = new_acc

    new_state = TlrState(accumulation=acc, phase=phase, last_spike_onset=last)
    return new_state, _output_voltage(params, last, t_end), onset_out


def constant_drive_latency(params: TlrParams, drive: float) -> Optional[float]:
    """Closed-form spike latency under constant drive; None below/at threshold."""
    if not math.isfinite(drive):
        raise InvalidInputError("drive must be finite")
    if drive <= params.i_threshold:
        return None
    return params.latency_floor + params.q_switch / (drive - params.i_threshold)


@dataclass
class TlrRun:
    """Result of a full-horizon TLR simulation on a fixed grid."""

    time: np.ndarray          # grid points, ns
    v_out: np.ndarray         # output voltage at grid points
    accumulation: np.ndarray  # integrated excess at grid points
    onsets: list[float]       # spike onset times, ns


def run_tlr(params: TlrParams, drive: np.ndarray, dt: float, t0: float = 0.0) -> TlrRun:
    """Vectorized equivalent of repeatedly calling :func:`tlr_step`.

    ``drive`` holds grid-point samples; step k applies ``drive[k]`` over
    ``[t_k, t_k + dt]``, so the last sample is unused for integration.
    Must agree with the step-by-step path to floating-point noise.
    """
    drive = np.asarray(drive, dtype=float)
    if drive.ndim != 1 or drive.size < 2:
        raise InvalidInputError("drive must be a 1-D array of at least 2 samples")
    if not np.all(np.isfinite(drive)):
        raise InvalidInputError("drive must be finite")
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidInputError("dt must be positive and finite")

    n_steps = drive.size - 1
    time = t0 + dt * np.arange(drive.size)
    acc_series = np.zeros(drive.size)
    onsets: list[float] = []

    i = 0
    acc = 0.0
    last: Optional[float] = None
    window_start0 = t0

    while i < n_steps:
        seg = drive[i:n_steps]
        starts = t0 + dt * np.arange(i, n_steps)
        starts[0] = window_start0
        widths = np.full(seg.size, dt)
        widths[0] = (t0 + (i + 1) * dt) - window_start0

        if last is not None and params.rel_refraction_beta > 0.0:
            boost = params.rel_refraction_beta * np.exp(
                -(starts - last) / params.rel_refraction_tau
            )
            threshold = params.i_threshold * (1.0 + boost)
        else:
            threshold = params.i_threshold

        excess = np.maximum(seg - threshold, 0.0)
        cum = acc + np.cumsum(excess * widths)
        acc_series[i + 1 : n_steps + 1] = cum

        hit = np.nonzero(cum >= params.q_switch)[0]
        if hit.size == 0:
            break
        k = int(hit[0])
        acc_before = acc if k == 0 else cum[k - 1]
        t_cross = starts[k] + (params.q_switch - acc_before) / excess[k]
        onset = t_cross + params.latency_floor
        onsets.append(onset)
        last = onset

        rearm = onset + params.lockout
        j = int(math.floor((rearm - t0) / dt))
        end = min(j, n_steps)
        acc_series[i + k + 1 : end + 1] = 0.0
        if j >= n_steps:
            acc_series[i + k + 1 :] = 0.0
            i = n_steps
            break
        acc = 0.0
        i = j
        window_start0 = max(rearm, t0 + j * dt)

    v = np.zeros(drive.size)
    for onset in onsets:
        mask = (time >= onset) & (time <= onset + params.spike_duration)
        x = (time[mask] - onset) / params.spike_duration
        v[mask] = params.spike_amplitude * (1.0 - np.cos(2.0 * np.pi * x)) / 2.0

    return TlrRun(time=time, v_out=v, accumulation=acc_series, onsets=onsets)


def source_waveform(
    time: np.ndarray,
    spike_times: list[float],
    amplitude: float,
    duration: float,
) -> np.ndarray:
    """Voltage trace of a source emitting the standard pulse at given onsets."""
    v = np.zeros_like(time, dtype=float)
    for onset in spike_times:
        mask = (time >= onset) & (time <= onset + duration)
        x = (time[mask] - onset) / duration
        v[mask] += amplitude * (1.0 - np.cos(2.0 * np.pi * x)) / 2.0
    return v
