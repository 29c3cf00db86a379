"""Macrospin backend: LLGS field properties, circuit solve, calibration."""

import math

import numpy as np
import pytest

from mtjsnn.errors import InsufficientDataError, InvalidInputError, InvalidStateError
from mtjsnn.macrospin import (
    MacrospinParams,
    calibrate_tlr,
    find_switching_threshold,
    fit_latency_law,
    initial_state,
    integrate_macrospin,
    llgs_derivative,
    measure_latency,
    mtj_resistance,
    nmos_current,
    solve_node,
)
from mtjsnn.tlr import constant_drive_latency

PARAMS = MacrospinParams()


def random_unit_vectors(n, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class TestLlgsDerivative:
    def test_equilibria_exact(self):
        e = PARAMS.easy_axis
        assert np.all(llgs_derivative(e, PARAMS, 0.0) == 0.0)
        assert np.all(llgs_derivative(-e, PARAMS, 0.0) == 0.0)

    def test_orthogonal_to_m(self):
        for m in random_unit_vectors(50):
            for i in (0.0, 0.1, -0.2):
                dm = llgs_derivative(m, PARAMS, i)
                assert abs(float(np.dot(m, dm))) <= 1e-12

    def test_non_unit_rejected(self):
        with pytest.raises(InvalidStateError):
            llgs_derivative(np.array([1.0, 1.0, 0.0]), PARAMS, 0.0)


class TestResistance:
    def test_endpoints_and_midpoint(self):
        e = PARAMS.easy_axis
        perp = np.array([0.0, 1.0, 0.0])
        assert mtj_resistance(e, PARAMS) == pytest.approx(PARAMS.r_parallel)
        assert mtj_resistance(-e, PARAMS) == pytest.approx(PARAMS.r_antiparallel)
        mid = 0.5 * (PARAMS.r_parallel + PARAMS.r_antiparallel)
        assert mtj_resistance(perp, PARAMS) == pytest.approx(mid)


class TestNmos:
    def test_cutoff(self):
        assert nmos_current(PARAMS.transistor_vt, 0.5, PARAMS) == 0.0
        assert nmos_current(0.0, 0.5, PARAMS) == 0.0

    def test_saturation_formula(self):
        v_gate = PARAMS.transistor_vt + 1.0
        expected = 0.5 * PARAMS.transistor_k * 1.0
        assert nmos_current(v_gate, 5.0, PARAMS) == pytest.approx(expected)

    def test_monotone_in_gate(self):
        gates = np.linspace(0.0, 2.5, 40)
        currents = [nmos_current(g, 0.6, PARAMS) for g in gates]
        assert all(b >= a for a, b in zip(currents, currents[1:]))

    def test_continuous_at_triode_boundary(self):
        v_gate = PARAMS.transistor_vt + 0.8
        v_ov = 0.8
        below = nmos_current(v_gate, v_ov - 1e-9, PARAMS)
        above = nmos_current(v_gate, v_ov + 1e-9, PARAMS)
        assert below == pytest.approx(above, abs=1e-6)


class TestCircuitSolve:
    def test_zero_gate_full_rail(self):
        v_node, i = solve_node(3.0, 0.0, PARAMS)
        assert v_node == pytest.approx(PARAMS.v_dd, abs=1e-8)
        assert i == pytest.approx(0.0, abs=1e-8)

    def test_self_consistency(self):
        v_node, i = solve_node(3.0, 1.2, PARAMS)
        assert v_node == pytest.approx(PARAMS.v_dd - i * 3.0, abs=1e-6)
        assert i == pytest.approx(nmos_current(1.2, v_node, PARAMS), abs=1e-6)


class TestIntegration:
    def test_zero_gate_is_quiescent(self):
        state = initial_state(PARAMS, tilt_deg=0.0)  # exact -e, fixed point
        trace = integrate_macrospin(state, PARAMS, lambda t: 0.0, 0.005, 1.0)
        assert np.allclose(trace.v_node, PARAMS.v_dd, atol=1e-8)
        assert np.allclose(trace.m, trace.m[0], atol=1e-12)

    def test_norm_drift_per_step(self):
        # single RK4 update before renormalization, dt = 1 ps
        dt = 0.001
        m = initial_state(PARAMS).m
        i_dev = 0.3
        k1 = llgs_derivative(m, PARAMS, i_dev)
        k2 = llgs_derivative((m + 0.5 * dt * k1) / np.linalg.norm(m + 0.5 * dt * k1), PARAMS, i_dev)
        k3 = llgs_derivative((m + 0.5 * dt * k2) / np.linalg.norm(m + 0.5 * dt * k2), PARAMS, i_dev)
        k4 = llgs_derivative((m + dt * k3) / np.linalg.norm(m + dt * k3), PARAMS, i_dev)
        m_next = m + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        assert abs(np.linalg.norm(m_next) - 1.0) < 1e-8

    def test_suprathreshold_switches_once(self):
        trace = integrate_macrospin(initial_state(PARAMS), PARAMS, lambda t: 1.5, 0.005, 15.0)
        times = trace.switching_times()
        assert len(times) == 1
        align = trace.alignment()
        assert align[0] < -0.9 and align[-1] > 0.9

    def test_switching_produces_voltage_transient(self):
        trace = integrate_macrospin(initial_state(PARAMS), PARAMS, lambda t: 1.5, 0.005, 15.0)
        # AP and P states load the transistor differently, so the node moves
        assert trace.v_node.max() - trace.v_node.min() > 0.01

    def test_latency_decreasing_in_gate_voltage(self):
        gates = (0.85, 1.0, 1.2, 1.5, 2.0)
        lats = [measure_latency(PARAMS, g) for g in gates]
        assert all(l is not None for l in lats)
        assert all(a > b for a, b in zip(lats, lats[1:]))

    def test_bad_dt_rejected(self):
        with pytest.raises(InvalidInputError):
            integrate_macrospin(initial_state(PARAMS), PARAMS, lambda t: 0.0, 0.05, 1.0)


class TestThresholdExistence:
    def test_bisected_threshold_separates_regimes(self):
        vth = find_switching_threshold(PARAMS, tol=5e-3)
        assert measure_latency(PARAMS, vth - 0.05, horizon=20.0) is None
        assert measure_latency(PARAMS, vth + 0.05, horizon=20.0) is not None


class TestRefractionEmerges:
    def test_second_pulse_during_ringdown_ignored(self):
        # a pulse long enough to switch, then an identical pulse right after
        def single(t):
            return 1.5 if t < 3.0 else 0.0

        def double(t):
            return 1.5 if (t < 3.0 or 3.2 <= t < 6.2) else 0.0

        t1 = integrate_macrospin(initial_state(PARAMS), PARAMS, single, 0.005, 12.0)
        t2 = integrate_macrospin(initial_state(PARAMS), PARAMS, double, 0.005, 12.0)
        assert len(t1.switching_times()) == 1
        # the repeated pulse cannot switch back: same torque sign, same state
        assert len(t2.switching_times()) == 1


class TestCalibration:
    def test_exact_recovery_from_synthetic_law(self):
        vth, q, floor = 0.55, 0.4, 0.6
        drives = [0.8, 1.0, 1.3, 1.7, 2.2]
        lats = [floor + q / (v - vth) for v in drives]
        fvth, fq, ffloor, resid = fit_latency_law(drives, lats)
        assert fvth == pytest.approx(vth, abs=1e-6)
        assert fq == pytest.approx(q, abs=1e-6)
        assert ffloor == pytest.approx(floor, abs=1e-6)
        assert resid < 1e-6

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            fit_latency_law([1.0, 2.0, 3.0], [1.0, 0.5, 0.3])

    def test_all_subthreshold_grid(self):
        with pytest.raises(InsufficientDataError):
            calibrate_tlr(PARAMS, [0.1, 0.2, 0.3, 0.35])

    def test_defaults_fit_within_budget(self):
        from mtjsnn.defaults import CALIBRATION_GRID
        cal = calibrate_tlr(PARAMS, CALIBRATION_GRID)
        assert cal.max_rel_residual <= 0.15
        for v, lat in zip(cal.drives, cal.latencies):
            pred = constant_drive_latency(cal.tlr_params, v)
            assert pred is not None
            assert abs(pred - lat) / lat <= 0.15
