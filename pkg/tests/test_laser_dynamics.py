import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from oisl_radar.errors import CalibrationError, NoPeakError, OutOfSpanError, StepTooLargeError
from oisl_radar.laser_dynamics import (
    CalibrationMap,
    DriveModulator,
    FeedbackLoop,
    FieldSeries,
    InjectionDrive,
    LaserParams,
    SimGrid,
    calibrate_p1_map,
    detect_p1_frequency,
    find_p1_onset,
    integrate_injected_laser,
    synth_p1_field_fast,
)

P = LaserParams()
DET = -4e9


def _oracle_rhs(t, y, p, xi, om):
    a = y[0] + 1j * y[1]
    n = y[2]
    inten = abs(a) ** 2
    g = (p.gamma_c * p.gamma_n / (p.gamma_s * p.pump_j)) * n - p.gamma_p * (inten - 1)
    da = 0.5 * g * (1 - 1j * p.alpha_lw) * a - 1j * om * a + xi * p.gamma_c
    dn = (-(p.gamma_s + p.gamma_n * inten) * n - p.gamma_s * p.pump_j * (inten - 1)
          + p.gamma_s * p.gamma_p * p.pump_j / p.gamma_c * inten * (inten - 1))
    return [da.real, da.imag, dn]


def _rk4_error(dt):
    fld = integrate_injected_laser(P, InjectionDrive.constant(DET, 0.1), None, SimGrid(dt=dt, duration=2e-9))
    t = fld.times
    k = int(round(1e-11 / dt))
    sol = solve_ivp(_oracle_rhs, (0, t[-1]), [1.0, 0.0, 0.0], args=(P, 0.1, 2 * math.pi * DET),
                    t_eval=t[::k], rtol=1e-11, atol=1e-13, method="DOP853")
    return np.max(np.abs(fld.samples[::k] - (sol.y[0] + 1j * sol.y[1])))


def test_rk4_converges_to_adaptive_solver_at_fourth_order():
    e1, e2, e3 = _rk4_error(1e-12), _rk4_error(0.5e-12), _rk4_error(0.25e-12)
    assert e1 < 5e-3
    assert e3 < 2e-5
    assert 10 < e1 / e2 < 25 and 10 < e2 / e3 < 25


def test_free_running_fixed_point():
    grid = SimGrid(duration=10e-9)
    fld = integrate_injected_laser(P, InjectionDrive.constant(DET, 0.0), None, grid)
    i = fld.window(P.transient, grid.duration).intensity
    assert i.var() < 1e-6 * i.mean() ** 2


def test_zero_injection_has_no_p1_tone():
    fld = integrate_injected_laser(P, InjectionDrive.constant(DET, 0.0), None, SimGrid(duration=30e-9))
    with pytest.raises(NoPeakError):
        detect_p1_frequency(fld, (10e-9, 30e-9))


def test_determinism_bit_identical():
    grid = SimGrid(duration=3e-9, seed=7)
    d = InjectionDrive.constant(DET, 0.1)
    a = integrate_injected_laser(P, d, None, grid, noise_linewidth=1e6)
    b = integrate_injected_laser(P, d, None, grid, noise_linewidth=1e6)
    assert np.array_equal(a.samples, b.samples)


def test_step_too_large_rejected():
    with pytest.raises(StepTooLargeError):
        integrate_injected_laser(P, InjectionDrive.constant(DET, 0.1), None, SimGrid(dt=5e-12, duration=1e-9))


def test_feedback_silent_before_first_delay():
    """Delayed samples before t = 0 are zero, so the first tau equals the open loop."""
    grid = SimGrid(duration=3e-9)
    d = InjectionDrive.constant(DET, 0.1)
    tau = 1e-9
    open_ = integrate_injected_laser(P, d, None, grid)
    closed = integrate_injected_laser(P, d, FeedbackLoop(tau, 0.5, True), grid)
    k = int(round(tau / grid.dt))
    assert np.array_equal(open_.samples[:k + 1], closed.samples[:k + 1])
    assert not np.array_equal(open_.samples, closed.samples)


def test_two_tone_field_detected():
    rate = 200e9
    t = np.arange(int(40e-9 * rate)) / rate
    fld = FieldSeries(1 + 0.5 * np.exp(2j * np.pi * 16.5e9 * t), rate, 193e12)
    n = t.size - int(2e-9 * rate)
    nfft = 4 * (1 << int(math.ceil(math.log2(n))))
    assert abs(detect_p1_frequency(fld) - 16.5e9) < rate / nfft


def test_p1_frequency_increases_with_injection():
    g = SimGrid(duration=30e-9)
    fa = detect_p1_frequency(integrate_injected_laser(P, InjectionDrive.constant(DET, 0.08), None, g), (10e-9, 30e-9))
    fb = detect_p1_frequency(integrate_injected_laser(P, InjectionDrive.constant(DET, 0.12), None, g), (10e-9, 30e-9))
    assert fa < fb


def test_onset_sweep_finds_oscillation():
    on = find_p1_onset(P, DET, SimGrid(duration=30e-9), xi_stop=0.02, step=0.002)
    assert on.onset is not None
    assert on.onset > 0
    assert np.all(on.oscillating[on.xi >= on.onset][:3])


def test_calibration_map_properties(ku_map):
    assert np.all(np.diff(ku_map.f0) > 0)
    lo, hi = ku_map.f_span
    assert lo <= 15e9 and hi >= 18e9
    # the hardware curve is not linear: deviation from the secant exceeds 1% of span
    assert ku_map.secant_deviation() > 0.01


def test_calibrated_operating_point(ku_map):
    xs = float(ku_map.inverse(16.5e9))
    fld = integrate_injected_laser(P, InjectionDrive.constant(DET, xs), None, SimGrid(duration=30e-9))
    assert abs(detect_p1_frequency(fld, (10e-9, 30e-9)) - 16.5e9) < 0.1e9


def test_dt_halving_changes_f0_less_than_half_percent(ku_map):
    xs = float(ku_map.inverse(16.5e9))
    d = InjectionDrive.constant(DET, xs)
    f1 = detect_p1_frequency(integrate_injected_laser(P, d, None, SimGrid(dt=1e-12, duration=30e-9)), (10e-9, 30e-9))
    f2 = detect_p1_frequency(integrate_injected_laser(P, d, None, SimGrid(dt=0.5e-12, duration=30e-9)), (10e-9, 30e-9))
    assert abs(f1 - f2) / f1 < 0.005


def test_fast_path_agrees_with_ode_between_knots(ku_map):
    xi = 0.5 * (ku_map.index[8] + ku_map.index[9])
    f_ode = detect_p1_frequency(
        integrate_injected_laser(P, InjectionDrive.constant(DET, xi), None, SimGrid(duration=30e-9)), (10e-9, 30e-9))
    fast = synth_p1_field_fast(ku_map, InjectionDrive.constant(DET, xi), 0.0, None, SimGrid(dt=1e-11, duration=30e-9))
    f_fast = detect_p1_frequency(fast, (10e-9, 30e-9))
    assert abs(f_ode - f_fast) <= ku_map.local_spacing(xi)


def test_fast_path_pure_tone_recovered_exactly(ku_map):
    xi = 0.1
    grid = SimGrid(dt=1e-11, duration=40e-9)
    fld = synth_p1_field_fast(ku_map, InjectionDrive.constant(DET, xi), 0.0, None, grid)
    f = detect_p1_frequency(fld, (0.0, 40e-9))
    assert abs(f - float(ku_map.f0_at(xi))) < 1e6


def test_fast_path_rejects_out_of_span_and_negative_linewidth(ku_map):
    grid = SimGrid(dt=1e-11, duration=1e-9)
    with pytest.raises(OutOfSpanError):
        synth_p1_field_fast(ku_map, InjectionDrive.constant(DET, 0.3), 0.0, None, grid)
    with pytest.raises(ValueError):
        synth_p1_field_fast(ku_map, InjectionDrive.constant(DET, 0.1), -1.0, None, grid)


def test_fast_path_deterministic(ku_map):
    grid = SimGrid(dt=1 / 72e9, duration=2e-6, seed=3)
    d = InjectionDrive.constant(DET, 0.1)
    a = synth_p1_field_fast(ku_map, d, 100e3, FeedbackLoop(593e-9, 1.0, True), grid)
    b = synth_p1_field_fast(ku_map, d, 100e3, FeedbackLoop(593e-9, 1.0, True), grid)
    assert np.array_equal(a.samples, b.samples)


def test_fewer_than_four_points_rejected():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(CalibrationError):
            calibrate_p1_map(P, DET, [0.08, 0.1, 0.12], SimGrid(duration=30e-9))


def test_non_monotone_map_rejected_with_index():
    with pytest.raises(CalibrationError) as exc:
        CalibrationMap(np.array([0.1, 0.2, 0.3, 0.4]), np.array([1e9, 2e9, 1.5e9, 3e9]), DET)
    assert exc.value.details["index"] == 2


def test_map_csv_roundtrip(tmp_path, ku_map):
    path = ku_map.to_csv(tmp_path / "calibration.csv")
    assert path.read_text().splitlines()[0] == "xi,f0_hz"
    back = CalibrationMap.from_csv(path)
    assert np.array_equal(back.index, ku_map.index)
    assert np.array_equal(back.f0, ku_map.f0)
    assert back.params.fingerprint() == P.fingerprint()


def test_voltage_indexed_map_roundtrip(tmp_path):
    mod = DriveModulator(0.25, 4.0, 0.0)
    xi = np.array([0.08, 0.1, 0.12, 0.14])
    v = -(2 * 4.0 / math.pi) * np.arccos(xi / 0.25)
    m = CalibrationMap(v, np.array([13e9, 15e9, 17e9, 19e9]), DET, P, "volts", mod)
    assert np.allclose(m.f0_at_xi(xi), m.f0)
    path = m.to_csv(tmp_path / "cal.csv")
    assert path.read_text().startswith("v_volts,f0_hz")
    assert np.array_equal(CalibrationMap.from_csv(path).index, m.index)


@given(st.floats(0.0, 1.0))
def test_interpolated_f0_between_knots(u):
    idx = np.array([0.06, 0.08, 0.1, 0.12, 0.14])
    f0 = np.array([11e9, 13.5e9, 15e9, 16e9, 18.5e9])
    m = CalibrationMap(idx, f0, DET)
    k = 2
    x = idx[k] + u * (idx[k + 1] - idx[k])
    f = float(m.f0_at(x))
    assert f0[k] - 1e-3 <= f <= f0[k + 1] + 1e-3


@given(st.floats(11e9, 18.5e9))
def test_inverse_roundtrip(f):
    m = CalibrationMap(np.array([0.06, 0.08, 0.1, 0.12, 0.14]), np.array([11e9, 13.5e9, 15e9, 16e9, 18.5e9]), DET)
    assert abs(float(m.f0_at(m.inverse(f))) - f) < 1.0


def test_feedback_gain_bounds():
    with pytest.raises(ValueError):
        FeedbackLoop(1e-9, 1.5, True)
    with pytest.raises(ValueError):
        FeedbackLoop(0.0, 0.5, True)
