import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oisl_radar.dechirp_receiver import DechirpedSignal, ModulatorParams, dechirp_baseband
from oisl_radar.errors import (
    DegenerateWindowError,
    NonUniformGridError,
    SpacingBelowResolutionError,
    TooShortSignalError,
)
from oisl_radar.io_formats import read_pgm16
from oisl_radar.radar_dsp import (
    C,
    RangeMigrationWarning,
    beat_to_range,
    comb_contrast,
    cross_range_resolution,
    extract_peaks,
    find_blobs,
    fit_dual_chirp,
    instantaneous_frequency,
    isar_image,
    phase_deviation,
    range_profile,
    range_resolution,
    range_to_beat,
    stft_spectrogram,
    windowed_fft,
)
from oisl_radar.scene_channel import Scatterer, Scene, echo_delays, ChannelParams, preset_scene
from oisl_radar.waveform_synth import ChirpSpec, Waveform, default_fast_rate, generate_tx_waveform, ideal_dual_chirp

from conftest import ideal_chain

KU = ChirpSpec(16.5e9, 3e9, 593e-9)
ISAR = ChirpSpec(15e9, 4e9, 2.65e-6)
ADC = 500e6


def _tone_signal(freqs, spec=KU, rate=ADC, periods=1, amps=None):
    t = np.arange(int(round(periods * spec.period * rate))) / rate
    amps = amps or [1.0] * len(freqs)
    x = sum(a * np.cos(2 * np.pi * f * t + 0.3 * k) for k, (a, f) in enumerate(zip(amps, freqs)))
    return DechirpedSignal(x, rate, spec)


# ------------------------------------------------------------ range profiles


def test_tone_maps_to_paper_range():
    assert beat_to_range(43.88e6, KU) == pytest.approx(0.6505, abs=5e-4)
    p = range_profile(_tone_signal([float(range_to_beat(0.6505, KU))]))
    top = extract_peaks(p)[0]
    assert top.range == pytest.approx(0.6505, abs=0.5 * (p.ranges[1] - p.ranges[0]))


def test_zero_signal_gives_zero_profile():
    p = range_profile(DechirpedSignal(np.zeros(int(KU.period * ADC)), ADC, KU))
    assert np.all(p.amplitudes == 0)
    assert len(extract_peaks(p)) == 0


def test_profile_axis_law_is_exact():
    p = range_profile(_tone_signal([40e6]), n_fft=4096)
    assert np.array_equal(p.ranges, C * KU.period * p.delta_f_axis / (4 * KU.bandwidth))
    assert p.resolution == C / (4 * KU.bandwidth)
    assert np.all(np.diff(p.ranges) > 0)
    assert p.amplitudes.max() == 1.0


def test_tones_one_over_t_apart_give_two_maxima():
    """Two beats 1/T apart should produce two maxima c/(4B) apart."""
    f1 = 40e6
    p = range_profile(_tone_signal([f1, f1 + 1 / KU.period]), window="full")
    peaks = extract_peaks(p)
    assert len(peaks) >= 2
    assert abs(peaks[0].range - peaks[1].range) == pytest.approx(range_resolution(KU.bandwidth), rel=0.2)


def test_single_tone_single_peak_within_half_bin():
    f = 31.7e6
    p = range_profile(_tone_signal([f]))
    peaks = extract_peaks(p)
    assert len(peaks) == 1
    assert peaks[0].range == pytest.approx(beat_to_range(f, KU), abs=0.5 * (p.ranges[1] - p.ranges[0]))


def test_dual_target_separation():
    p = range_profile(ideal_chain(KU.snapped(), [0.35, 0.60]))
    peaks = [q for q in extract_peaks(p) if q.range >= 0.1][:2]
    assert abs(peaks[0].range - peaks[1].range) == pytest.approx(0.25, abs=0.005)


@given(st.floats(1e-3, 1e3))
def test_peak_ranges_invariant_to_scaling(a):
    sig = _tone_signal([20e6, 55e6], amps=[1.0, 0.4])
    p1 = extract_peaks(range_profile(sig))
    p2 = extract_peaks(range_profile(DechirpedSignal(a * sig.samples, sig.rate, sig.chirp)))
    assert np.allclose(p1.ranges, p2.ranges, rtol=0, atol=1e-12)


def test_peaks_sorted_and_capped():
    sig = _tone_signal([15e6, 30e6, 45e6, 60e6], amps=[0.3, 1.0, 0.6, 0.8])
    peaks = extract_peaks(range_profile(sig), max_peaks=3)
    amps = [q.amplitude for q in peaks]
    assert len(peaks) == 3 and amps == sorted(amps, reverse=True)


def test_closely_spaced_targets_unresolved():
    spec = KU.snapped()
    l_res = range_resolution(spec.bandwidth)
    p = range_profile(ideal_chain(spec, [0.6, 0.6 + 0.5 * l_res]))
    near = [q for q in extract_peaks(p) if abs(q.range - 0.6) < 3 * l_res]
    assert len(near) == 1


def test_profile_too_short_and_bad_fft():
    with pytest.raises(TooShortSignalError):
        range_profile(DechirpedSignal(np.ones(10), ADC, KU))
    with pytest.raises(ValueError):
        range_profile(_tone_signal([40e6]), n_fft=16)


def test_parseval_for_windowed_fft():
    x = np.random.default_rng(2).standard_normal(1000)
    X = windowed_fft(x)
    assert np.sum(np.abs(X) ** 2) / x.size == pytest.approx(np.sum((x * np.hanning(x.size)) ** 2), rel=1e-9)


def test_profile_and_peaks_csv(tmp_path):
    p = range_profile(_tone_signal([40e6]), n_fft=512)
    lines = p.to_csv(tmp_path / "profile.csv").read_text().splitlines()
    assert lines[0] == "range_m,delta_f_hz,amplitude" and len(lines) == 1 + 257
    assert extract_peaks(p).to_csv(tmp_path / "peaks.csv").read_text().startswith("range_m,amplitude")


# ---------------------------------------------------------- time-frequency


def test_stft_constant_tone_ridge():
    rate = 80e9
    t = np.arange(20000) / rate
    sg = stft_spectrogram(Waveform(np.cos(2 * np.pi * 16.5e9 * t), rate), 256, 64, 2048)
    assert np.all(np.abs(sg.ridge() - 16.5e9) < sg.freqs[1] - sg.freqs[0])
    assert np.all(np.diff(sg.times) > 0) and np.all(np.diff(sg.freqs) > 0)


def test_stft_chirp_ridge_is_triangle_with_period_and_slope():
    spec = KU
    rate = 72e9
    w = ideal_dual_chirp(spec, rate, 3 * spec.period)
    sg = stft_spectrogram(w, 512, 128, 4096)
    ridge = sg.ridge()
    bin_hz = sg.freqs[1] - sg.freqs[0]
    inner = slice(4, -4)
    assert ridge[inner].min() >= spec.f_low - 2 * bin_hz and ridge[inner].max() <= spec.f_high + 2 * bin_hz
    fit = fit_dual_chirp(sg.times, ridge, period=spec.period)
    assert fit.period == pytest.approx(spec.period, rel=0.01)
    assert fit.slope_up == pytest.approx(spec.slope, rel=0.02)
    assert -fit.slope_down == pytest.approx(spec.slope, rel=0.02)


def test_stft_rejects_degenerate_window():
    w = Waveform(np.zeros(100), 1.0)
    with pytest.raises(DegenerateWindowError):
        stft_spectrogram(w, 200, 10)
    with pytest.raises(DegenerateWindowError):
        stft_spectrogram(w, 50, 0)


def test_if_of_tone_is_constant():
    rate = 80e9
    n = 8000
    t = np.arange(n) / rate
    f = instantaneous_frequency(Waveform(np.cos(2 * np.pi * 16.5e9 * t), rate))
    assert np.max(np.abs(f[50:-50] - 16.5e9)) < rate / n


def test_if_of_ideal_chirp_slope_within_one_percent():
    w = ideal_dual_chirp(KU, 72e9, 3 * KU.period)
    fit = fit_dual_chirp(w.times, instantaneous_frequency(w), KU)
    assert fit.slope_up == pytest.approx(KU.slope, rel=0.01)
    assert -fit.slope_down == pytest.approx(KU.slope, rel=0.01)
    assert fit.bandwidth == pytest.approx(KU.bandwidth, rel=0.01)


def test_if_and_stft_agree_on_ideal_chirp():
    rate = 72e9
    w = ideal_dual_chirp(KU, rate, 2 * KU.period)
    sg = stft_spectrogram(w, 512, 256, 512)
    f_if = instantaneous_frequency(w)
    idx = np.round((sg.times - w.t0) * rate).astype(int)
    # away from the turning points the IF and the ridge agree within one STFT bin
    f_nom = KU.instantaneous_frequency(sg.times)
    inner = (f_nom > KU.f_low + 0.2e9) & (f_nom < KU.f_high - 0.2e9)
    assert np.all(np.abs(sg.ridge()[inner] - f_if[idx][inner]) <= sg.freqs[1] - sg.freqs[0])


@pytest.mark.parametrize("period", [1.1e-6, 1.5e-6, 2.65e-6])
def test_if_period_of_generated_chirp(ku_map, period):
    spec = ChirpSpec(15.5e9, 4e9, period).snapped()
    w = generate_tx_waveform(spec, ku_map, "fast", n_periods=3, rate=default_fast_rate(spec, 4.0, ADC))
    fit = fit_dual_chirp(w.times, instantaneous_frequency(w), spec)
    assert fit.period == pytest.approx(period, rel=0.01)


# ------------------------------------------------------------ FDML metrics


def test_phase_deviation_of_ideal_is_zero():
    w = ideal_dual_chirp(KU, 72e9, 4 * KU.period)
    _, dphi = phase_deviation(w, KU)
    assert np.max(np.abs(dphi)) < 1e-3


def test_phase_deviation_of_offset_chirp_is_ramp():
    rate = 72e9
    df = 2e6
    t = np.arange(int(4 * KU.period * rate)) / rate
    w = Waveform(math.sqrt(2) * np.cos(KU.phase(t) + 2 * np.pi * df * t), rate)
    times, dphi = phase_deviation(w, KU)
    slope = np.polyfit(times, dphi, 1)[0]
    assert slope == pytest.approx(2 * np.pi * df, rel=0.02)


def test_phase_deviation_needs_one_period():
    with pytest.raises(TooShortSignalError):
        phase_deviation(ideal_dual_chirp(KU, 72e9, 0.5 * KU.period), KU)


def test_comb_contrast_of_periodic_waveform():
    spec = KU.snapped()
    w = ideal_dual_chirp(spec, default_fast_rate(spec, 4.0, ADC), 40 * spec.period)
    assert comb_contrast(w, 1 / spec.period) >= 60


def test_comb_contrast_of_white_noise():
    x = np.random.default_rng(4).standard_normal(400_000)
    w = Waveform(x, 72e9)
    assert comb_contrast(w, 72e9 / 400_000 * 40, band=(1e9, 30e9)) <= 3


def test_comb_contrast_spacing_check():
    w = Waveform(np.random.default_rng(1).standard_normal(1000), 1e6)
    with pytest.raises(SpacingBelowResolutionError):
        comb_contrast(w, 1e4)


# -------------------------------------------------------------------- ISAR


def _isar_pulses(scene, spec=ISAR, rate=100e6, n_pulses=1200, theta=0.4995):
    """Baseband pulses for a turntable scene rotated by ``theta`` over the aperture."""
    T = spec.period
    scene = Scene(scene.scatterers, scene.platform_distance, theta / (n_pulses * T))
    times = (np.arange(n_pulses) - (n_pulses - 1) / 2) * T
    d = np.array([echo_delays(scene, t, ChannelParams())[0] for t in times])
    a = np.array([s.reflectivity for s in scene.scatterers])
    return dechirp_baseband(spec, d, a, ModulatorParams(), rate), times


def test_center_scatterer_at_zero_cross_range():
    pulses, times = _isar_pulses(preset_scene("center"))
    img = isar_image(pulses, ISAR, 0.4995, rate=100e6, pulse_times=times, blank_dc=False,
                     range_limits=(0.9, 1.4))
    r, c = np.unravel_index(np.argmax(img.pixels), img.pixels.shape)
    dx = img.cross_axis[1] - img.cross_axis[0]
    assert abs(img.cross_axis[c]) <= dx
    assert img.range_axis[r] == pytest.approx(1.15, abs=range_resolution(ISAR.bandwidth))


def test_two_cross_range_scatterers_separated():
    pulses, times = _isar_pulses(preset_scene("two_cross"))
    img = isar_image(pulses, ISAR, 0.4995, rate=100e6, pulse_times=times, blank_dc=False,
                     range_limits=(0.9, 1.4))
    blobs = find_blobs(img, -10)
    assert len(blobs) >= 2
    sep = abs(blobs[0].cross - blobs[1].cross)
    assert sep == pytest.approx(0.30, abs=img.c_res)


def test_cross_range_resolution_values():
    assert cross_range_resolution(0.5, 15e9) == pytest.approx(0.0200, abs=5e-5)
    assert range_resolution(4e9) == pytest.approx(0.01874, abs=1e-5)


def test_isar_axis_laws_and_metadata(tmp_path):
    pulses, times = _isar_pulses(preset_scene("center"), n_pulses=64)
    img = isar_image(pulses, ISAR, 0.3, rate=100e6, pulse_times=times)
    assert img.c_res == C / (2 * 0.3 * ISAR.f_center)
    assert img.l_res == C / (4 * ISAR.bandwidth)
    assert np.all(np.diff(img.range_axis) > 0) and np.all(np.diff(img.cross_axis) > 0)
    path = img.to_pgm(tmp_path / "isar.pgm")
    back = read_pgm16(path)
    assert back.shape == img.pixels.shape
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta["c_res_m"] == img.c_res and meta["theta_rad"] == 0.3


def test_isar_blanks_zero_doppler_by_default():
    pulses, times = _isar_pulses(preset_scene("center"), n_pulses=64)
    img = isar_image(pulses, ISAR, 0.3, rate=100e6, pulse_times=times)
    zero = np.flatnonzero(np.isclose(img.cross_axis, 0.0))
    assert np.all(img.pixels[:, zero] == 0)


def test_isar_rejects_non_uniform_grid_and_bad_inputs():
    pulses, times = _isar_pulses(preset_scene("center"), n_pulses=16)
    bad = times.copy()
    bad[5] += 0.1 * ISAR.period
    with pytest.raises(NonUniformGridError):
        isar_image(pulses, ISAR, 0.3, rate=100e6, pulse_times=bad)
    with pytest.raises(ValueError):
        isar_image(pulses[:1], ISAR, 0.3, rate=100e6)
    with pytest.raises(ValueError):
        isar_image(pulses, ISAR, 0.0, rate=100e6)


def test_isar_warns_on_range_migration():
    pulses, times = _isar_pulses(preset_scene("center"), n_pulses=16)
    with pytest.warns(RangeMigrationWarning):
        isar_image(pulses, ISAR, 0.5, rate=100e6, pulse_times=times, scene_radius=0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        isar_image(pulses, ISAR, 0.01, rate=100e6, pulse_times=times, scene_radius=0.3)


def test_find_blobs_on_empty_image():
    pulses, times = _isar_pulses(Scene((Scatterer(1.15, 0.0, 0.0),), 1.15), n_pulses=8)
    img = isar_image(pulses, ISAR, 0.1, rate=100e6, pulse_times=times)
    assert find_blobs(img) == []
