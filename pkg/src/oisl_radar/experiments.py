"""End-to-end pipelines behind the command-line subcommands.

Every pipeline takes a :class:`ScenarioConfig`, writes its artifacts into
an output directory and returns the report dictionary it wrote to
``report.json``.  Randomness flows from ``cfg.seed`` through
:func:`derive_seed` with a fixed stage name per consumer.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from scipy import signal

from . import fir
from .config import ScenarioConfig
from .dechirp_receiver import (
    AdcConfig,
    DechirpedSignal,
    ModulatorParams,
    adc_sample,
    dechirp_baseband,
    dmzm_dechirp,
    lowpass_filter,
    quantize,
)
from .errors import ConfigError, RadarSimError, RateNotDivisibleError
from .io_formats import write_json
from .laser_dynamics import (
    CalibrationMap,
    DriveModulator,
    FeedbackLoop,
    LaserParams,
    SimGrid,
    calibrate_p1_map,
    find_p1_onset,
    synth_p1_field_fast,
)
from .parallel import ordered_map
from .radar_dsp import (
    beat_to_range,
    comb_contrast,
    cross_range_resolution,
    extract_peaks,
    find_blobs,
    fit_dual_chirp,
    instantaneous_frequency,
    isar_image,
    min_beat_spacing,
    phase_deviation,
    range_profile,
    range_resolution,
    stft_spectrogram,
)
from .scene_channel import ChannelParams, Scene, derive_seed, echo_delays, platform_pose, synthesize_echo
from .waveform_synth import (
    ChirpSpec,
    ControlProfile,
    Waveform,
    default_fast_rate,
    design_control_profile,
    generate_tx_waveform,
    ideal_dual_chirp,
    photodetect,
)

# --------------------------------------------------------------- builders


def laser_params(cfg: ScenarioConfig) -> LaserParams:
    return LaserParams(**asdict(cfg.laser))


def chirp_spec(cfg: ScenarioConfig) -> ChirpSpec:
    c = cfg.drive.chirp
    spec = ChirpSpec(c.f_center, c.bandwidth, c.period, c.rise_first)
    return spec.snapped() if c.snap else spec


def feedback_loop(cfg: ScenarioConfig, spec: ChirpSpec, mode: str = "fast") -> FeedbackLoop:
    f = cfg.feedback
    if not f.enabled:
        return FeedbackLoop()
    tau = f.delay_tau if f.delay_tau is not None else spec.period
    kappa = f.gain_kappa if mode == "fast" else f.ode_gain_kappa
    return FeedbackLoop(tau, kappa, True, f.tau_char, f.settle_time)


def modulator_params(cfg: ScenarioConfig) -> ModulatorParams:
    return ModulatorParams(**asdict(cfg.receiver.modulator))


def adc_config(cfg: ScenarioConfig) -> AdcConfig:
    a = cfg.receiver.adc
    return AdcConfig(a.rate, a.bits, a.full_scale)


def channel_params(cfg: ScenarioConfig) -> ChannelParams:
    c = cfg.channel
    return ChannelParams(c.snr_db, c.prop_speed, c.range_decay)


def scene_from_config(cfg: ScenarioConfig) -> Scene:
    if cfg.scene is None:
        raise ConfigError("this command needs a scene (path, inline object or preset)")
    if isinstance(cfg.scene, str):
        return Scene.load(cfg.scene)
    return Scene.from_json(cfg.scene)


def xi_grid(cfg: ScenarioConfig) -> np.ndarray:
    d = cfg.drive
    n = int(math.floor((d.xi_stop - d.xi_start) / d.xi_step + 1e-9)) + 1
    return np.round(d.xi_start + d.xi_step * np.arange(n), 12)


def drive_modulator(cfg: ScenarioConfig) -> DriveModulator | None:
    d = cfg.drive
    if not d.voltage_index:
        return None
    return DriveModulator(d.xi_max, d.v_pi, d.v_bias)


def calib_grid(cfg: ScenarioConfig) -> SimGrid:
    return SimGrid(dt=cfg.sim.dt, duration=cfg.sim.calib_duration, seed=derive_seed(cfg.seed, "calibrate"))


def resolve_mode(cfg: ScenarioConfig, default: str) -> str:
    return cfg.mode or default


# ------------------------------------------------------------ calibration


def calibrate(cfg: ScenarioConfig) -> CalibrationMap:
    """ODE sweep of the configured grid at the configured detuning."""
    mod = drive_modulator(cfg)
    grid_vals = xi_grid(cfg)
    if mod is not None:
        # the same xi points, expressed as voltages on the rising slope of the modulator
        if cfg.drive.xi_stop > mod.xi_max:
            raise ConfigError(f"xi grid exceeds the modulator maximum {mod.xi_max:g}")
        grid_vals = mod.v_bias - (2.0 * mod.v_pi / math.pi) * np.arccos(grid_vals / mod.xi_max)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return calibrate_p1_map(laser_params(cfg), cfg.drive.detuning, grid_vals, calib_grid(cfg), modulator=mod)


def load_map(cfg: ScenarioConfig) -> CalibrationMap:
    """Load ``drive.calibration_path`` and check it was made for this laser and detuning."""
    cmap = CalibrationMap.from_csv(cfg.drive.calibration_path)
    want = laser_params(cfg)
    if cmap.params.fingerprint() != want.fingerprint():
        raise ConfigError("calibration map was made for different laser parameters",
                          map_fingerprint=cmap.params.fingerprint(), config_fingerprint=want.fingerprint())
    if cmap.detuning != cfg.drive.detuning:
        raise ConfigError("calibration map was made at a different detuning",
                          map_detuning=cmap.detuning, config_detuning=cfg.drive.detuning)
    return cmap


def obtain_map(cfg: ScenarioConfig, out: Path | None = None) -> CalibrationMap:
    cmap = load_map(cfg) if cfg.drive.calibration_path else calibrate(cfg)
    if out is not None:
        cmap.to_csv(out / "calibration.csv")
    return cmap


def axis_laws(cfg: ScenarioConfig, spec: ChirpSpec) -> dict:
    """Resolution and beat-spacing values recomputed from the configuration."""
    c = cfg.channel.prop_speed
    omega = 0.0
    if cfg.scene is not None:
        try:
            omega = scene_from_config(cfg).rotation_rate
        except (OSError, ValueError, KeyError):
            omega = 0.0
    theta = abs(omega) * cfg.isar.t_int
    return {
        "l_res_m": range_resolution(spec.bandwidth, c),
        "c_res_m": cross_range_resolution(theta, spec.f_center, c) if theta > 0 else math.inf,
        "delta_f_min_hz": min_beat_spacing(spec.period),
        "theta_rad": theta,
    }


def _spec_dict(spec: ChirpSpec) -> dict:
    return {"f_center_hz": spec.f_center, "bandwidth_hz": spec.bandwidth, "period_s": spec.period,
            "rise_first": spec.rise_first, "slope_hz_per_s": spec.slope}


def run_calibrate(cfg: ScenarioConfig, out: Path) -> dict:
    if resolve_mode(cfg, "ode") != "ode":
        raise ConfigError("calibration runs the rate-equation model; use --mode ode")
    out.mkdir(parents=True, exist_ok=True)
    cmap = calibrate(cfg)
    cmap.to_csv(out / "calibration.csv")
    onset = find_p1_onset(laser_params(cfg), cfg.drive.detuning, calib_grid(cfg),
                          xi_stop=cfg.drive.onset_stop, step=cfg.drive.onset_step)
    fmin, fmax = cmap.f_span
    report = {
        "command": "calibrate",
        "detuning_hz": cmap.detuning,
        "index_kind": cmap.index_kind,
        "f0_min_hz": fmin,
        "f0_max_hz": fmax,
        "n_points": int(cmap.index.size),
        "dropped": [list(d) for d in cmap.dropped],
        "secant_deviation": cmap.secant_deviation(),
        "hopf_onset_xi": onset.onset,
        "onset_noise_floor": onset.noise_floor,
        "laser_fingerprint": cmap.params.fingerprint(),
    }
    write_json(out / "report.json", report)
    return report


# --------------------------------------------------------------- transmit


def fast_rate(cfg: ScenarioConfig, spec: ChirpSpec) -> float:
    return cfg.sim.rate or default_fast_rate(spec, 4.0, cfg.receiver.adc.rate)


def transmit(cfg: ScenarioConfig, spec: ChirpSpec, mode: str, n_periods: int,
             cmap: CalibrationMap | None = None) -> tuple[Waveform, ControlProfile | None]:
    """Unit-RMS transmit waveform and the control profile that produced it."""
    if cfg.sim.ideal_tx:
        rate = fast_rate(cfg, spec)
        return ideal_dual_chirp(spec, rate, n_periods * spec.period), None
    if cmap is None:
        raise ConfigError("a calibration map is required to drive the laser")
    if cfg.drive.profile_path:
        profile = ControlProfile.from_csv(cfg.drive.profile_path)
    else:
        profile = design_control_profile(spec, cmap, cfg.sim.profile_rate)
    seed = derive_seed(cfg.seed, "laser")
    fb = feedback_loop(cfg, spec, mode)
    if mode == "fast" and cfg.drive.profile_path:
        tx = _tx_from_profile(profile, cmap, spec, fast_rate(cfg, spec), n_periods, cfg.sim.linewidth, fb, seed,
                              cfg.sim.pd_bandwidth)
    elif mode == "fast":
        tx = generate_tx_waveform(spec, cmap, "fast", n_periods=n_periods, rate=fast_rate(cfg, spec),
                                  linewidth=cfg.sim.linewidth, feedback=fb, seed=seed,
                                  pd_bandwidth=cfg.sim.pd_bandwidth, profile_rate=cfg.sim.profile_rate)
    else:
        tx = generate_tx_waveform(spec, cmap, "ode", n_periods=n_periods, linewidth=cfg.sim.ode_linewidth,
                                  feedback=fb, seed=seed, pd_bandwidth=cfg.sim.pd_bandwidth,
                                  profile_rate=cfg.sim.profile_rate, dt=cfg.sim.dt)
    return tx, profile


def _tx_from_profile(profile: ControlProfile, cmap: CalibrationMap, spec: ChirpSpec, rate: float,
                     n_periods: int, linewidth: float, fb: FeedbackLoop, seed: int,
                     pd_bandwidth: float) -> Waveform:
    grid = SimGrid(dt=1.0 / rate, duration=n_periods * profile.period, seed=seed)
    fld = synth_p1_field_fast(cmap, profile.to_drive(cmap), linewidth, fb, grid)
    w = photodetect(fld, min(pd_bandwidth, 0.95 * 0.5 * rate))
    rms = math.sqrt(w.power)
    return w.with_samples(w.samples / rms) if rms > 0 else w


def resample_to_multiple(w: Waveform, base: float) -> Waveform:
    """FFT-resample a periodic record so its rate is a multiple of ``base``."""
    m = w.rate / base
    if abs(m - round(m)) <= 1e-9 * m:
        return w
    new_rate = math.ceil(m) * base
    n_new = int(round(w.duration * new_rate))
    if abs(n_new / w.duration - new_rate) > 1e-6 * new_rate:
        raise RateNotDivisibleError(f"record length does not fit a {new_rate:g} Sa/s grid")
    return Waveform(signal.resample(w.samples, n_new), new_rate, w.t0, w.periodic)


def chirp_metrics(w: Waveform, spec: ChirpSpec) -> dict:
    """IF-fit of a generated waveform against its target chirp.

    Harmonics of the P1 tone (present in the rate-equation output) bias the
    Hilbert frequency, so the record is low-passed below ``2 f_low`` first
    whenever the band leaves room for the filter transition.
    """
    cut = 1.6 * spec.f_low
    if cut >= 1.02 * spec.f_high and 1.25 * cut < 0.5 * w.rate:
        w = w.with_samples(fir.lowpass(w.samples, cut, w.rate, pad="periodic" if w.periodic else "edge"))
    f = instantaneous_frequency(w)
    fit = fit_dual_chirp(w.times, f, spec)
    return {"if_center_hz": fit.center, "if_bandwidth_hz": fit.bandwidth, "if_period_s": fit.period,
            "slope_up_hz_per_s": fit.slope_up, "slope_down_hz_per_s": fit.slope_down,
            "if_rmse_hz": fit.rmse, "if_rmse_frac": fit.rmse / spec.bandwidth}


def run_waveform(cfg: ScenarioConfig, out: Path) -> dict:
    mode = resolve_mode(cfg, "fast")
    out.mkdir(parents=True, exist_ok=True)
    spec = chirp_spec(cfg)
    cmap = None if cfg.sim.ideal_tx else obtain_map(cfg, out)
    tx, profile = transmit(cfg, spec, mode, cfg.sim.n_periods, cmap)
    tx.to_raw(out / "waveform.f64")
    if profile is not None:
        profile.to_csv(out / "profile.csv")
    sg = stft_spectrogram(tx, min(cfg.dsp.stft_window, tx.samples.size), cfg.dsp.stft_hop)
    # keep the chirp band plus margin so the image stays small
    keep = (sg.freqs >= 0.5 * spec.f_low) & (sg.freqs <= 1.5 * spec.f_high)
    sg_band = type(sg)(sg.times, sg.freqs[keep], sg.magnitudes[keep])
    sg_band.to_pgm(out / "spectrogram.pgm")
    report = {"command": "waveform", "mode": mode, "ideal_tx": cfg.sim.ideal_tx, "rate_hz": tx.rate,
              "n_samples": int(tx.samples.size), "n_periods": cfg.sim.n_periods, "chirp": _spec_dict(spec),
              **chirp_metrics(tx, spec), **axis_laws(cfg, spec)}
    if tx.duration >= 20 * spec.period:
        report["comb_contrast_db"] = comb_contrast(tx, 1.0 / spec.period)
        _, dphi = phase_deviation(tx, spec)
        report["phase_dev_std_rad"] = float(dphi.std())
        report["phase_dev_max_rad"] = float(np.abs(dphi).max())
    write_json(out / "report.json", report)
    return report


# ------------------------------------------------------------------ range


def adc_gain(cfg: ScenarioConfig, mod: ModulatorParams, amplitudes: np.ndarray) -> float:
    """Gain that puts the largest possible coherent beat at ``headroom`` x full scale."""
    beat = 0.5 * mod.responsivity * mod.a_ref * mod.a_echo * float(np.sum(np.abs(amplitudes)))
    if beat <= 0:
        return 1.0
    return cfg.receiver.adc.headroom * cfg.receiver.adc.full_scale / beat


def receive(cfg: ScenarioConfig, spec: ChirpSpec, tx: Waveform, scene: Scene,
            pulse_start: float = 0.0) -> DechirpedSignal:
    """Echo synthesis, photonic mixing, LPF, AC coupling, gain and ADC."""
    ch = channel_params(cfg)
    echo = synthesize_echo(tx, scene, pulse_start, ch, seed=derive_seed(cfg.seed, "echo-noise"))
    mod = modulator_params(cfg)
    i = dmzm_dechirp(tx, echo, mod, min(cfg.receiver.pd_bandwidth, 0.45 * tx.rate))
    i = lowpass_filter(i, cfg.receiver.lpf_cutoff)
    _, amps = echo_delays(scene, pulse_start, ch)
    x = (i.samples - i.samples.mean()) * adc_gain(cfg, mod, amps)
    return adc_sample(i.with_samples(x), adc_config(cfg), chirp=spec)


def gated_peaks(cfg: ScenarioConfig, profile, n: int | None = None):
    """Peaks inside the target region, strongest first."""
    pk = extract_peaks(profile, cfg.dsp.min_prominence_db, max(cfg.dsp.max_peaks, 50), cfg.dsp.peak_floor_db)
    keep = [p for p in pk.entries if p.range >= cfg.dsp.min_range]
    return keep[: (n or cfg.dsp.max_peaks)]


def run_range(cfg: ScenarioConfig, out: Path) -> dict:
    mode = resolve_mode(cfg, "fast")
    out.mkdir(parents=True, exist_ok=True)
    spec = chirp_spec(cfg)
    scene = scene_from_config(cfg)
    cmap = None if cfg.sim.ideal_tx else obtain_map(cfg, out)
    tx, _ = transmit(cfg, spec, mode, cfg.sim.n_periods, cmap)
    tx = resample_to_multiple(tx, cfg.receiver.adc.rate)
    sig = receive(cfg, spec, tx, scene)
    sig.to_csv(out / "dechirped.csv")
    prof = range_profile(sig, cfg.dsp.window, cfg.dsp.n_fft, prop_speed=cfg.channel.prop_speed)
    prof.to_csv(out / "profile.csv")
    n_t = len(scene.scatterers)
    peaks = gated_peaks(cfg, prof)
    _write_peaks(out / "peaks.csv", peaks)
    expected = sorted(float(r) for r in platform_pose(scene, 0.0)[:, 0])
    measured = sorted(p.range for p in peaks[:n_t])
    report = {
        "command": "range", "mode": mode, "ideal_tx": cfg.sim.ideal_tx, "chirp": _spec_dict(spec),
        "adc_rate_hz": sig.rate, "adc_clip_count": sig.clip_count, "tx_rate_hz": tx.rate,
        "window": cfg.dsp.window, "expected_ranges_m": expected, "measured_ranges_m": measured,
        "top_peak_m": peaks[0].range if peaks else None,
        "errors_m": [m - e for m, e in zip(measured, expected)] if len(measured) == len(expected) else None,
        "profile_bin_hz": float(prof.delta_f_axis[1] - prof.delta_f_axis[0]),
        **axis_laws(cfg, spec),
    }
    if n_t >= 2:
        report["delta_d_m"] = measured[-1] - measured[0] if len(measured) >= 2 else None
        report["expected_delta_d_m"] = expected[-1] - expected[0]
    write_json(out / "report.json", report)
    return report


def _write_peaks(path: Path, peaks) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["range_m", "amplitude"])
        for p in peaks:
            w.writerow([repr(float(p.range)), repr(float(p.amplitude))])


# ------------------------------------------------------------------- ISAR


def isar_pulse_count(cfg: ScenarioConfig, spec: ChirpSpec) -> int:
    if cfg.isar.n_pulses is not None:
        return int(cfg.isar.n_pulses)
    n = cfg.isar.t_int / spec.period
    if abs(n - round(n)) > 1e-6 * n:
        raise ConfigError(f"integration time {cfg.isar.t_int:g} s is not a multiple of T = {spec.period:g} s")
    return int(round(n))


@dataclass(frozen=True)
class IsarRun:
    pulses: np.ndarray
    pulse_times: np.ndarray
    theta: float
    clip_count: int


def simulate_isar_pulses(cfg: ScenarioConfig, spec: ChirpSpec, scene: Scene) -> IsarRun:
    """De-chirped, quantized pulses over a centered aperture.

    Pulse ``n`` fires at ``(n - (N - 1) / 2) T``.  The small-signal mixer
    expansion of :func:`dechirp_baseband` replaces the RF chain; channel
    noise enters as the white beat-band noise the RF chain would pass.
    """
    n_p = isar_pulse_count(cfg, spec)
    if n_p < 2:
        raise ConfigError("ISAR needs at least 2 pulses")
    if scene.rotation_rate == 0:
        raise ConfigError("ISAR needs a rotating scene (rotation_rate_deg_s != 0)")
    T = spec.period
    times = (np.arange(n_p) - 0.5 * (n_p - 1)) * T
    ch = channel_params(cfg)
    mod = modulator_params(cfg)
    adc = adc_config(cfg)
    _, amps0 = echo_delays(scene, 0.0, ch)
    gain = adc_gain(cfg, mod, amps0)
    sigma = 0.0
    if math.isfinite(ch.snr_db) and amps0.size and amps0.max() > 0:
        p_noise = float(amps0.max()) ** 2 / 10 ** (ch.snr_db / 10)
        band = min(cfg.receiver.lpf_cutoff, 0.5 * adc.rate)
        rf_nyq = 0.5 * default_fast_rate(spec, 4.0, adc.rate)
        sigma = 0.5 * mod.responsivity * mod.a_ref * mod.a_echo * math.sqrt(p_noise * band / rf_nyq)
    n_fast = int(math.floor(T * adc.rate + 1e-6))
    batch = max(1, cfg.isar.batch)
    starts = list(range(0, n_p, batch))

    def run(b0: int):
        idx = np.arange(b0, min(n_p, b0 + batch))
        delays = np.empty((idx.size, len(scene.scatterers)))
        amps = np.empty_like(delays)
        for j, n in enumerate(idx):
            delays[j], amps[j] = echo_delays(scene, times[n], ch)
        x = dechirp_baseband(spec, delays, amps, mod, adc.rate, n_fast / adc.rate)
        x = x - x.mean(axis=1, keepdims=True)
        if sigma > 0:
            for j, n in enumerate(idx):
                rng = np.random.default_rng(derive_seed(cfg.seed, "isar-noise", int(n)))
                x[j] += sigma * rng.standard_normal(n_fast)
        _, v, clips = quantize(x * gain, adc)
        return v.reshape(x.shape), clips

    parts = ordered_map(run, starts)
    pulses = np.concatenate([p[0] for p in parts], axis=0)
    clips = int(sum(p[1] for p in parts))
    theta = abs(scene.rotation_rate) * n_p * T
    return IsarRun(pulses, times, theta, clips)


def run_isar(cfg: ScenarioConfig, out: Path) -> dict:
    mode = resolve_mode(cfg, "fast")
    if mode != "fast":
        raise ConfigError("ISAR runs in fast mode only (thousands of pulses)")
    out.mkdir(parents=True, exist_ok=True)
    spec = chirp_spec(cfg)
    scene = scene_from_config(cfg)
    run = simulate_isar_pulses(cfg, spec, scene)
    radius = scene.radius
    lim = (max(0.0, scene.platform_distance - radius - cfg.isar.range_margin),
           scene.platform_distance + radius + cfg.isar.range_margin)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        img = isar_image(run.pulses, spec, run.theta, rate=cfg.receiver.adc.rate, pulse_times=run.pulse_times,
                         window=cfg.dsp.window, range_limits=lim, blank_dc=cfg.isar.blank_dc,
                         scene_radius=radius, prop_speed=cfg.channel.prop_speed)
    img.to_pgm(out / "isar.pgm")
    blobs = find_blobs(img, cfg.dsp.blob_threshold_db)
    laws = axis_laws(cfg, spec)
    report = {
        "command": "isar", "mode": mode, "chirp": _spec_dict(spec), "n_pulses": int(run.pulses.shape[0]),
        "adc_rate_hz": cfg.receiver.adc.rate, "adc_clip_count": run.clip_count,
        "theta_rad": run.theta, "l_res_m": img.l_res, "c_res_m": img.c_res,
        "c_res_config_m": laws["c_res_m"], "delta_f_min_hz": laws["delta_f_min_hz"],
        "warnings": [str(w.message) for w in caught],
        "blobs": [asdict(b) for b in blobs],
        "expected_points": [{"range_m": s.range0, "cross_m": s.cross0} for s in scene.scatterers],
    }
    write_json(out / "report.json", report)
    return report


# ------------------------------------------------------------------ sweep


@dataclass(frozen=True)
class BandPreset:
    detuning: float
    f_center: float
    bandwidth: float
    xi_start: float
    xi_stop: float
    xi_step: float


BAND_PRESETS = {
    "X": BandPreset(-3e9, 11.25e9, 1e9, 0.03, 0.10, 0.005),
    "Ku": BandPreset(-4e9, 16.5e9, 3e9, 0.055, 0.165, 0.005),
    "K": BandPreset(-12e9, 22e9, 3e9, 0.10, 0.25, 0.005),
}

SWEEP_PRESETS = {
    "center": [13.5e9, 14.5e9, 15.5e9],
    "bandwidth": [2e9, 3e9, 4e9],
    "band": ["X", "Ku", "K"],
    "period": [1.1e-6, 1.5e-6, 2.65e-6],
}

SWEEP_BASE_PERIOD = 1.1e-6
SWEEP_CENTER = 15.5e9  # bandwidth and period points share the 13.5-17.5 GHz family
SWEEP_CENTER_BASE = 14.5e9


def _sweep_point(cfg: ScenarioConfig, axis: str, point, index: int, maps: dict) -> dict:
    c = cfg.drive.chirp
    det = cfg.drive.detuning
    grid_over = None
    if axis == "bandwidth":
        spec = ChirpSpec(SWEEP_CENTER, float(point), SWEEP_BASE_PERIOD, c.rise_first)
    elif axis == "period":
        spec = ChirpSpec(SWEEP_CENTER, 4e9, float(point), c.rise_first)
    elif axis == "center":
        spec = ChirpSpec(float(point), 3e9, SWEEP_BASE_PERIOD, c.rise_first)
    elif axis == "band":
        bp = BAND_PRESETS[str(point)]
        det = bp.detuning
        grid_over = (bp.xi_start, bp.xi_stop, bp.xi_step)
        spec = ChirpSpec(bp.f_center, bp.bandwidth, SWEEP_BASE_PERIOD, c.rise_first)
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    spec = spec.snapped()
    key = (det, grid_over)
    if key not in maps:
        if cfg.drive.calibration_path and grid_over is None:
            maps[key] = load_map(cfg)
        else:
            over = {"detuning": det, "calibration_path": None}
            if grid_over:
                over.update(zip(("xi_start", "xi_stop", "xi_step"), grid_over))
            maps[key] = calibrate(replace(cfg, drive=replace(cfg.drive, **over)))
    cmap = maps[key]
    rate = default_fast_rate(spec, 4.0, 1e8)
    fb = feedback_loop(cfg, spec)
    seed = derive_seed(cfg.seed, f"sweep-{axis}", index)
    n_per = cfg.sweep.n_periods
    if axis == "center":
        # injection-power analog: one profile shifted by a constant xi offset
        base = ChirpSpec(SWEEP_CENTER_BASE, 3e9, SWEEP_BASE_PERIOD, c.rise_first).snapped()
        prof = design_control_profile(base, cmap, cfg.sim.profile_rate)
        offset = float(cmap.inverse(spec.f_center) - cmap.inverse(base.f_center))
        shifted = ControlProfile(prof.samples + offset, prof.rate, prof.period, prof.index_kind)
        tx = _tx_from_profile(shifted, cmap, spec, rate, n_per, cfg.sim.linewidth, fb, seed, cfg.sim.pd_bandwidth)
        extra = {"xi_offset": offset}
    else:
        tx = generate_tx_waveform(spec, cmap, "fast", n_periods=n_per, rate=rate, linewidth=cfg.sim.linewidth,
                                  feedback=fb, seed=seed, pd_bandwidth=cfg.sim.pd_bandwidth,
                                  profile_rate=cfg.sim.profile_rate)
        extra = {}
    m = chirp_metrics(tx, spec)
    return {"detuning_hz": det, "target_center_hz": spec.f_center, "target_bandwidth_hz": spec.bandwidth,
            "target_period_s": spec.period, **m, **extra, "error": ""}


SWEEP_COLUMNS = ["axis", "point", "detuning_hz", "target_center_hz", "target_bandwidth_hz", "target_period_s",
                 "if_center_hz", "if_bandwidth_hz", "if_period_s", "if_rmse_hz", "if_rmse_frac", "error"]


def run_sweep(cfg: ScenarioConfig, out: Path) -> dict:
    mode = resolve_mode(cfg, "fast")
    if mode != "fast":
        raise ConfigError("tuning sweeps run in fast mode")
    out.mkdir(parents=True, exist_ok=True)
    axis = cfg.sweep.axis
    if axis not in SWEEP_PRESETS:
        raise ConfigError(f"sweep axis must be one of {sorted(SWEEP_PRESETS)}, got {axis!r}")
    points = cfg.sweep.points if cfg.sweep.points is not None else SWEEP_PRESETS[axis]
    maps: dict = {}
    rows = []
    for i, pt in enumerate(points):
        try:
            r = _sweep_point(cfg, axis, pt, i, maps)
        except RadarSimError as exc:
            r = {"error": f"{exc.code}: {exc}"}
        rows.append({"axis": axis, "point": pt, **r})
    with (out / "sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([_cell(r.get(k, "")) for k in SWEEP_COLUMNS])
    report = {"command": "sweep", "axis": axis, "points": rows}
    write_json(out / "report.json", report)
    return report


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def profile_axis_check(prof, spec: ChirpSpec, c: float) -> float:
    """Largest relative deviation of a profile's range axis from the range law."""
    want = beat_to_range(prof.delta_f_axis, spec, c)
    nz = want != 0
    return float(np.max(np.abs(prof.ranges[nz] - want[nz]) / want[nz])) if nz.any() else 0.0
