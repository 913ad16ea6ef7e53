"""Dual-chirp LFM synthesis from period-one dynamics.

A control profile is designed by inverting the calibration map along a
triangular target frequency trace; the resulting injection drive is fed to
either laser model and the optical field is photodetected into the RF
transmit waveform.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fir
from .errors import BandNotReachableError, NyquistError
from .laser_dynamics import (
    CalibrationMap,
    FeedbackLoop,
    FieldSeries,
    InjectionDrive,
    SimGrid,
    integrate_injected_laser,
    synth_p1_field_fast,
)

ODE_TARGET_RATE = 80e9
DEFAULT_PROFILE_RATE = 10e9


@dataclass(frozen=True)
class ChirpSpec:
    """Triangular (dual-chirp) frequency trace; each half sweeps ``bandwidth``."""

    f_center: float
    bandwidth: float
    period: float
    rise_first: bool = True

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        if not self.period > 0:
            raise ValueError("period must be > 0")
        if not self.f_center - self.bandwidth / 2 > 0:
            raise ValueError("lower band edge must be > 0")

    @property
    def f_low(self) -> float:
        return self.f_center - 0.5 * self.bandwidth

    @property
    def f_high(self) -> float:
        return self.f_center + 0.5 * self.bandwidth

    @property
    def slope(self) -> float:
        """Chirp-rate magnitude 2B/T (Hz/s)."""
        return 2.0 * self.bandwidth / self.period

    def snapped(self) -> "ChirpSpec":
        """Same chirp with f_center moved to the nearest multiple of 1/T.

        Then every period holds an integer number of carrier cycles, so the
        waveform repeats exactly and its spectral lines sit on the m/T grid.
        """
        fc = round(self.f_center * self.period) / self.period
        return ChirpSpec(fc, self.bandwidth, self.period, self.rise_first)

    def _start_stop(self) -> tuple[float, float, float]:
        if self.rise_first:
            return self.f_low, self.f_high, self.bandwidth
        return self.f_high, self.f_low, -self.bandwidth

    def instantaneous_frequency(self, t: np.ndarray | float) -> np.ndarray:
        u = np.mod(np.asarray(t, dtype=float), self.period) / self.period
        tri = np.where(u < 0.5, 2.0 * u, 2.0 - 2.0 * u)
        f_a, _, b = self._start_stop()
        return f_a + b * tri

    def _split(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        T = self.period
        n = np.floor(t / T)
        tau = t - n * T
        f_a, f_b, b = self._start_stop()
        h = 0.5 * T
        s = tau - h
        local = np.where(tau < h, f_a * tau + (b / T) * tau**2,
                         f_a * h + b * T / 4 + f_b * s - (b / T) * s**2)
        return n, local

    def cycles(self, t: np.ndarray | float) -> np.ndarray:
        """Accumulated carrier cycles since t = 0 (periodic continuation for any t)."""
        n, local = self._split(np.asarray(t, dtype=float))
        return n * (self.f_center * self.period) + local

    def phase(self, t: np.ndarray | float) -> np.ndarray:
        """Carrier phase, 2 pi * cycles(t) with whole turns removed per period."""
        n, local = self._split(np.asarray(t, dtype=float))
        return 2 * np.pi * (np.mod(n * (self.f_center * self.period), 1.0) + local)


@dataclass(frozen=True)
class Waveform:
    """Real RF samples.  ``periodic`` marks an integer number of periods,
    which lets filters wrap around instead of padding the ends."""

    samples: np.ndarray
    rate: float
    t0: float = 0.0
    periodic: bool = False

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1:
            raise ValueError("waveform samples must be 1-D")
        if not self.rate > 0:
            raise ValueError("rate must be > 0")
        if not np.all(np.isfinite(s)):
            raise ValueError("waveform samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.rate

    @property
    def power(self) -> float:
        return float(np.mean(self.samples**2))

    def with_samples(self, samples: np.ndarray) -> "Waveform":
        return Waveform(samples, self.rate, self.t0, self.periodic)

    def sidecar(self) -> dict:
        return {"rate_hz": self.rate, "t0_s": self.t0, "units": "arb", "periodic": self.periodic,
                "n_samples": int(self.samples.size)}

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_s", "amplitude"])
            for t, x in zip(self.times, self.samples):
                w.writerow([repr(float(t)), repr(float(x))])
        path.with_suffix(".json").write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def from_csv(cls, path: str | Path) -> "Waveform":
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        side = path.with_suffix(".json")
        if side.exists():
            meta = json.loads(side.read_text())
            return cls(data[:, 1], meta["rate_hz"], meta["t0_s"], meta.get("periodic", False))
        rate = 1.0 / float(np.median(np.diff(data[:, 0])))
        return cls(data[:, 1], rate, float(data[0, 0]))

    def to_raw(self, path: str | Path) -> Path:
        """Little-endian float64 samples plus a JSON sidecar."""
        path = Path(path)
        self.samples.astype("<f8").tofile(path)
        meta = self.sidecar() | {"dtype": "<f8"}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def from_raw(cls, path: str | Path) -> "Waveform":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        data = np.fromfile(path, dtype="<f8")
        return cls(data, meta["rate_hz"], meta["t0_s"], meta.get("periodic", False))


def ideal_dual_chirp(spec: ChirpSpec, rate: float, duration: float, t0: float = 0.0,
                     amplitude: float = math.sqrt(2.0)) -> Waveform:
    """Noise-free ``amplitude * cos(phase(t))``; the default is unit RMS."""
    n = int(round(duration * rate))
    t = t0 + np.arange(n) / rate
    periodic = _is_whole_periods(n, rate, spec.period)
    return Waveform(amplitude * np.cos(spec.phase(t)), rate, t0, periodic)


def _is_whole_periods(n: int, rate: float, period: float) -> bool:
    per = period * rate
    return abs(per - round(per)) < 1e-6 and round(per) > 0 and n % round(per) == 0


@dataclass(frozen=True)
class ControlProfile:
    samples: np.ndarray
    rate: float
    period: float
    index_kind: str = "xi"
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if not self.period > 0:
            raise ValueError("period must be > 0")
        if self.index_kind not in ("xi", "volts"):
            raise ValueError("index_kind must be 'xi' or 'volts'")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.rate

    def xi(self, cmap: CalibrationMap) -> np.ndarray:
        if self.index_kind == "volts":
            return cmap.modulator.xi(self.samples)
        return np.asarray(self.samples)

    def to_drive(self, cmap: CalibrationMap) -> InjectionDrive:
        return InjectionDrive(cmap.detuning, self.xi(cmap), self.rate, self.period)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_s", "value"])
            for t, x in zip(self.times, self.samples):
                w.writerow([repr(float(t)), repr(float(x))])
        meta = {"rate_hz": self.rate, "period_s": self.period, "index_kind": self.index_kind, "t0_s": self.t0}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def from_csv(cls, path: str | Path) -> "ControlProfile":
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        side = path.with_suffix(".json")
        if side.exists():
            m = json.loads(side.read_text())
            return cls(data[:, 1], m["rate_hz"], m["period_s"], m["index_kind"], m["t0_s"])
        dt = float(np.median(np.diff(data[:, 0])))
        return cls(data[:, 1], 1.0 / dt, dt * data.shape[0], "xi", float(data[0, 0]))


def design_control_profile(spec: ChirpSpec, cmap: CalibrationMap, rate: float = DEFAULT_PROFILE_RATE) -> ControlProfile:
    """Drive samples over one period whose P1 frequency traces the chirp.

    The period is split into ``N = round(T * rate)`` equal steps (the stored
    rate is ``N / T``).  The target trace is evaluated with integer
    arithmetic so sample ``k`` and ``N - k`` are bit-identical, which makes
    the up and down halves exact mirror images.
    """
    fmin, fmax = cmap.f_span
    missing = []
    if spec.f_low < fmin:
        missing.append((spec.f_low, min(spec.f_high, fmin)))
    if spec.f_high > fmax:
        missing.append((max(spec.f_low, fmax), spec.f_high))
    if missing:
        desc = ", ".join(f"[{a / 1e9:.4f}, {b / 1e9:.4f}] GHz" for a, b in missing)
        raise BandNotReachableError(
            f"band [{spec.f_low / 1e9:.4f}, {spec.f_high / 1e9:.4f}] GHz leaves the map range "
            f"[{fmin / 1e9:.4f}, {fmax / 1e9:.4f}] GHz; uncovered: {desc}",
            uncovered=[list(m) for m in missing],
        )
    n = int(round(spec.period * rate))
    if n < 4:
        raise ValueError("profile rate too low: fewer than 4 samples per period")
    k = np.arange(n)
    tri = 2.0 * np.minimum(k, n - k) / n
    f_a, _, b = spec._start_stop()
    target = np.clip(f_a + b * tri, fmin, fmax)
    samples = cmap.inverse(target)
    return ControlProfile(samples, n / spec.period, spec.period, cmap.index_kind)


def photodetect(field: FieldSeries, pd_bandwidth: float, responsivity: float = 1.0,
                periodic: bool = False) -> Waveform:
    """Square-law detection: ``responsivity |E|^2``, DC removed, FIR low-passed."""
    if pd_bandwidth >= 0.5 * field.rate:
        raise NyquistError(
            f"pd_bandwidth {pd_bandwidth:g} Hz >= Nyquist {0.5 * field.rate:g} Hz",
            pd_bandwidth=pd_bandwidth,
            rate=field.rate,
        )
    x = responsivity * field.intensity
    x = x - x.mean()
    y = fir.lowpass(x, pd_bandwidth, field.rate, pad="periodic" if periodic else "edge")
    return Waveform(y, field.rate, field.t0, periodic)


def default_fast_rate(spec: ChirpSpec, factor: float = 8.0, multiple_of: float | None = None) -> float:
    """``factor * f_high``, optionally rounded up to a multiple of ``multiple_of``."""
    r = factor * spec.f_high
    if multiple_of:
        r = math.ceil(r / multiple_of - 1e-9) * multiple_of
    return r


def generate_tx_waveform(
    spec: ChirpSpec,
    cmap: CalibrationMap,
    model: str = "fast",
    *,
    n_periods: int = 1,
    rate: float | None = None,
    linewidth: float = 0.0,
    feedback: FeedbackLoop | None = None,
    seed: int = 0,
    pd_bandwidth: float = 30e9,
    responsivity: float = 1.0,
    profile_rate: float = DEFAULT_PROFILE_RATE,
    dt: float = 1e-12,
    warmup_periods: int = 1,
    normalize: bool = True,
) -> Waveform:
    """Profile design, laser model and photodetection in one call.

    ``model="fast"`` samples at ``rate`` (default ``8 f_high``);
    ``model="ode"`` integrates at ``dt`` after ``warmup_periods`` of lock-in
    and stores every ``floor(1 / (dt * 80 GHz))``-th step.  ``linewidth`` is
    the fast-path Wiener linewidth or the ODE Langevin linewidth.  The PD
    bandwidth is capped at 95% of Nyquist.  Output is scaled to unit RMS.
    """
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    if model not in ("fast", "ode"):
        raise ValueError("model must be 'fast' or 'ode'")
    profile = design_control_profile(spec, cmap, profile_rate)
    drive = profile.to_drive(cmap)
    duration = n_periods * spec.period
    if model == "fast":
        rate = rate or default_fast_rate(spec)
        _check_rate(rate, spec)
        grid = SimGrid(dt=1.0 / rate, duration=duration, seed=seed)
        fld = synth_p1_field_fast(cmap, drive, linewidth, feedback, grid)
    else:
        store = max(1, int(math.floor(1.0 / (dt * ODE_TARGET_RATE) + 1e-9)))
        out_rate = 1.0 / (dt * store)
        _check_rate(out_rate, spec)
        warm = warmup_periods * spec.period
        grid = SimGrid(dt=dt, duration=warm + duration, seed=seed, store_every=store,
                       f_max=max(25e9, spec.f_high))
        full = integrate_injected_laser(cmap.params, drive, feedback, grid, noise_linewidth=linewidth)
        i0 = int(math.ceil(warm * out_rate - 1e-9))
        n_keep = int(round(duration * out_rate))
        s = full.samples[i0:i0 + n_keep]
        fld = FieldSeries(s, out_rate, full.carrier_freq, i0 / out_rate - warm)
    periodic = _is_whole_periods(len(fld), fld.rate, spec.period) and linewidth == 0
    w = photodetect(fld, min(pd_bandwidth, 0.95 * 0.5 * fld.rate), responsivity, periodic=periodic)
    if normalize:
        rms = math.sqrt(w.power)
        if rms > 0:
            w = w.with_samples(w.samples / rms)
    return w


def _check_rate(rate: float, spec: ChirpSpec) -> None:
    if rate < 4.0 * spec.f_high * (1 - 1e-12):
        raise NyquistError(
            f"output rate {rate:g} Sa/s below 4 x f_high = {4 * spec.f_high:g}", rate=rate
        )
