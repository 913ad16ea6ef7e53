"""Post-ADC processing and waveform metrology.

Range mapping follows the de-chirp law: a beat frequency ``df`` in a chirp
of bandwidth ``B`` and period ``T`` corresponds to range ``c T df / (4 B)``.
ISAR images use the range-Doppler algorithm with cross-range
``x = f_d c / (2 f_c omega)``.  Hann windows are used throughout.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage, signal

from . import fir
from .dechirp_receiver import DechirpedSignal
from .errors import (
    AlignmentError,
    DegenerateWindowError,
    NonUniformGridError,
    SpacingBelowResolutionError,
    TooShortSignalError,
)
from .io_formats import write_pgm16
from .waveform_synth import ChirpSpec, Waveform

C = 2.99792458e8
HANN_BROADENING = 1.44  # -3 dB main-lobe width of a Hann window, in bins
HANN_SIDELOBE_FLOOR_DB = -30.0


class RangeMigrationWarning(UserWarning):
    pass


# ------------------------------------------------------------ axis laws


def beat_to_range(delta_f: np.ndarray | float, spec: ChirpSpec, c: float = C) -> np.ndarray:
    return c * spec.period * np.asarray(delta_f, dtype=float) / (4.0 * spec.bandwidth)


def range_to_beat(r: np.ndarray | float, spec: ChirpSpec, c: float = C) -> np.ndarray:
    return 4.0 * spec.bandwidth * np.asarray(r, dtype=float) / (c * spec.period)


def range_resolution(bandwidth: float, c: float = C) -> float:
    return c / (4.0 * bandwidth)


def cross_range_resolution(theta: float, f_center: float, c: float = C) -> float:
    return c / (2.0 * theta * f_center)


def min_beat_spacing(period: float) -> float:
    return 1.0 / period


# -------------------------------------------------------- range profiles


@dataclass(frozen=True)
class RangeProfile:
    ranges: np.ndarray
    amplitudes: np.ndarray
    delta_f_axis: np.ndarray
    resolution: float
    window: str = "up"

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["range_m", "delta_f_hz", "amplitude"])
            for r, f, a in zip(self.ranges, self.delta_f_axis, self.amplitudes):
                w.writerow([repr(float(r)), repr(float(f)), repr(float(a))])
        return path


def windowed_fft(x: np.ndarray, n_fft: int | None = None, axis: int = -1) -> np.ndarray:
    """Full complex FFT of the Hann-windowed input."""
    x = np.asarray(x)
    n = x.shape[axis]
    shape = [1] * x.ndim
    shape[axis] = n
    w = np.hanning(n).reshape(shape)
    return np.fft.fft(x * w, n_fft or n, axis=axis)


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def _segment_bounds(spec: ChirpSpec, rate: float, t0: float, window: str, period_index: int) -> tuple[int, int]:
    T = spec.period
    if window == "full":
        start, length = period_index * T, T
    elif window in ("up", "down"):
        first = (window == "up") == spec.rise_first
        start = period_index * T + (0.0 if first else 0.5 * T)
        length = 0.5 * T
    else:
        raise ValueError("window must be 'up', 'down' or 'full'")
    i0 = int(math.ceil((start - t0) * rate - 1e-6))
    n = int(math.floor(length * rate + 1e-6))
    return i0, n


def range_profile(
    sig: DechirpedSignal,
    window: str = "up",
    n_fft: int | None = None,
    period_index: int | None = None,
    prop_speed: float = C,
) -> RangeProfile:
    """Hann-windowed FFT magnitude of one half (or full) period, on a range axis.

    Each segment has its mean removed before windowing.  With
    ``period_index=None`` the power spectra of all complete periods are
    averaged.  The profile is normalized to unit maximum (zero stays zero).
    """
    spec = sig.chirp
    n_period = int(math.floor(spec.period * sig.rate + 1e-6))
    if sig.samples.size < n_period:
        raise TooShortSignalError(
            f"signal holds {sig.samples.size} samples, one period needs {n_period}"
        )
    n_periods = max(1, int(math.floor(sig.duration / spec.period + 1e-6)))
    indices = range(n_periods) if period_index is None else [period_index]
    segs = []
    for k in indices:
        i0, n = _segment_bounds(spec, sig.rate, sig.t0, window, k)
        if i0 < 0 or i0 + n > sig.samples.size:
            raise TooShortSignalError(f"period {k} window exceeds the signal")
        segs.append(sig.samples[i0:i0 + n])
    n = segs[0].size
    if n < 2:
        raise TooShortSignalError("window holds fewer than 2 samples")
    n_fft = n_fft or 8 * _next_pow2(n)
    if n_fft < n:
        raise ValueError("n_fft must be >= window sample count")
    seg = np.array(segs)
    seg = seg - seg.mean(axis=1, keepdims=True)
    spec_pow = np.abs(windowed_fft(seg, n_fft, axis=1)[:, : n_fft // 2 + 1]) ** 2
    amp = np.sqrt(spec_pow.mean(axis=0))
    peak = amp.max()
    if peak > 0:
        amp = amp / peak
    df = np.arange(n_fft // 2 + 1) * sig.rate / n_fft
    return RangeProfile(beat_to_range(df, spec, prop_speed), amp, df,
                        range_resolution(spec.bandwidth, prop_speed), window)


@dataclass(frozen=True)
class Peak:
    range: float
    amplitude: float
    interpolated: bool = True


@dataclass(frozen=True)
class PeakList:
    entries: tuple[Peak, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> Peak:
        return self.entries[i]

    @property
    def ranges(self) -> np.ndarray:
        return np.array([p.range for p in self.entries])

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["range_m", "amplitude"])
            for p in self.entries:
                w.writerow([repr(float(p.range)), repr(float(p.amplitude))])
        return path


def _parabola(y0: float, y1: float, y2: float) -> tuple[float, float]:
    den = y0 - 2.0 * y1 + y2
    if den >= 0:
        return 0.0, y1
    d = float(np.clip(0.5 * (y0 - y2) / den, -0.5, 0.5))
    return d, y1 - 0.25 * (y0 - y2) * d


def extract_peaks(p: RangeProfile, min_prominence_db: float = 3.0, max_peaks: int = 10,
                  floor_db: float = HANN_SIDELOBE_FLOOR_DB) -> PeakList:
    """Local maxima with prominence >= ``min_prominence_db``, refined by a
    parabola through the three log-magnitude samples around each maximum.
    Maxima more than ``-floor_db`` below the largest are ignored; the
    default sits just above the -31.5 dB Hann peak sidelobe."""
    a = np.asarray(p.amplitudes, dtype=float)
    top = a.max() if a.size else 0.0
    if top <= 0:
        return PeakList()
    db = 20 * np.log10(np.maximum(a / top, 1e-30))
    idx, _ = signal.find_peaks(db, prominence=min_prominence_db, height=floor_db)
    step = p.ranges[1] - p.ranges[0] if a.size > 1 else 0.0
    peaks = []
    for k in idx:
        d, y = _parabola(db[k - 1], db[k], db[k + 1])
        peaks.append(Peak(float(p.ranges[k] + d * step), float(top * 10 ** (y / 20)), True))
    peaks.sort(key=lambda q: -q.amplitude)
    return PeakList(tuple(peaks[:max_peaks]))


# ------------------------------------------------------- time-frequency


@dataclass(frozen=True)
class SpectroGram:
    times: np.ndarray
    freqs: np.ndarray
    magnitudes: np.ndarray  # (n_freqs, n_times)

    def ridge(self) -> np.ndarray:
        """Peak frequency of every frame, parabola-refined."""
        m = np.log(np.maximum(self.magnitudes, 1e-300))
        k = np.clip(np.argmax(m, axis=0), 1, m.shape[0] - 2)
        cols = np.arange(m.shape[1])
        y0, y1, y2 = m[k - 1, cols], m[k, cols], m[k + 1, cols]
        den = y0 - 2 * y1 + y2
        d = np.where(den < 0, 0.5 * (y0 - y2) / np.where(den < 0, den, -1.0), 0.0)
        return self.freqs[k] + np.clip(d, -0.5, 0.5) * (self.freqs[1] - self.freqs[0])

    def to_pgm(self, path: str | Path) -> Path:
        return write_pgm16(path, self.magnitudes[::-1], {
            "rows": "frequency, descending", "cols": "time",
            "freqs_hz": [float(self.freqs[0]), float(self.freqs[-1]), int(self.freqs.size)],
            "times_s": [float(self.times[0]), float(self.times[-1]), int(self.times.size)],
        })


def stft_spectrogram(w: Waveform, window_len: int, hop: int, n_fft: int | None = None) -> SpectroGram:
    """Hann-windowed magnitude STFT; frame times are window centers."""
    x = w.samples
    if window_len < 2 or window_len > x.size or hop < 1:
        raise DegenerateWindowError(
            f"window_len={window_len}, hop={hop} invalid for {x.size} samples"
        )
    frames = np.lib.stride_tricks.sliding_window_view(x, window_len)[::hop]
    n_fft = n_fft or window_len
    mags = np.abs(np.fft.rfft(frames * np.hanning(window_len), n_fft, axis=1)).T
    times = w.t0 + (np.arange(frames.shape[0]) * hop + 0.5 * (window_len - 1)) / w.rate
    freqs = np.fft.rfftfreq(n_fft, 1.0 / w.rate)
    return SpectroGram(times, freqs, mags)


def analytic_signal(w: Waveform) -> np.ndarray:
    return signal.hilbert(w.samples)


def instantaneous_frequency(w: Waveform) -> np.ndarray:
    """Hilbert instantaneous frequency (Hz), one value per sample, with a
    length-5 median filter (edge samples replicated)."""
    ph = np.unwrap(np.angle(analytic_signal(w)))
    f = np.gradient(ph) * w.rate / (2 * np.pi)
    return ndimage.median_filter(f, size=5, mode="nearest")


@dataclass(frozen=True)
class ChirpFit:
    center: float
    bandwidth: float
    period: float
    slope_up: float
    slope_down: float
    rmse: float | None

    @property
    def f_min(self) -> float:
        return self.center - 0.5 * self.bandwidth

    @property
    def f_max(self) -> float:
        return self.center + 0.5 * self.bandwidth


def estimate_period(t: np.ndarray, f: np.ndarray, guess: float) -> float:
    """Lag minimizing the mean squared difference ``f(t + P) - f(t)`` near ``guess``.

    Unlike the autocorrelation peak, the difference function is exactly
    zero at the true period of a periodic trace regardless of record length.
    """
    dt = t[1] - t[0]
    x = f - f.mean()
    n = x.size
    nfft = _next_pow2(2 * n)
    X = np.fft.rfft(x, nfft)
    ac = np.fft.irfft(np.abs(X) ** 2, nfft)[:n]
    e = np.concatenate(([0.0], np.cumsum(x * x)))
    k = np.arange(n)
    # sum over i < n - k of x[i + k]^2 + x[i]^2 - 2 x[i] x[i + k]
    msd = (e[n] - e[k] + e[n - k] - 2.0 * ac) / np.maximum(n - k, 1)
    lo = max(1, int(0.5 * guess / dt))
    hi = min(n - 2, int(1.5 * guess / dt))
    if hi <= lo:
        raise TooShortSignalError("trace too short to measure its period")
    j = lo + int(np.argmin(msd[lo:hi]))
    d, _ = _parabola(-msd[j - 1], -msd[j], -msd[j + 1])
    return (j + d) * dt


def fit_dual_chirp(t: np.ndarray, f: np.ndarray, spec: ChirpSpec | None = None,
                   period: float | None = None, edge_frac: float = 0.01) -> ChirpFit:
    """Least-squares dual-chirp fit of an instantaneous-frequency trace.

    The period comes from the autocorrelation when the trace spans at least
    1.8 nominal periods, otherwise from ``period`` / ``spec``.  Each monotone
    run is fitted by a line over its central 80%; the bandwidth is
    ``P (s_up + |s_down|) / 4``.  With ``spec`` the RMSE against the
    time-aligned target trace is reported.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    cut = int(edge_frac * t.size)
    t, f = t[cut:t.size - cut], f[cut:f.size - cut]
    guess = period or (spec.period if spec else None)
    if guess is None:
        raise ValueError("need a nominal period or a ChirpSpec")
    P = estimate_period(t, f, guess) if (t[-1] - t[0]) >= 1.8 * guess else guess
    dt = t[1] - t[0]
    sm = ndimage.uniform_filter1d(f, max(3, int(0.05 * P / dt)), mode="nearest")
    sign = np.sign(np.gradient(sm))
    edges = np.flatnonzero(np.diff(sign) != 0) + 1
    bounds = np.concatenate(([0], edges, [f.size]))
    up, down = [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        if (b - a) * dt < 0.2 * P:
            continue
        m = (b - a) // 10
        sl = slice(a + m, b - m)
        slope = np.polyfit(t[sl], f[sl], 1)[0]
        (up if slope > 0 else down).append(slope)
    s_up = float(np.mean(up)) if up else float("nan")
    s_dn = float(np.mean(down)) if down else float("nan")
    slopes = [abs(s) for s in (s_up, s_dn) if np.isfinite(s)]
    bw = P * float(np.mean(slopes)) / 2.0 if slopes else float("nan")
    n_whole = int((t[-1] - t[0]) / P)
    center = float(f[: max(1, int(round(n_whole * P / dt)))].mean()) if n_whole else float(f.mean())
    rmse = None
    if spec is not None:
        shifts = np.linspace(0, spec.period, 2001)[:-1]
        sub = slice(None, None, max(1, f.size // 20000))
        errs = [np.mean((f[sub] - spec.instantaneous_frequency(t[sub] - s)) ** 2) for s in shifts]
        s0 = shifts[int(np.argmin(errs))]
        fine = s0 + np.linspace(-1, 1, 201) * (spec.period / 2000)
        errs = [np.mean((f - spec.instantaneous_frequency(t - s)) ** 2) for s in fine]
        rmse = float(math.sqrt(min(errs)))
    return ChirpFit(center, bw, P, s_up, s_dn, rmse)


# -------------------------------------------------------- FDML metrics


def align_ideal(w: Waveform, spec: ChirpSpec, analytic: np.ndarray | None = None) -> float:
    """Time shift s (s) maximizing |corr(analytic(w), exp(j Phi(t - s)))| over the first period."""
    a = analytic_signal(w) if analytic is None else analytic
    n = int(round(spec.period * w.rate))
    seg = a[:n]
    t = w.t0 + np.arange(n) / w.rate
    ideal = np.exp(1j * spec.phase(t))
    corr = np.abs(np.fft.ifft(np.fft.fft(seg) * np.conj(np.fft.fft(ideal))))
    k = int(np.argmax(corr))
    guard = max(3, int(3 * w.rate / spec.bandwidth))
    mask = np.ones(n, bool)
    mask[np.arange(k - guard, k + guard + 1) % n] = False
    if corr[mask].max() >= 0.9 * corr[k]:
        raise AlignmentError("correlation peak is ambiguous")
    d, _ = _parabola(corr[(k - 1) % n], corr[k], corr[(k + 1) % n])
    lag = k + d
    if lag > n / 2:
        lag -= n
    return lag / w.rate


def phase_deviation(w: Waveform, spec: ChirpSpec, lpf_cutoff: float = 50e6,
                    trim: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Phase of ``analytic(w) * conj(ideal)`` after a complex low-pass.

    Returns ``(times, dphi)`` with the mean removed.  ``trim`` seconds are
    cut from both ends (default: the filter half-length plus 0.5% of the
    record) to drop Hilbert and filter edge effects.
    """
    if w.duration < spec.period:
        raise TooShortSignalError("waveform shorter than one chirp period")
    a = analytic_signal(w)
    s = align_ideal(w, spec, a)
    mix = a * np.exp(-1j * spec.phase(w.times - s))
    taps = fir.lowpass_taps(lpf_cutoff, w.rate)
    mix = fir.apply_fir(mix, taps, pad="edge")
    if trim is None:
        cut = len(taps) // 2 + int(0.005 * mix.size)
    else:
        cut = int(round(trim * w.rate))
    sl = slice(cut, mix.size - cut)
    ph = np.unwrap(np.angle(mix[sl]))
    return w.times[sl], ph - ph.mean()


def comb_contrast(w: Waveform, line_spacing: float, band: tuple[float, float] | None = None) -> float:
    """Comb contrast R (dB) of a periodic signal's power spectrum.

    Lines: the largest bin within +-1 bin of each grid point ``m s + o``,
    with the grid offset ``o`` found by a search that maximizes mean line
    power.  Floor: median of bins more than 3 bins from every line, divided
    by ln 2 so it estimates the mean of exponentially distributed noise
    bins.  ``band`` defaults to the band holding 99% of the power.
    """
    x = w.samples - w.samples.mean()
    n = x.size
    df = w.rate / n
    if line_spacing < 20 * df * (1 - 1e-9):
        raise SpacingBelowResolutionError(
            f"line spacing {line_spacing:g} Hz below 20 bins of {df:g} Hz"
        )
    p = np.abs(np.fft.rfft(x * np.hanning(n))) ** 2
    freqs = np.arange(p.size) * df
    if band is None:
        cum = np.cumsum(p)
        total = cum[-1]
        if total <= 0:
            return 0.0
        lo = freqs[np.searchsorted(cum, 0.005 * total)]
        hi = freqs[min(p.size - 1, np.searchsorted(cum, 0.995 * total))]
        band = (max(lo, 0.5 * line_spacing), hi)
    s = line_spacing / df
    m = np.arange(math.ceil(band[0] / line_spacing), math.floor(band[1] / line_spacing) + 1)
    if m.size < 2:
        raise SpacingBelowResolutionError("fewer than two comb lines inside the band")
    pmax = ndimage.maximum_filter1d(p, 3, mode="nearest")
    offsets = np.arange(0.0, s, 0.5)
    pos = np.clip(np.rint(m[None, :] * s + offsets[:, None]).astype(int), 0, p.size - 1)
    score = pmax[pos].mean(axis=1)
    o = offsets[int(np.argmax(score))]
    lines = pmax[np.clip(np.rint(m * s + o).astype(int), 0, p.size - 1)]
    k = np.arange(p.size)
    in_band = (freqs >= band[0]) & (freqs <= band[1])
    d = np.mod(k - o, s)
    far = np.minimum(d, s - d) > 3.0
    floor_bins = p[in_band & far]
    if floor_bins.size == 0:
        raise SpacingBelowResolutionError("no inter-line bins inside the band")
    floor = float(np.median(floor_bins)) / math.log(2.0)
    if floor <= 0:
        return math.inf
    return float(10 * math.log10(lines.mean() / floor))


# ----------------------------------------------------------------- ISAR


@dataclass(frozen=True)
class IsarImage:
    pixels: np.ndarray  # (n_range, n_cross)
    range_axis: np.ndarray
    cross_axis: np.ndarray
    l_res: float
    c_res: float
    theta: float
    f_center: float

    def sidecar(self) -> dict:
        return {
            "rows": "range, ascending", "cols": "cross-range, ascending",
            "range_axis_m": [float(self.range_axis[0]), float(self.range_axis[-1]), int(self.range_axis.size)],
            "cross_axis_m": [float(self.cross_axis[0]), float(self.cross_axis[-1]), int(self.cross_axis.size)],
            "l_res_m": self.l_res, "c_res_m": self.c_res, "theta_rad": self.theta, "f_center_hz": self.f_center,
        }

    def to_pgm(self, path: str | Path) -> Path:
        return write_pgm16(path, self.pixels, self.sidecar())


@dataclass(frozen=True)
class Blob:
    range: float
    cross: float
    peak: float
    n_pixels: int
    range_extent: float
    cross_extent: float


def _pulse_matrix(pulses) -> tuple[np.ndarray, float | None, np.ndarray | None]:
    if isinstance(pulses, np.ndarray):
        return np.atleast_2d(pulses), None, None
    rows = [p.samples for p in pulses]
    rate = pulses[0].rate
    times = np.array([p.t0 for p in pulses])
    return np.array(rows), rate, times


def isar_image(
    pulses: np.ndarray | Sequence[DechirpedSignal],
    spec: ChirpSpec,
    theta: float,
    *,
    rate: float | None = None,
    pulse_times: np.ndarray | None = None,
    window: str = "up",
    n_fft_range: int | None = None,
    range_limits: tuple[float, float] | None = None,
    blank_dc: bool = True,
    scene_radius: float | None = None,
    prop_speed: float = C,
) -> IsarImage:
    """Range-Doppler image from de-chirped pulses (one row per pulse).

    Fast time: Hann FFT of the selected half-period of each pulse.  Slow
    time: Hann FFT across pulses per range bin.  Doppler maps to
    cross-range by ``x = f_d c / (2 f_c omega)``, ``omega = theta / (N T)``.
    The zero-Doppler column is blanked unless ``blank_dc`` is False.
    """
    mat, r2, times = _pulse_matrix(pulses)
    rate = rate or r2
    if rate is None:
        raise ValueError("rate is required for a raw pulse matrix")
    pulse_times = pulse_times if pulse_times is not None else times
    n_p = mat.shape[0]
    if n_p < 2:
        raise ValueError("need at least 2 pulses")
    if not theta > 0:
        raise ValueError("theta must be > 0")
    T = spec.period
    if pulse_times is not None:
        dts = np.diff(np.asarray(pulse_times, dtype=float))
        if np.any(np.abs(dts - T) > 1e-6 * T):
            raise NonUniformGridError("pulse interval must be uniform and equal to the chirp period")
    i0, n = _segment_bounds(spec, rate, 0.0, window, 0)
    if i0 + n > mat.shape[1]:
        raise TooShortSignalError("pulses shorter than the selected window")
    seg = mat[:, i0:i0 + n]
    seg = seg - seg.mean(axis=1, keepdims=True)
    n_fft_range = n_fft_range or 4 * _next_pow2(n)
    rng = windowed_fft(seg, n_fft_range, axis=1)[:, : n_fft_range // 2 + 1]
    df = np.arange(n_fft_range // 2 + 1) * rate / n_fft_range
    ranges = beat_to_range(df, spec, prop_speed)
    if range_limits is not None:
        keep = (ranges >= range_limits[0]) & (ranges <= range_limits[1])
        rng, ranges = rng[:, keep], ranges[keep]
    dop = np.fft.fftshift(windowed_fft(rng, None, axis=0), axes=0)
    fd = np.fft.fftshift(np.fft.fftfreq(n_p, T))
    omega = theta / (n_p * T)
    cross = fd * prop_speed / (2.0 * spec.f_center * omega)
    img = np.abs(dop).T  # (range, cross)
    if blank_dc:
        img[:, np.flatnonzero(fd == 0)] = 0.0
    top = img.max()
    if top > 0:
        img = img / top
    l_res = range_resolution(spec.bandwidth, prop_speed)
    if scene_radius is not None:
        walk = 2.0 * scene_radius * math.sin(0.5 * theta)
        if walk > 0.5 * l_res:
            warnings.warn(
                f"range walk {walk:.4g} m exceeds l_res/2 = {0.5 * l_res:.4g} m; "
                "no motion compensation is applied",
                RangeMigrationWarning,
                stacklevel=2,
            )
    return IsarImage(img, ranges, cross, l_res, cross_range_resolution(theta, spec.f_center, prop_speed),
                     theta, spec.f_center)


def find_blobs(image: IsarImage, threshold_db: float = -10.0) -> list[Blob]:
    """Connected regions above ``threshold_db`` (re. image max), strongest first.

    Centroids are magnitude-weighted.
    """
    px = image.pixels
    top = px.max()
    if top <= 0:
        return []
    mask = px >= top * 10 ** (threshold_db / 20)
    labels, n = ndimage.label(mask, structure=np.ones((3, 3)))
    blobs = []
    rr, cc = np.meshgrid(image.range_axis, image.cross_axis, indexing="ij")
    for lab in range(1, n + 1):
        sel = labels == lab
        wgt = px[sel]
        r = float(np.sum(rr[sel] * wgt) / wgt.sum())
        c = float(np.sum(cc[sel] * wgt) / wgt.sum())
        rows, cols = np.nonzero(sel)
        dr = (rows.max() - rows.min() + 1) * (image.range_axis[1] - image.range_axis[0])
        dc = (cols.max() - cols.min() + 1) * (image.cross_axis[1] - image.cross_axis[0])
        blobs.append(Blob(r, c, float(wgt.max()), int(sel.sum()), float(dr), float(dc)))
    blobs.sort(key=lambda b: -b.peak)
    return blobs
