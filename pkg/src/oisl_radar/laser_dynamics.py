"""Optically injected slave laser: rate equations, P1 detection and calibration.

The slave-laser field is integrated in the master-laser frame as a complex
amplitude ``A = (1 + a) exp(i phi)`` normalized to the free-running value,
together with the normalized carrier deviation ``n``::

    dA/dt = 1/2 G (1 - i b) A - i Omega A + xi gamma_c
    G     = (gamma_c gamma_n / (gamma_s J)) n - gamma_p (|A|^2 - 1)
    dn/dt = -(gamma_s + gamma_n |A|^2) n - gamma_s J (|A|^2 - 1)
            + (gamma_s gamma_p J / gamma_c) |A|^2 (|A|^2 - 1)

with ``Omega = 2 pi f_i``.  Written in polar form the phase equation carries
``-2 pi f_i`` and the injection term ``-xi gamma_c sin(phi) / (1 + a)``.
Cartesian integration avoids the polar singularity at ``a = -1``.

Two field generators are provided: the full ODE path (fixed-step RK4, with
optional delayed optoelectronic feedback on the injection strength) and a
phenomenological fast path that maps injection strength to a P1 beat
frequency through a :class:`CalibrationMap`.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numba
import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    CalibrationError,
    DivergenceError,
    NoPeakError,
    NyquistError,
    OutOfSpanError,
    StepTooLargeError,
    TooShortSignalError,
)
from .parallel import ordered_map

MIN_TRANSIENT = 2e-9
SETTLE_PERIODS = 200
LOCK_RATIO = 50.0  # default tau / tau_char of the fast-path locking term


def _fingerprint(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class LaserParams:
    gamma_c: float = 5.36e11
    gamma_s: float = 5.96e9
    gamma_n: float = 7.53e9
    gamma_p: float = 1.91e10
    alpha_lw: float = 3.2
    pump_j: float = 1.222
    carrier_freq: float = 193.284e12

    def __post_init__(self):
        for name in ("gamma_c", "gamma_s", "gamma_n", "gamma_p", "alpha_lw", "pump_j", "carrier_freq"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @property
    def transient(self) -> float:
        """Start-up interval discarded by analysis operations."""
        return max(5.0 / self.gamma_s, MIN_TRANSIENT)

    def fingerprint(self) -> str:
        return _fingerprint(asdict(self))


@dataclass(frozen=True)
class InjectionDrive:
    """Injection strength samples; ``period`` enables periodic extension."""

    detuning: float
    xi: np.ndarray
    rate: float
    period: float | None = None

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if xi.size == 0 or not np.all(np.isfinite(xi)) or np.any(xi < 0):
            raise ValueError("xi samples must be finite and >= 0")
        if not self.rate > 0:
            raise ValueError("drive sample rate must be > 0")
        if self.period is not None and not self.period > 0:
            raise ValueError("drive period must be > 0")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @classmethod
    def constant(cls, detuning: float, xi: float, rate: float = 1e9) -> "InjectionDrive":
        return cls(detuning, np.array([float(xi)]), rate)

    def at(self, t: np.ndarray) -> np.ndarray:
        """Linearly interpolated drive at times ``t``.

        Periodic drives wrap; aperiodic drives hold their end values.
        """
        t = np.asarray(t, dtype=float)
        n = self.xi.size
        if n == 1:
            return np.full(t.shape, self.xi[0])
        ts = np.arange(n) / self.rate
        if self.period is None:
            return np.interp(t, ts, self.xi)
        tt = np.mod(t, self.period)
        ts = np.append(ts, self.period)
        vals = np.append(self.xi, self.xi[0])
        return np.interp(tt, ts, vals)


@dataclass(frozen=True)
class FeedbackLoop:
    """Delayed optoelectronic feedback.

    ``tau_char`` sets the fast-path locking time constant (default
    ``delay_tau / 50``); ``settle_time`` is the lock-in interval simulated
    before t = 0 in the fast path (default 200 delays).  ``ac_corner`` is
    the AC-coupling corner of the ODE-path detector.
    """

    delay_tau: float = 0.0
    gain_kappa: float = 0.0
    enabled: bool = False
    tau_char: float | None = None
    settle_time: float | None = None
    ac_corner: float = 100e6

    def __post_init__(self):
        if abs(self.gain_kappa) > 1:
            raise ValueError("|gain_kappa| must be <= 1")
        if self.enabled and not self.delay_tau > 0:
            raise ValueError("delay_tau must be > 0 when feedback is enabled")
        if self.tau_char is not None and not self.tau_char > 0:
            raise ValueError("tau_char must be > 0")

    @property
    def locking_time(self) -> float:
        return self.tau_char if self.tau_char is not None else self.delay_tau / LOCK_RATIO

    @property
    def settle(self) -> float:
        if not self.enabled:
            return 0.0
        return self.settle_time if self.settle_time is not None else SETTLE_PERIODS * self.delay_tau


@dataclass(frozen=True)
class FieldSeries:
    samples: np.ndarray
    rate: float
    carrier_freq: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if not self.rate > 0:
            raise ValueError("rate must be > 0")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
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
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def window(self, t_start: float, t_stop: float) -> "FieldSeries":
        i0 = max(0, int(math.ceil((t_start - self.t0) * self.rate - 1e-9)))
        i1 = min(self.samples.size, int(math.floor((t_stop - self.t0) * self.rate + 1e-9)))
        return FieldSeries(self.samples[i0:i1], self.rate, self.carrier_freq, self.t0 + i0 / self.rate)

    def optical_spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Power spectrum (Hann) versus offset from ``carrier_freq``."""
        x = self.samples * np.hanning(self.samples.size)
        p = np.abs(np.fft.fftshift(np.fft.fft(x))) ** 2
        f = np.fft.fftshift(np.fft.fftfreq(x.size, 1.0 / self.rate))
        return f, p / max(p.max(), np.finfo(float).tiny)


@dataclass(frozen=True)
class SimGrid:
    """Time grid; ``store_every`` decimates the stored ODE field."""

    dt: float = 1e-12
    duration: float = 30e-9
    seed: int = 0
    f_max: float = 25e9
    store_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.duration >= self.dt:
            raise ValueError("duration must be >= dt")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def check_step(self) -> None:
        if self.dt > 1.0 / (20.0 * self.f_max) * (1 + 1e-9):
            raise StepTooLargeError(
                f"dt = {self.dt:g} s exceeds 1/(20 f_max) = {1 / (20 * self.f_max):g} s",
                dt=self.dt,
                f_max=self.f_max,
            )

    def fingerprint(self) -> str:
        return _fingerprint(asdict(self))


@dataclass(frozen=True)
class DriveModulator:
    """Injection-strength control through a biased intensity modulator."""

    xi_max: float = 0.25
    v_pi: float = 4.0
    v_bias: float = 0.0

    def xi(self, volts: np.ndarray | float) -> np.ndarray:
        v = np.asarray(volts, dtype=float)
        return self.xi_max * np.abs(np.cos(np.pi * (v - self.v_bias) / (2.0 * self.v_pi)))


# ---------------------------------------------------------------- ODE path


@numba.njit(cache=True, nogil=True, inline="always")
def _rhs(ar, ai, n, xi, om, gc, gs, gn, gp, b, jj):
    inten = ar * ar + ai * ai
    g = (gc * gn / (gs * jj)) * n - gp * (inten - 1.0)
    dar = 0.5 * g * (ar + b * ai) + om * ai + xi * gc
    dai = 0.5 * g * (ai - b * ar) - om * ar
    dn = -(gs + gn * inten) * n - gs * jj * (inten - 1.0) + (gs * gp * jj / gc) * inten * (inten - 1.0)
    return dar, dai, dn


@numba.njit(cache=True, nogil=True, inline="always")
def _drive_at(xs, x_rate, x_period, t):
    n = xs.size
    if n == 1:
        return xs[0]
    if x_period > 0.0:
        t = t % x_period
        last = (n - 1) / x_rate
        if t >= last:
            return xs[n - 1] + (xs[0] - xs[n - 1]) * (t - last) / (x_period - last)
    pos = t * x_rate
    if pos <= 0.0:
        return xs[0]
    i = int(pos)
    if i >= n - 1:
        return xs[n - 1]
    f = pos - i
    return xs[i] + f * (xs[i + 1] - xs[i])


@numba.njit(cache=True, nogil=True)
def _rk4_kernel(xs, x_rate, x_period, om, dt, n_steps, store_every, gc, gs, gn, gp, b, jj,
                fb_on, kappa, delay_steps, ac_alpha, noise, noise_sigma, out):
    ar, ai, n = 1.0, 0.0, 0.0
    ilp = 1.0
    buf = np.zeros(max(delay_steps, 1))
    use_noise = noise.shape[0] > 0
    m = 0
    for k in range(n_steps):
        if k % store_every == 0:
            out[m] = complex(ar, ai)
            m += 1
        scale = 1.0
        if fb_on:
            slot = k % delay_steps
            delayed = buf[slot] if k >= delay_steps else 0.0
            scale = 1.0 + kappa * delayed
            inten = ar * ar + ai * ai
            ilp += ac_alpha * (inten - ilp)
            s = inten - ilp
            buf[slot] = min(1.0, max(-1.0, s))
        x0 = _drive_at(xs, x_rate, x_period, k * dt) * scale
        x1 = _drive_at(xs, x_rate, x_period, (k + 0.5) * dt) * scale
        x2 = _drive_at(xs, x_rate, x_period, (k + 1) * dt) * scale
        a1, b1, c1 = _rhs(ar, ai, n, x0, om, gc, gs, gn, gp, b, jj)
        a2, b2, c2 = _rhs(ar + 0.5 * dt * a1, ai + 0.5 * dt * b1, n + 0.5 * dt * c1, x1, om, gc, gs, gn, gp, b, jj)
        a3, b3, c3 = _rhs(ar + 0.5 * dt * a2, ai + 0.5 * dt * b2, n + 0.5 * dt * c2, x1, om, gc, gs, gn, gp, b, jj)
        a4, b4, c4 = _rhs(ar + dt * a3, ai + dt * b3, n + dt * c3, x2, om, gc, gs, gn, gp, b, jj)
        ar += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        ai += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        n += dt / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        if use_noise:
            ar += noise_sigma * noise[k, 0]
            ai += noise_sigma * noise[k, 1]
        if not (math.isfinite(ar) and math.isfinite(ai) and math.isfinite(n)):
            return k + 1
    return -1


def integrate_injected_laser(
    params: LaserParams,
    drive: InjectionDrive,
    feedback: FeedbackLoop | None,
    grid: SimGrid,
    noise_linewidth: float = 0.0,
) -> FieldSeries:
    """RK4 integration of the injected-laser model from the free-running state.

    Returns the complex field (master-laser frame) sampled every
    ``grid.store_every`` steps over ``[0, duration)``.  With feedback enabled
    the drive becomes ``xi(t) (1 + kappa s(t - tau))`` where ``s`` is the
    AC-coupled intensity clipped to [-1, 1].  ``noise_linewidth`` (Hz) turns
    on a Langevin term whose phase diffusion equals that of a Lorentzian
    line of the given width.
    """
    grid.check_step()
    feedback = feedback or FeedbackLoop()
    if feedback.enabled and feedback.delay_tau < grid.dt:
        raise ValueError("delay_tau must be >= dt")
    if noise_linewidth < 0:
        raise ValueError("noise_linewidth must be >= 0")
    n_steps = grid.n_steps
    if noise_linewidth > 0:
        rng = np.random.default_rng(grid.seed)
        noise = rng.standard_normal((n_steps, 2))
        sigma = math.sqrt(2 * math.pi * noise_linewidth * grid.dt)
    else:
        noise = np.empty((0, 2))
        sigma = 0.0
    delay_steps = max(1, int(round(feedback.delay_tau / grid.dt))) if feedback.enabled else 1
    ac_alpha = 1.0 - math.exp(-2 * math.pi * feedback.ac_corner * grid.dt)
    n_out = (n_steps + grid.store_every - 1) // grid.store_every
    out = np.empty(n_out, dtype=np.complex128)
    p = params
    bad = _rk4_kernel(
        drive.xi, drive.rate, drive.period or 0.0, 2 * math.pi * drive.detuning, grid.dt, n_steps, grid.store_every,
        p.gamma_c, p.gamma_s, p.gamma_n, p.gamma_p, p.alpha_lw, p.pump_j,
        feedback.enabled, feedback.gain_kappa, delay_steps, ac_alpha, noise, sigma, out,
    )
    if bad >= 0:
        raise DivergenceError(
            f"non-finite state at step {bad} (t = {bad * grid.dt:.4g} s)", step=bad, time=bad * grid.dt
        )
    return FieldSeries(out, 1.0 / (grid.dt * grid.store_every), p.carrier_freq + drive.detuning)


# ------------------------------------------------------------ P1 detection


def _refine_peak(p: np.ndarray, k: int) -> float:
    """Parabolic vertex offset (bins) through log power at k-1, k, k+1."""
    if k <= 0 or k >= p.size - 1:
        return 0.0
    y0, y1, y2 = np.log(np.maximum(p[k - 1:k + 2], np.finfo(float).tiny))
    den = y0 - 2 * y1 + y2
    if den >= 0:
        return 0.0
    return float(np.clip(0.5 * (y0 - y2) / den, -0.5, 0.5))


def detect_p1_frequency(
    field: FieldSeries,
    analysis_window: tuple[float, float] | None = None,
    min_ac: float = 1e-4,
) -> float:
    """Frequency (Hz) of the dominant non-DC tone of ``|E|^2``.

    The periodogram is Hann-windowed and zero-padded 4x; the peak is refined
    by a parabola through the log power of the three bins around it.  The
    default window skips the first ``MIN_TRANSIENT`` seconds.
    """
    if analysis_window is None:
        analysis_window = (field.t0 + MIN_TRANSIENT, field.t0 + field.duration)
    seg = field.window(*analysis_window)
    x = seg.intensity
    if x.size < 16:
        raise TooShortSignalError("analysis window holds fewer than 16 samples")
    mean = float(x.mean())
    x = x - mean
    if x.std() <= min_ac * max(abs(mean), np.finfo(float).tiny):
        raise NoPeakError("intensity is constant: no P1 oscillation")
    nfft = 4 * (1 << int(math.ceil(math.log2(x.size))))
    p = np.abs(np.fft.rfft(x * np.hanning(x.size), nfft)) ** 2
    dc_bins = 3 * nfft // x.size  # Hann main-lobe half width plus margin
    band = p[dc_bins:]
    k = int(np.argmax(band))
    if band[k] <= 10 ** 0.6 * np.median(band):
        raise NoPeakError("no periodogram bin exceeds the median floor by 6 dB")
    kk = k + dc_bins
    f0 = (kk + _refine_peak(p, kk)) * seg.rate / nfft
    if x.size / seg.rate < 50.0 / f0:
        raise TooShortSignalError(
            f"window {x.size / seg.rate:.3g} s shorter than 50 periods of {f0:.4g} Hz"
        )
    return f0


# ------------------------------------------------------------- calibration


@dataclass(frozen=True)
class CalibrationMap:
    """Monotone map from drive index (xi or volts) to P1 frequency."""

    index: np.ndarray
    f0: np.ndarray
    detuning: float
    params: LaserParams = field(default_factory=LaserParams)
    index_kind: str = "xi"
    modulator: DriveModulator | None = None
    grid_fingerprint: str = ""
    dropped: tuple = ()

    def __post_init__(self):
        idx = np.asarray(self.index, dtype=float).copy()
        f0 = np.asarray(self.f0, dtype=float).copy()
        if idx.shape != f0.shape or idx.ndim != 1:
            raise CalibrationError("index and f0 must be 1-D arrays of equal length")
        if idx.size < 4:
            raise CalibrationError(f"need >= 4 valid points, got {idx.size}", valid_points=int(idx.size))
        if self.index_kind not in ("xi", "volts"):
            raise ValueError("index_kind must be 'xi' or 'volts'")
        if self.index_kind == "volts" and self.modulator is None:
            raise ValueError("a volts-indexed map needs its DriveModulator")
        if np.any(np.diff(idx) <= 0):
            raise CalibrationError("index grid must be strictly increasing")
        bad = np.flatnonzero(np.diff(f0) <= 0)
        if bad.size:
            i = int(bad[0]) + 1
            raise CalibrationError(
                f"f0 not strictly increasing at index {i} ({self.index_kind} = {idx[i]:.6g})",
                index=i,
                value=float(idx[i]),
            )
        xi = self.modulator.xi(idx) if self.index_kind == "volts" else idx
        if np.any(np.diff(xi) <= 0):
            raise CalibrationError("voltage grid must map to strictly increasing xi")
        for a in (idx, f0, xi):
            a.setflags(write=False)
        object.__setattr__(self, "index", idx)
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "_xi", xi)
        object.__setattr__(self, "_fwd", PchipInterpolator(idx, f0, extrapolate=False))
        object.__setattr__(self, "_fwd_xi", PchipInterpolator(xi, f0, extrapolate=False))

    @property
    def xi(self) -> np.ndarray:
        return self._xi

    @property
    def span(self) -> tuple[float, float]:
        return float(self.index[0]), float(self.index[-1])

    @property
    def xi_span(self) -> tuple[float, float]:
        return float(self._xi[0]), float(self._xi[-1])

    @property
    def f_span(self) -> tuple[float, float]:
        return float(self.f0[0]), float(self.f0[-1])

    def _check(self, x: np.ndarray, lo: float, hi: float, what: str) -> None:
        tol = 1e-12 * max(abs(lo), abs(hi), 1.0)
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            raise OutOfSpanError(
                f"{what} outside calibrated span [{lo:.6g}, {hi:.6g}]: "
                f"[{float(np.min(x)):.6g}, {float(np.max(x)):.6g}]",
                lo=lo,
                hi=hi,
            )

    def f0_at(self, x: np.ndarray | float) -> np.ndarray:
        """P1 frequency at drive index ``x`` (refuses extrapolation)."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.span
        self._check(x, lo, hi, self.index_kind)
        return self._fwd(np.clip(x, lo, hi))

    def f0_at_xi(self, xi: np.ndarray | float) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        lo, hi = self.xi_span
        self._check(xi, lo, hi, "xi")
        return self._fwd_xi(np.clip(xi, lo, hi))

    def inverse(self, f: np.ndarray | float, iterations: int = 64) -> np.ndarray:
        """Drive index giving frequency ``f``: bisection on the forward interpolant."""
        f = np.asarray(f, dtype=float)
        flo, fhi = self.f_span
        self._check(f, flo, fhi, "frequency")
        lo = np.full(f.shape, self.index[0])
        hi = np.full(f.shape, self.index[-1])
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            below = self._fwd(mid) < f
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def local_spacing(self, x: float) -> float:
        """f0 spacing of the knot interval containing index ``x``."""
        i = int(np.clip(np.searchsorted(self.index, x) - 1, 0, self.index.size - 2))
        return float(self.f0[i + 1] - self.f0[i])

    def secant_deviation(self) -> float:
        """Largest knot deviation from the end-to-end secant, as a fraction of span."""
        i, f = self.index, self.f0
        line = f[0] + (f[-1] - f[0]) * (i - i[0]) / (i[-1] - i[0])
        return float(np.max(np.abs(f - line)) / (f[-1] - f[0]))

    def sidecar(self) -> dict:
        return {
            "index_kind": self.index_kind,
            "detuning_hz": self.detuning,
            "laser_params": asdict(self.params),
            "laser_fingerprint": self.params.fingerprint(),
            "grid_fingerprint": self.grid_fingerprint,
            "modulator": asdict(self.modulator) if self.modulator else None,
            "dropped": [list(d) for d in self.dropped],
            "f0_span_hz": list(self.f_span),
        }

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        head = "v_volts" if self.index_kind == "volts" else "xi"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([head, "f0_hz"])
            for x, f in zip(self.index, self.f0):
                w.writerow([repr(float(x)), repr(float(f))])
        path.with_suffix(".json").write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def from_csv(cls, path: str | Path) -> "CalibrationMap":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        with path.open() as fh:
            rows = list(csv.reader(fh))
        head = rows[0][0]
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        kind = "volts" if head == "v_volts" else "xi"
        mod = DriveModulator(**meta["modulator"]) if meta.get("modulator") else None
        return cls(
            data[:, 0],
            data[:, 1],
            float(meta["detuning_hz"]),
            LaserParams(**meta["laser_params"]),
            kind,
            mod,
            meta.get("grid_fingerprint", ""),
            tuple(tuple(d) for d in meta.get("dropped", [])),
        )


def _measure_point(params: LaserParams, detuning: float, xi: float, grid: SimGrid, window) -> float:
    fld = integrate_injected_laser(params, InjectionDrive.constant(detuning, xi), None, grid)
    return detect_p1_frequency(fld, window)


def _default_window(params: LaserParams, grid: SimGrid) -> tuple[float, float]:
    start = max(params.transient, grid.duration / 3.0)
    return start, grid.duration


def calibrate_p1_map(
    params: LaserParams,
    detuning: float,
    xi_grid: Sequence[float],
    grid: SimGrid,
    *,
    modulator: DriveModulator | None = None,
    analysis_window: tuple[float, float] | None = None,
    workers: int | None = None,
) -> CalibrationMap:
    """Sweep constant drives and tabulate the detected P1 frequency.

    With ``modulator`` the grid values are voltages mapped to xi through it.
    Points where detection fails are dropped (listed in ``map.dropped`` and
    warned about).  The sweep runs point-wise in threads; results are merged
    in grid order.
    """
    grid.check_step()
    idx = np.asarray(xi_grid, dtype=float)
    if np.any(np.diff(idx) <= 0):
        raise CalibrationError("calibration grid must be strictly increasing")
    xis = modulator.xi(idx) if modulator is not None else idx
    window = analysis_window or _default_window(params, grid)

    def run(x: float):
        try:
            return _measure_point(params, detuning, float(x), grid, window), None
        except (NoPeakError, DivergenceError, TooShortSignalError) as exc:
            return None, exc.code

    results = ordered_map(run, list(xis), workers)
    keep_i, keep_f, dropped = [], [], []
    for x, (f, err) in zip(idx, results):
        if f is None:
            dropped.append((float(x), err))
        else:
            keep_i.append(float(x))
            keep_f.append(f)
    if dropped:
        warnings.warn(f"dropped {len(dropped)} calibration point(s) outside P1: {dropped}", stacklevel=2)
    return CalibrationMap(
        np.array(keep_i),
        np.array(keep_f),
        detuning,
        params,
        "volts" if modulator is not None else "xi",
        modulator,
        grid.fingerprint(),
        tuple(dropped),
    )


@dataclass(frozen=True)
class P1Onset:
    xi: np.ndarray
    amplitude: np.ndarray
    noise_floor: float
    onset: float | None

    @property
    def oscillating(self) -> np.ndarray:
        return self.amplitude > 10.0 * self.noise_floor


def find_p1_onset(
    params: LaserParams,
    detuning: float,
    grid: SimGrid,
    xi_stop: float = 0.3,
    step: float = 0.002,
    workers: int | None = None,
) -> P1Onset:
    """Brute-force sweep of xi upward; onset is the first xi whose intensity
    oscillation amplitude (std) exceeds 10x the noise floor.

    The floor is the free-running (xi = 0) amplitude, bounded below by
    1e-6 of the mean intensity so that round-off does not count.
    """
    xis = np.round(np.arange(0.0, xi_stop + 0.5 * step, step), 12)
    window = _default_window(params, grid)

    def amp(x: float) -> tuple[float, float]:
        fld = integrate_injected_laser(params, InjectionDrive.constant(detuning, x), None, grid)
        i = fld.window(*window).intensity
        return float(i.std()), float(i.mean())

    res = ordered_map(amp, list(xis), workers)
    a = np.array([r[0] for r in res])
    floor = max(a[0], 1e-6 * res[0][1])
    above = np.flatnonzero(a > 10.0 * floor)
    onset = float(xis[above[0]]) if above.size else None
    return P1Onset(xis, a, floor, onset)


# --------------------------------------------------------------- fast path


@numba.njit(cache=True, nogil=True)
def _phase_kernel(noise, sigma, k_lock_dt, delay, eps, fb_on):
    n = noise.size
    theta = np.zeros(n + 1)
    i0 = int(math.floor(delay))
    frac = delay - i0
    for k in range(n):
        drift = 0.0
        if fb_on and k - i0 - 1 >= 0:
            td = (1.0 - frac) * theta[k - i0] + frac * theta[k - i0 - 1]
            drift = -k_lock_dt * math.sin(theta[k] - td + eps[k])
        theta[k + 1] = theta[k] + drift + sigma * noise[k]
    return theta[:n]


def _delayed(x: np.ndarray, delay: float) -> np.ndarray:
    """x[k - delay] by linear interpolation; NaN before the first sample."""
    k = np.arange(x.size) - delay
    out = np.interp(k, np.arange(x.size), x)
    out[k < 0] = np.nan
    return out


def synth_p1_field_fast(
    cmap: CalibrationMap,
    drive: InjectionDrive,
    linewidth: float,
    feedback: FeedbackLoop | None,
    grid: SimGrid,
    *,
    a0: float = 1.0,
    a1: float = 0.5,
    phase_rate: float | None = None,
) -> FieldSeries:
    """Phenomenological P1 field ``a0 + a1 exp(i [2 pi int f0(xi) dt + theta])``.

    ``theta`` is a Wiener phase of Lorentzian width ``linewidth``.  With
    feedback the phase obeys the delay-locking law::

        dtheta/dt = -(kappa / tau_char) sin(theta(t) - theta(t - tau) + eps(t))

    where ``eps`` is the round-trip mismatch of the deterministic phase,
    ``phi_d(t) - phi_d(t - tau)``, trimmed by its circular mean (the static
    loop phase).  A matched delay gives ``eps = 0``.  The locked state is
    reached during ``feedback.settle`` seconds simulated before t = 0.

    The phase process runs on a coarse grid (``phase_rate``, default
    ``min(1/dt, 4 GSa/s)``) and is linearly interpolated to the output grid.
    """
    if linewidth < 0:
        raise ValueError("linewidth must be >= 0")
    feedback = feedback or FeedbackLoop()
    rate = 1.0 / grid.dt
    xlo, xhi = cmap.xi_span
    cmap._check(drive.xi, xlo, xhi, "xi")
    n_out = int(round(grid.duration * rate))
    t_out = np.arange(n_out) * grid.dt
    f_out = cmap.f0_at_xi(drive.at(t_out))
    if f_out.max() >= 0.5 * rate:
        raise NyquistError(f"P1 frequency {f_out.max():.4g} Hz exceeds Nyquist of {rate:.4g} Sa/s")
    phi = np.empty(n_out)
    phi[0] = 0.0
    np.cumsum(0.5 * (f_out[1:] + f_out[:-1]) * (2 * np.pi * grid.dt), out=phi[1:])

    fb_on = feedback.enabled and feedback.gain_kappa != 0
    if linewidth == 0 and not fb_on:
        theta_out = np.zeros(n_out)
    else:
        rp = min(rate, phase_rate or 4e9)
        settle = feedback.settle if fb_on else 0.0
        n_set = int(math.ceil(settle * rp))
        n_c = n_set + int(math.ceil(grid.duration * rp)) + 2
        t_c = (np.arange(n_c) - n_set) / rp
        rng = np.random.default_rng(grid.seed)
        noise = rng.standard_normal(n_c)
        sigma = math.sqrt(2 * math.pi * linewidth / rp)
        eps = np.zeros(n_c)
        k_lock_dt = 0.0
        delay = 1.0
        if fb_on:
            f_c = cmap.f0_at_xi(drive.at(t_c))
            phid = np.concatenate(([0.0], np.cumsum(0.5 * (f_c[1:] + f_c[:-1]) * (2 * np.pi / rp))))
            delay = feedback.delay_tau * rp
            diff = phid - _delayed(phid, delay)
            ok = np.isfinite(diff)
            psi = float(np.angle(np.mean(np.exp(1j * diff[ok])))) if ok.any() else 0.0
            eps = np.where(ok, np.angle(np.exp(1j * (np.nan_to_num(diff) - psi))), 0.0)
            k_lock_dt = feedback.gain_kappa / feedback.locking_time / rp
        theta_c = _phase_kernel(noise, sigma, k_lock_dt, delay, eps, fb_on)
        theta_out = np.interp(t_out, t_c, theta_c)
    field_ = a0 + a1 * np.exp(1j * (phi + theta_out))
    return FieldSeries(field_, rate, cmap.params.carrier_freq + drive.detuning)
