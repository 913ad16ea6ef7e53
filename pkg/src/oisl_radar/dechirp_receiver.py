"""Photonic de-chirp receiver: dual-drive MZM mixer, photodiode, LPF and ADC.

The modulator is modeled by its two-arm interference law.  With arm phases
``pi V_ref / V_pi`` and ``pi V_echo / V_pi + bias`` the detected power is
``(1 + cos(pi (V_ref - V_echo) / V_pi - bias)) / 2``; at the minimum
transmission point (bias = pi) this is ``(1 - cos(pi dV / V_pi)) / 2``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fir
from .errors import RateMismatchError, RateNotDivisibleError
from .waveform_synth import ChirpSpec, Waveform

REF_PEAK = 0.25  # rad, default peak phase excursion of the reference arm
ECHO_PEAK = 0.05  # rad, echo arm per unit reflectivity; keeps echo-echo beats 14 dB down


def _default_scale(v_pi: float, peak: float) -> float:
    # unit-RMS chirps peak at sqrt(2)
    return peak * v_pi / (math.pi * math.sqrt(2.0))


@dataclass(frozen=True)
class ModulatorParams:
    v_pi: float = 4.0
    bias: float = math.pi
    drive_scale_ref: float | None = None
    drive_scale_echo: float | None = None
    responsivity: float = 1.0

    def __post_init__(self):
        if not self.v_pi > 0:
            raise ValueError("v_pi must be > 0")
        if self.drive_scale_ref is None:
            object.__setattr__(self, "drive_scale_ref", _default_scale(self.v_pi, REF_PEAK))
        if self.drive_scale_echo is None:
            object.__setattr__(self, "drive_scale_echo", _default_scale(self.v_pi, ECHO_PEAK))

    @property
    def a_ref(self) -> float:
        """Reference-arm phase per unit waveform amplitude (rad)."""
        return math.pi * self.drive_scale_ref / self.v_pi

    @property
    def a_echo(self) -> float:
        return math.pi * self.drive_scale_echo / self.v_pi


@dataclass(frozen=True)
class AdcConfig:
    rate: float = 500e6
    bits: int = 12
    full_scale: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("ADC rate must be > 0")
        if not 1 <= self.bits <= 24:
            raise ValueError("bits must be in [1, 24]")
        if not self.full_scale > 0:
            raise ValueError("full_scale must be > 0")

    @property
    def lsb(self) -> float:
        return 2.0 * self.full_scale / 2**self.bits


@dataclass(frozen=True)
class DechirpedSignal:
    samples: np.ndarray
    rate: float
    chirp: ChirpSpec
    clip_count: int = 0
    t0: float = 0.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be > 0")
        s = np.asarray(self.samples, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.rate

    def sidecar(self) -> dict:
        c = self.chirp
        return {"rate_hz": self.rate, "bandwidth_hz": c.bandwidth, "period_s": c.period,
                "f_center_hz": c.f_center, "rise_first": c.rise_first, "t0_s": self.t0,
                "clip_count": int(self.clip_count)}

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
    def from_csv(cls, path: str | Path) -> "DechirpedSignal":
        path = Path(path)
        m = json.loads(path.with_suffix(".json").read_text())
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        spec = ChirpSpec(m["f_center_hz"], m["bandwidth_hz"], m["period_s"], m.get("rise_first", True))
        return cls(data[:, 1], m["rate_hz"], spec, m.get("clip_count", 0), m.get("t0_s", 0.0))


def _pad_mode(w: Waveform) -> str:
    return "periodic" if w.periodic else "edge"


def dmzm_dechirp(reference: Waveform, echo: Waveform, mod: ModulatorParams, pd_bandwidth: float) -> Waveform:
    """Photocurrent of the dual-drive MZM driven by reference and echo."""
    if reference.rate != echo.rate:
        raise RateMismatchError(f"rates differ: {reference.rate:g} vs {echo.rate:g} Sa/s")
    if reference.samples.size != echo.samples.size or abs(reference.t0 - echo.t0) > 0.5 / reference.rate:
        raise RateMismatchError("reference and echo must share the same time base")
    dphi = mod.a_ref * reference.samples - mod.a_echo * echo.samples
    i = 0.5 * mod.responsivity * (1.0 + np.cos(dphi - mod.bias))
    periodic = reference.periodic and echo.periodic
    y = fir.lowpass(i, pd_bandwidth, reference.rate, pad="periodic" if periodic else "edge")
    return Waveform(y, reference.rate, reference.t0, periodic)


def lowpass_filter(w: Waveform, cutoff: float) -> Waveform:
    """Linear-phase FIR low-pass, group delay compensated."""
    return w.with_samples(fir.lowpass(w.samples, cutoff, w.rate, pad=_pad_mode(w)))


def decimation_factor(rate_in: float, rate_out: float) -> int:
    if rate_out > rate_in * (1 + 1e-12):
        raise RateNotDivisibleError(f"ADC rate {rate_out:g} exceeds input rate {rate_in:g}")
    m = rate_in / rate_out
    mi = int(round(m))
    if abs(m - mi) > 1e-9 * m:
        raise RateNotDivisibleError(
            f"input rate {rate_in:g} is not an integer multiple of ADC rate {rate_out:g}", ratio=m
        )
    return mi


def quantize(v: np.ndarray, cfg: AdcConfig) -> tuple[np.ndarray, np.ndarray, int]:
    """Mid-rise quantizer: returns (codes, reconstructed volts, clip count)."""
    v = np.asarray(v, dtype=float)
    half = 2 ** (cfg.bits - 1)
    raw = np.floor(v / cfg.lsb)
    clips = int(np.count_nonzero((raw < -half) | (raw > half - 1)))
    codes = np.clip(raw, -half, half - 1).astype(np.int64)
    return codes, (codes + 0.5) * cfg.lsb, clips


def adc_sample(w: Waveform, cfg: AdcConfig, seed: int | None = None, chirp: ChirpSpec | None = None,
               dither_lsb: float = 0.0) -> DechirpedSignal:
    """Anti-alias at 0.45 fs, decimate, quantize with full-scale clipping.

    ``dither_lsb`` adds seeded Gaussian dither (in LSB RMS) before
    quantization; the default is none.
    """
    m = decimation_factor(w.rate, cfg.rate)
    x = w.samples
    if m > 1:
        x = fir.lowpass(x, 0.45 * cfg.rate, w.rate, pad=_pad_mode(w))[::m]
    if dither_lsb > 0:
        x = x + dither_lsb * cfg.lsb * np.random.default_rng(seed).standard_normal(x.size)
    _, v, clips = quantize(x, cfg)
    if chirp is None:
        chirp = ChirpSpec(1.0, 1.0, 1.0)
    return DechirpedSignal(v, cfg.rate, chirp, clips, w.t0)


def dechirp_baseband(
    chirp: ChirpSpec,
    delays: np.ndarray,
    amplitudes: np.ndarray,
    mod: ModulatorParams,
    rate: float,
    duration: float | None = None,
    t0: float = 0.0,
) -> np.ndarray:
    """Low-frequency photocurrent of the MZM mixer for ideal chirp echoes.

    Second-order expansion of the interference law for unit-RMS chirps
    ``r = sqrt(2) cos(Phi(t))`` and echoes ``sum_k rho_k r(t - tau_k)``,
    keeping only terms below the carrier::

        i = R/4 [ a_r^2 + a_e^2 sum rho_k^2
                  - 2 a_r a_e sum_k rho_k cos(Phi(t) - Phi(t - tau_k))
                  + 2 a_e^2 sum_{j<k} rho_j rho_k cos(Phi(t - tau_j) - Phi(t - tau_k)) ]

    ``delays`` may be 1-D (one pulse) or 2-D ``(pulses, scatterers)``; the
    result then has one row per pulse.  Valid at bias = pi and small drive.
    """
    delays = np.asarray(delays, dtype=float)
    amps = np.asarray(amplitudes, dtype=float)
    single = delays.ndim == 1
    d2 = np.atleast_2d(delays)
    a2 = np.broadcast_to(np.atleast_2d(amps), d2.shape)
    n = int(round((duration if duration is not None else chirp.period) * rate))
    t = t0 + np.arange(n) / rate
    ar, ae = mod.a_ref, mod.a_echo
    # unwrapped carrier cycles keep the phase differences exact
    cyc_t = chirp.cycles(t)[None, :]
    n_s = d2.shape[1]
    cyc_k = [chirp.cycles(t[None, :] - d2[:, k, None]) for k in range(n_s)]
    acc = np.repeat(0.5 * ar * ar + 0.5 * ae * ae * np.sum(a2**2, axis=1)[:, None], n, axis=1)
    for k in range(n_s):
        acc -= ar * ae * a2[:, k, None] * np.cos(2 * np.pi * (cyc_t - cyc_k[k]))
    for j in range(n_s):
        for k in range(j + 1, n_s):
            acc += ae * ae * (a2[:, j] * a2[:, k])[:, None] * np.cos(2 * np.pi * (cyc_k[j] - cyc_k[k]))
    out = 0.5 * mod.responsivity * acc
    return out[0] if single else out
