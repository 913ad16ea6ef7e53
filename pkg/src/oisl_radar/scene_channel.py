"""Point-scatterer scenes, turntable kinematics and echo synthesis."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DelayExceedsWindowError, ZeroSignalError
from .waveform_synth import Waveform

C = 2.99792458e8


def derive_seed(root: int, stage: str, index: int = 0) -> int:
    """Per-stage seed: hash of (root seed, stage name, index)."""
    tag = int.from_bytes(hashlib.sha256(stage.encode()).digest()[:4], "little")
    return int(np.random.SeedSequence([int(root), tag, int(index)]).generate_state(1)[0])


@dataclass(frozen=True)
class Scatterer:
    range0: float
    cross0: float = 0.0
    reflectivity: float = 1.0

    def __post_init__(self):
        if not self.range0 > 0:
            raise ValueError("range0 must be > 0")
        if not self.reflectivity >= 0:
            raise ValueError("reflectivity must be >= 0")


@dataclass(frozen=True)
class Scene:
    scatterers: tuple[Scatterer, ...] = ()
    platform_distance: float = 1.0
    rotation_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        if self.rotation_rate != 0 and not self.platform_distance > 0:
            raise ValueError("platform_distance must be > 0 for a rotating scene")

    @property
    def radius(self) -> float:
        """Largest scatterer distance from the rotation center."""
        if not self.scatterers:
            return 0.0
        return max(math.hypot(s.cross0, s.range0 - self.platform_distance) for s in self.scatterers)

    def to_json(self, snr_db: float | None = None) -> dict:
        d = {
            "platform_distance_m": self.platform_distance,
            "rotation_rate_deg_s": math.degrees(self.rotation_rate),
            "scatterers": [
                {"range0_m": s.range0, "cross0_m": s.cross0, "reflectivity": s.reflectivity}
                for s in self.scatterers
            ],
        }
        if snr_db is not None:
            d["snr_db"] = snr_db
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Scene":
        if "preset" in d:
            return preset_scene(d["preset"], **d.get("preset_args", {}))
        scat = [Scatterer(s["range0_m"], s.get("cross0_m", 0.0), s.get("reflectivity", 1.0))
                for s in d.get("scatterers", [])]
        return cls(tuple(scat), d.get("platform_distance_m", 1.0), math.radians(d.get("rotation_rate_deg_s", 0.0)))

    @classmethod
    def load(cls, path: str | Path) -> "Scene":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ChannelParams:
    snr_db: float = math.inf
    prop_speed: float = C
    range_decay: bool = False
    reference_range: float = 1.0

    def __post_init__(self):
        if not self.prop_speed > 0:
            raise ValueError("prop_speed must be > 0")


def platform_pose(scene: Scene, t: float) -> np.ndarray:
    """(range, cross) of every scatterer after rotating by ``omega t``."""
    if not scene.scatterers:
        return np.zeros((0, 2))
    xy = np.array([[s.cross0, s.range0 - scene.platform_distance] for s in scene.scatterers])
    a = scene.rotation_rate * t
    c, s = math.cos(a), math.sin(a)
    x = c * xy[:, 0] - s * xy[:, 1]
    y = s * xy[:, 0] + c * xy[:, 1]
    return np.column_stack([scene.platform_distance + y, x])


def echo_delays(scene: Scene, t: float, params: ChannelParams) -> tuple[np.ndarray, np.ndarray]:
    """Round-trip delays and amplitudes frozen at time ``t`` (stop-and-go)."""
    pose = platform_pose(scene, t)
    r = pose[:, 0]
    amp = np.array([s.reflectivity for s in scene.scatterers])
    if params.range_decay and r.size:
        amp = amp * (params.reference_range / r) ** 2
    return 2.0 * r / params.prop_speed, amp


def circular_delay(x: np.ndarray, delay_samples: np.ndarray | float) -> np.ndarray:
    """Band-limited circular delay of ``x`` by (fractional) sample counts.

    Multiplies the spectrum by a linear phase ramp, i.e. ideal sinc
    interpolation of the periodic extension of ``x``.  A vector of delays
    returns one delayed copy per row.
    """
    n = x.size
    X = np.fft.rfft(x)
    k = np.arange(X.size)
    d = np.atleast_1d(np.asarray(delay_samples, dtype=float))[:, None]
    ramp = np.exp(-2j * np.pi * k[None, :] * d / n)
    if n % 2 == 0:
        # keep the Nyquist bin real so the output stays real
        ramp[:, -1] = np.cos(np.pi * d[:, 0])
    return np.fft.irfft(X[None, :] * ramp, n)


def synthesize_echo(tx: Waveform, scene: Scene, pulse_start: float, params: ChannelParams,
                    seed: int | None = 0) -> Waveform:
    """Sum of delayed, scaled copies of ``tx`` plus AWGN.

    ``tx`` is one (or an integer number of) period(s) of a periodic signal;
    delays wrap around.  Noise power is set relative to the strongest
    scatterer's echo power; ``snr_db = inf`` disables it.
    """
    delays, amps = echo_delays(scene, pulse_start, params)
    if delays.size and delays.max() > tx.duration:
        raise DelayExceedsWindowError(
            f"round-trip delay {delays.max():.4g} s exceeds waveform duration {tx.duration:.4g} s"
        )
    echo = np.zeros(tx.samples.size)
    if delays.size:
        copies = circular_delay(tx.samples, delays * tx.rate)
        echo = amps @ copies
    out = tx.with_samples(echo)
    if math.isfinite(params.snr_db) and amps.size and amps.max() > 0:
        p_sig = float(amps.max()) ** 2 * tx.power
        out = _add_noise(out, p_sig / 10 ** (params.snr_db / 10), seed)
    return out


def _add_noise(w: Waveform, noise_power: float, seed: int | None) -> Waveform:
    rng = np.random.default_rng(seed)
    return w.with_samples(w.samples + math.sqrt(noise_power) * rng.standard_normal(w.samples.size))


def add_awgn(w: Waveform, snr_db: float, seed: int | None = 0) -> Waveform:
    """White Gaussian noise at ``snr_db`` below the waveform's mean power."""
    if not math.isfinite(snr_db) and snr_db > 0:
        return w
    p = w.power
    if p == 0:
        raise ZeroSignalError("SNR undefined for an all-zero waveform")
    return _add_noise(w, p / 10 ** (snr_db / 10), seed)


# ----------------------------------------------------------------- presets

_AIRPLANE = [
    # (cross, range offset) in metres about the rotation center; nose at +range
    (0.00, 0.15), (0.00, 0.10), (0.00, 0.05), (0.00, 0.00), (0.00, -0.05), (0.00, -0.10),
    (0.00, -0.15),
    (-0.05, 0.02), (-0.10, 0.00), (-0.15, -0.02), (0.05, 0.02), (0.10, 0.00), (0.15, -0.02),
    (-0.05, -0.12), (-0.08, -0.14), (0.05, -0.12), (0.08, -0.14),
    (-0.12, -0.01), (0.12, -0.01), (0.00, 0.13),
]


def preset_scene(name: str, platform_distance: float = 1.15, rotation_deg_s: float = 900.0,
                 **kw) -> Scene:
    """Named scenes: ``single``, ``center``, ``two_cross``, ``triangle``, ``airplane``."""
    d = platform_distance
    if name == "center":
        pts = [(0.0, 0.0)]
    elif name == "single":
        pts = [(kw.get("cross", 0.0), kw.get("offset", 0.0))]
    elif name == "two_cross":
        sep = kw.get("separation", 0.30)
        pts = [(-sep / 2, 0.0), (sep / 2, 0.0)]
    elif name == "triangle":
        side = kw.get("side", 0.30)
        h = side * math.sqrt(3) / 2
        verts = [(-side / 2, -h / 3), (side / 2, -h / 3), (0.0, 2 * h / 3)]
        mids = [((verts[i][0] + verts[(i + 1) % 3][0]) / 2, (verts[i][1] + verts[(i + 1) % 3][1]) / 2)
                for i in range(3)]
        pts = verts + mids
    elif name == "airplane":
        pts = _AIRPLANE
    else:
        raise ValueError(f"unknown scene preset {name!r}")
    scat = tuple(Scatterer(d + y, x, 1.0) for x, y in pts)
    return Scene(scat, d, math.radians(rotation_deg_s))
