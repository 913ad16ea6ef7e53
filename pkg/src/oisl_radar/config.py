"""Scenario configuration: nested dataclasses, JSON files and dotted overrides."""

from __future__ import annotations

import copy
import dataclasses
import json
import math
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

MODES = ("ode", "fast")


@dataclass
class LaserSection:
    gamma_c: float = 5.36e11
    gamma_s: float = 5.96e9
    gamma_n: float = 7.53e9
    gamma_p: float = 1.91e10
    alpha_lw: float = 3.2
    pump_j: float = 1.222
    carrier_freq: float = 193.284e12


@dataclass
class ChirpSection:
    f_center: float = 16.5e9
    bandwidth: float = 3e9
    period: float = 593e-9
    rise_first: bool = True
    snap: bool = True  # move f_center onto the 1/T grid


@dataclass
class DriveSection:
    detuning: float = -4e9
    chirp: ChirpSection = field(default_factory=ChirpSection)
    profile_path: str | None = None
    calibration_path: str | None = None
    xi_start: float = 0.055
    xi_stop: float = 0.165
    xi_step: float = 0.005
    onset_step: float = 0.002
    onset_stop: float = 0.08
    # voltage-indexed maps through the injection modulator
    voltage_index: bool = False
    v_pi: float = 4.0
    v_bias: float = 0.0
    xi_max: float = 0.25


@dataclass
class SimSection:
    dt: float = 1e-12
    calib_duration: float = 30e-9
    store_every: int = 1
    linewidth: float = 100e3
    ode_linewidth: float = 0.0
    n_periods: int = 2
    rate: float | None = None  # fast-path output rate; None picks 4 f_high rounded to the ADC rate
    pd_bandwidth: float = 30e9
    profile_rate: float = 10e9
    ideal_tx: bool = False  # bypass the laser and transmit the ideal chirp


@dataclass
class FeedbackSection:
    enabled: bool = True
    delay_tau: float | None = None  # None matches the chirp period
    gain_kappa: float = 1.0  # fast path: locking gain
    ode_gain_kappa: float = 0.01  # rate equations: depth of the injection modulation
    tau_char: float | None = None
    settle_time: float | None = None


@dataclass
class ChannelSection:
    snr_db: float = 20.0
    prop_speed: float = 2.99792458e8
    range_decay: bool = False


@dataclass
class ModulatorSection:
    v_pi: float = 4.0
    bias: float = math.pi
    drive_scale_ref: float | None = None
    drive_scale_echo: float | None = None
    responsivity: float = 1.0


@dataclass
class AdcSection:
    rate: float = 500e6
    bits: int = 12
    full_scale: float = 1.0
    headroom: float = 0.5  # target peak of the AC-coupled beat, as a fraction of full scale


@dataclass
class ReceiverSection:
    modulator: ModulatorSection = field(default_factory=ModulatorSection)
    pd_bandwidth: float = 10e9
    lpf_cutoff: float = 100e6
    adc: AdcSection = field(default_factory=AdcSection)


@dataclass
class DspSection:
    window: str = "up"
    n_fft: int | None = None
    min_prominence_db: float = 3.0
    max_peaks: int = 10
    peak_floor_db: float = -30.0  # just above the Hann peak sidelobe
    # peaks below this range are mixer intermodulation, not targets
    min_range: float = 0.1
    blob_threshold_db: float = -10.0
    stft_window: int = 256
    stft_hop: int = 32


@dataclass
class IsarSection:
    t_int: float = 31.8e-3
    n_pulses: int | None = None  # None derives T_int / T
    batch: int = 1000
    blank_dc: bool = False  # zero-Doppler blanking would erase targets on the rotation axis
    range_margin: float = 0.15  # image rows kept beyond the scene radius


@dataclass
class SweepSection:
    axis: str = "bandwidth"
    points: list | None = None  # None uses the preset for the axis
    n_periods: int = 3


@dataclass
class ScenarioConfig:
    laser: LaserSection = field(default_factory=LaserSection)
    drive: DriveSection = field(default_factory=DriveSection)
    sim: SimSection = field(default_factory=SimSection)
    feedback: FeedbackSection = field(default_factory=FeedbackSection)
    scene: dict | str | None = None
    channel: ChannelSection = field(default_factory=ChannelSection)
    receiver: ReceiverSection = field(default_factory=ReceiverSection)
    dsp: DspSection = field(default_factory=DspSection)
    isar: IsarSection = field(default_factory=IsarSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    mode: str | None = None  # None picks the per-command default
    seed: int = 0
    out_dir: str = "out"

    def validate(self) -> "ScenarioConfig":
        if self.mode is not None and self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.dsp.window not in ("up", "down", "full"):
            raise ConfigError(f"dsp.window must be up, down or full, got {self.dsp.window!r}")
        for p in (self.drive.profile_path, self.drive.calibration_path):
            if p is not None and not Path(p).exists():
                raise ConfigError(f"referenced path does not exist: {p}")
        if isinstance(self.scene, str) and not Path(self.scene).exists():
            raise ConfigError(f"scene file does not exist: {self.scene}")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _hints(cls) -> dict:
    return typing.get_type_hints(cls)


def _is_dataclass_type(tp) -> bool:
    return isinstance(tp, type) and dataclasses.is_dataclass(tp)


def _build(cls, data: dict, path: str = ""):
    if not isinstance(data, dict):
        raise ConfigError(f"section {path or '<root>'} must be an object")
    hints = _hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in {path or '<root>'}: {sorted(unknown)}")
    kw = {}
    for name, value in data.items():
        tp = hints[name]
        if _is_dataclass_type(tp):
            kw[name] = _build(tp, value, f"{path}{name}.")
        else:
            kw[name] = _coerce(tp, value, path + name)
    return cls(**kw)


def _coerce(tp, value, where: str):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = typing.get_args(tp)
        if value is None and type(None) in args:
            return None
        for a in args:
            if a is type(None):
                continue
            try:
                return _coerce(a, value, where)
            except ConfigError:
                continue
        raise ConfigError(f"{where}: cannot interpret {value!r} as {tp}")
    if tp is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false", "1", "0"):
            return value.lower() in ("true", "1")
        raise ConfigError(f"{where}: expected a boolean, got {value!r}")
    if tp is int:
        if isinstance(value, bool):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        try:
            f = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: expected an integer, got {value!r}") from None
        if not f.is_integer():
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(f)
    if tp is float:
        if isinstance(value, bool):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if origin is list or tp is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        return list(value)
    if origin is dict or tp is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected an object, got {value!r}")
        return value
    return value


def from_dict(data: dict) -> ScenarioConfig:
    return _build(ScenarioConfig, copy.deepcopy(data)).validate()


def load_config(path: str | Path | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file does not exist: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    cfg = _build(ScenarioConfig, data)
    # relative paths inside a config file resolve against its directory
    base = p.resolve().parent
    for sec, key in (("drive", "profile_path"), ("drive", "calibration_path")):
        obj = getattr(cfg, sec)
        v = getattr(obj, key)
        if v is not None and not Path(v).is_absolute():
            setattr(obj, key, str(base / v))
    if isinstance(cfg.scene, str) and not Path(cfg.scene).is_absolute():
        cfg.scene = str(base / cfg.scene)
    return cfg.validate()


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: ScenarioConfig, assignment: str) -> ScenarioConfig:
    """Apply one ``a.b.c=value`` override; values parse as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    obj = cfg
    for i, name in enumerate(parts[:-1]):
        if isinstance(obj, dict):
            obj = obj.setdefault(name, {})
            continue
        if not dataclasses.is_dataclass(obj) or not hasattr(obj, name):
            raise ConfigError(f"unknown config path {'.'.join(parts[:i + 1])!r}")
        nxt = getattr(obj, name)
        if nxt is None and name == "scene":
            nxt = {}
            setattr(obj, name, nxt)
        obj = nxt
    leaf = parts[-1]
    value = _parse_value(text)
    if isinstance(obj, dict):
        obj[leaf] = value
    else:
        if not dataclasses.is_dataclass(obj) or leaf not in {f.name for f in dataclasses.fields(obj)}:
            raise ConfigError(f"unknown config path {key!r}")
        tp = _hints(type(obj))[leaf]
        if _is_dataclass_type(tp):
            raise ConfigError(f"{key!r} is a section; set one of its fields")
        setattr(obj, leaf, _coerce(tp, value, key))
    return cfg.validate()
