"""Exception types shared by every stage of the simulator.

Each error carries a short machine-readable ``code`` so the CLI can emit a
JSON error record without parsing messages.
"""

from __future__ import annotations


class RadarSimError(ValueError):
    code = "radar-sim-error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


def _jsonable(v):
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)


class StepTooLargeError(RadarSimError):
    code = "step-too-large"


class DivergenceError(RadarSimError):
    code = "non-finite-state"


class NoPeakError(RadarSimError):
    code = "no-peak"


class CalibrationError(RadarSimError):
    code = "calibration-failed"


class OutOfSpanError(RadarSimError):
    code = "out-of-span"


class BandNotReachableError(RadarSimError):
    code = "band-not-reachable"


class NyquistError(RadarSimError):
    code = "bandwidth-exceeds-nyquist"


class RateMismatchError(RadarSimError):
    code = "rate-mismatch"


class RateNotDivisibleError(RadarSimError):
    code = "rate-not-divisible"


class DelayExceedsWindowError(RadarSimError):
    code = "delay-exceeds-window"


class ZeroSignalError(RadarSimError):
    code = "zero-signal"


class TooShortSignalError(RadarSimError):
    code = "too-short-signal"


class DegenerateWindowError(RadarSimError):
    code = "degenerate-window"


class AlignmentError(RadarSimError):
    code = "alignment-failure"


class SpacingBelowResolutionError(RadarSimError):
    code = "spacing-below-resolution"


class NonUniformGridError(RadarSimError):
    code = "non-uniform-slow-time"


class ConfigError(RadarSimError):
    code = "config-error"
