"""Linear-phase FIR low-pass shared by the photodetector, LPF and ADC models.

Kaiser-window design: pass-band edge at ``cutoff``, stop-band edge at
``1.25 * cutoff`` (clamped to Nyquist), 65 dB attenuation so that the
pass-band ripple stays far below 0.1 dB.  Filtering is group-delay
compensated, so outputs are time-aligned with inputs.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import signal

from .errors import NyquistError

STOP_RATIO = 1.25
ATTENUATION_DB = 65.0


@lru_cache(maxsize=64)
def _design(cutoff_norm: float, stop_norm: float) -> np.ndarray:
    # normalized to Nyquist = 1
    width = stop_norm - cutoff_norm
    numtaps, beta = signal.kaiserord(ATTENUATION_DB, width)
    numtaps |= 1  # odd length: integer group delay
    taps = signal.firwin(numtaps, 0.5 * (cutoff_norm + stop_norm), window=("kaiser", beta))
    taps.setflags(write=False)
    return taps


def lowpass_taps(cutoff: float, rate: float) -> np.ndarray:
    nyq = 0.5 * rate
    if not 0 < cutoff < nyq:
        raise NyquistError(f"cutoff {cutoff:g} Hz must lie in (0, {nyq:g}) Hz", cutoff=cutoff, rate=rate)
    stop = min(STOP_RATIO * cutoff, nyq)
    if (stop - cutoff) / nyq < 1e-6:
        raise NyquistError("cutoff too close to Nyquist for a finite filter", cutoff=cutoff, rate=rate)
    c = round(cutoff / nyq, 12)
    s = round(stop / nyq, 12)
    return _design(c, s)


def apply_fir(x: np.ndarray, taps: np.ndarray, pad: str = "edge", axis: int = -1) -> np.ndarray:
    """Zero-delay filtering of ``x`` along ``axis``.

    ``pad`` selects how the signal is extended past its ends: ``"edge"``
    repeats the end samples, ``"periodic"`` wraps around (exact for an
    integer number of periods), ``"zero"`` pads with zeros.
    """
    x = np.asarray(x)
    half = (len(taps) - 1) // 2
    mode = {"edge": "edge", "periodic": "wrap", "zero": "constant"}[pad]
    widths = [(0, 0)] * x.ndim
    widths[axis] = (half, half)
    xp = np.pad(x, widths, mode=mode)
    shape = [1] * x.ndim
    shape[axis] = len(taps)
    y = signal.oaconvolve(xp, taps.reshape(shape), mode="valid", axes=axis)
    return y


def lowpass(x: np.ndarray, cutoff: float, rate: float, pad: str = "edge", axis: int = -1) -> np.ndarray:
    return apply_fir(x, lowpass_taps(cutoff, rate), pad=pad, axis=axis)
