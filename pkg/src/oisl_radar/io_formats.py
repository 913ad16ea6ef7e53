"""Artifact writers: canonical JSON and 16-bit binary PGM (P5)."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: str | Path, obj) -> Path:
    """Deterministic JSON (sorted keys, non-finite floats as strings)."""
    path = Path(path)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_pgm16(path: str | Path, image: np.ndarray, meta: dict | None = None) -> Path:
    """Min-max scale ``image`` to 0..65535 and write a P5 PGM, rows first.

    ``meta`` (axes etc.) goes to a JSON sidecar next to the image.
    """
    path = Path(path)
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("PGM image must be 2-D")
    lo, hi = float(img.min()), float(img.max())
    scaled = np.zeros(img.shape) if hi <= lo else (img - lo) / (hi - lo)
    data = np.round(scaled * 65535).astype(">u2")
    h, w = data.shape
    with path.open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())
    side = {"min": lo, "max": hi, "width": w, "height": h}
    if meta:
        side.update(meta)
    write_json(path.with_suffix(".json"), side)
    return path


def read_pgm16(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not raw[end:end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = (int(f) for f in fields[1:])
    body = raw[pos + 1:]  # exactly one whitespace byte after maxval
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(body, dtype=dtype, count=w * h).reshape(h, w)
