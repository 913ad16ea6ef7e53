"""Shared helpers for the experiment drivers."""

from __future__ import annotations

import json
from pathlib import Path

from oisl_radar.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(command: str, config: str | None, out: Path, *extra: str) -> dict:
    argv = [command, "--out-dir", str(out)]
    if config:
        argv += ["--config", str(CONFIGS / config)]
    argv += list(extra)
    code = main(argv)
    if code != 0:
        raise SystemExit(code)
    return json.loads((out / "report.json").read_text())
