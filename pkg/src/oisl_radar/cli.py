"""Command-line front end: ``oisl-radar {calibrate,waveform,range,isar,sweep}``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import experiments
from .config import MODES, apply_override, load_config
from .errors import RadarSimError

COMMANDS = {
    "calibrate": experiments.run_calibrate,
    "waveform": experiments.run_waveform,
    "range": experiments.run_range,
    "isar": experiments.run_isar,
    "sweep": experiments.run_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oisl-radar", description="RF-source-free photonic radar simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="scenario JSON file")
        p.add_argument("--out-dir", type=Path, help="artifact directory (overrides out_dir)")
        p.add_argument("--mode", choices=MODES, help="laser model")
        p.add_argument("--seed", type=int, help="root random seed")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config leaf by dotted path; repeatable")
        if name == "sweep":
            p.add_argument("--axis", choices=sorted(experiments.SWEEP_PRESETS), help="sweep axis")
    return ap


def _summary(report: dict) -> str:
    cmd = report.get("command")
    if cmd == "calibrate":
        return (f"f0 span [{report['f0_min_hz'] / 1e9:.3f}, {report['f0_max_hz'] / 1e9:.3f}] GHz, "
                f"Hopf onset xi = {report['hopf_onset_xi']}")
    if cmd == "range":
        meas = ", ".join(f"{r:.4f}" for r in report["measured_ranges_m"])
        return f"measured ranges [{meas}] m, L_RES = {report['l_res_m']:.5f} m, clips = {report['adc_clip_count']}"
    if cmd == "isar":
        return (f"theta = {report['theta_rad']:.4f} rad, l_res = {report['l_res_m']:.5f} m, "
                f"c_res = {report['c_res_m']:.5f} m, {len(report['blobs'])} blob(s)")
    if cmd == "waveform":
        return (f"IF center {report['if_center_hz'] / 1e9:.3f} GHz, bandwidth {report['if_bandwidth_hz'] / 1e9:.3f} GHz, "
                f"RMSE {100 * report['if_rmse_frac']:.2f}% of B")
    if cmd == "sweep":
        return f"{len(report['points'])} point(s) on axis {report['axis']}"
    return ""


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for s in args.set:
            apply_override(cfg, s)
        if args.mode:
            cfg.mode = args.mode
        if args.seed is not None:
            cfg.seed = args.seed
        if getattr(args, "axis", None):
            cfg.sweep.axis = args.axis
        out = Path(args.out_dir) if args.out_dir else Path(cfg.out_dir)
        t0 = time.perf_counter()
        report = COMMANDS[args.command](cfg.validate(), out)
    except RadarSimError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return 1
    print(f"{args.command}: {_summary(report)} ({time.perf_counter() - t0:.1f} s) -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
