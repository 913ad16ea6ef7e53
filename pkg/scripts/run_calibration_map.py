"""P1 frequency maps for the X, Ku and K band detunings."""

import argparse
from pathlib import Path

from _common import run
from oisl_radar.experiments import BAND_PRESETS


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("out/calibration"))
    args = ap.parse_args()
    for name, bp in BAND_PRESETS.items():
        rep = run("calibrate", None, args.out_dir / name,
                  "--set", f"drive.detuning={bp.detuning!r}", "--set", f"drive.xi_start={bp.xi_start!r}",
                  "--set", f"drive.xi_stop={bp.xi_stop!r}", "--set", f"drive.xi_step={bp.xi_step!r}")
        print(f"{name:>3}: detuning {bp.detuning / 1e9:+.0f} GHz, span [{rep['f0_min_hz'] / 1e9:.2f}, "
              f"{rep['f0_max_hz'] / 1e9:.2f}] GHz over {rep['n_points']} points, "
              f"secant deviation {rep['secant_deviation']:.3f}")


if __name__ == "__main__":
    cli()
