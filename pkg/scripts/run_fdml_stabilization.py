"""Matched, open-loop and mismatched feedback over a 50 us record."""

import argparse
from pathlib import Path

from _common import run

CONFIG = "waveform_fdml_50us.json"
PERIOD = 593e-9


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("out/fdml"))
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    args = ap.parse_args()
    cases = {
        "matched": [],
        "open": ["--set", "feedback.enabled=false"],
        "mismatched": ["--set", f"feedback.delay_tau={1.05 * PERIOD!r}"],
    }
    print(f"{'seed':>4} {'case':>10} {'R (dB)':>8} {'std dphi':>9} {'max dphi':>9}")
    for seed in args.seeds:
        for name, extra in cases.items():
            rep = run("waveform", CONFIG, args.out_dir / f"seed{seed}" / name, "--seed", str(seed), *extra)
            print(f"{seed:>4} {name:>10} {rep['comb_contrast_db']:8.1f} {rep['phase_dev_std_rad']:9.3f} "
                  f"{rep['phase_dev_max_rad']:9.3f}")


if __name__ == "__main__":
    cli()
