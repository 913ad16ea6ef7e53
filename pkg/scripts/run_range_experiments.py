"""Single-target, dual-target and high-resolution range measurements."""

import argparse
from pathlib import Path

from _common import run

CASES = ["range_single.json", "range_dual.json", "range_highres.json", "range_laser_fast.json"]


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("out/range"))
    args = ap.parse_args()
    for cfg in CASES:
        rep = run("range", cfg, args.out_dir / cfg.removesuffix(".json"))
        meas = ", ".join(f"{r:.4f}" for r in rep["measured_ranges_m"])
        exp = ", ".join(f"{r:.4f}" for r in rep["expected_ranges_m"])
        line = f"{cfg:<24} expected [{exp}] m, measured [{meas}] m, L_RES {rep['l_res_m']:.4f} m"
        if "delta_d_m" in rep and rep["delta_d_m"] is not None:
            line += f", delta_D {rep['delta_d_m']:.4f} m"
        print(line)


if __name__ == "__main__":
    cli()
