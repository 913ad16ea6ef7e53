"""Range-Doppler images of the turntable scenes."""

import argparse
from pathlib import Path

from _common import run

CASES = ["isar_center.json", "isar_two_cross.json", "isar_triangle.json", "isar_airplane.json"]


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("out/isar"))
    ap.add_argument("--cases", nargs="+", default=CASES)
    args = ap.parse_args()
    for cfg in args.cases:
        rep = run("isar", cfg, args.out_dir / cfg.removesuffix(".json"))
        print(f"{cfg:<22} theta {rep['theta_rad']:.4f} rad, l_res {rep['l_res_m']:.4f} m, "
              f"c_res {rep['c_res_m']:.4f} m, {len(rep['blobs'])} blob(s)")
        for b in rep["blobs"][:8]:
            print(f"    range {b['range']:.4f} m, cross {b['cross']:+.4f} m, peak {b['peak']:.2f}")


if __name__ == "__main__":
    cli()
