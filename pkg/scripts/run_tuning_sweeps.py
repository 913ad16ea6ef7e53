"""Center, bandwidth, band and period reconfiguration sweeps."""

import argparse
from pathlib import Path

from _common import run


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("out/sweeps"))
    ap.add_argument("--axes", nargs="+", default=["center", "bandwidth", "band", "period"])
    args = ap.parse_args()
    for axis in args.axes:
        rep = run("sweep", f"sweep_{axis}.json", args.out_dir / axis)
        print(f"[{axis}]")
        for p in rep["points"]:
            if p.get("error"):
                print(f"  {p['point']}: {p['error']}")
                continue
            print(f"  {p['point']}: center {p['if_center_hz'] / 1e9:.3f} GHz, bandwidth "
                  f"{p['if_bandwidth_hz'] / 1e9:.3f} GHz, period {p['if_period_s'] * 1e6:.4f} us, "
                  f"RMSE {100 * p['if_rmse_frac']:.2f}% of B")


if __name__ == "__main__":
    cli()
