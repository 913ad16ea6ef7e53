"""Two equal scatterers at a range of separations, in units of c/(4B)."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import ideal_chain  # noqa: E402
from oisl_radar.radar_dsp import extract_peaks, range_profile, range_resolution  # noqa: E402
from oisl_radar.waveform_synth import ChirpSpec  # noqa: E402

CASES = [
    (ChirpSpec(15e9, 2e9, 2.65e-6).snapped(), 100e6),
    (ChirpSpec(16.5e9, 3e9, 593e-9).snapped(), 500e6),
    (ChirpSpec(15e9, 4e9, 2.65e-6).snapped(), 100e6),
]


def n_peaks(spec, adc, r1, sep):
    l_res = range_resolution(spec.bandwidth)
    p = range_profile(ideal_chain(spec, [r1, r1 + sep], adc_rate=adc))
    return sum(r1 - l_res <= q.range <= r1 + sep + l_res for q in extract_peaks(p, 3.0))


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--factors", type=float, nargs="+", default=[0.5, 1.0, 1.1, 1.5, 2.0, 3.0, 4.5, 6.0])
    ap.add_argument("--r1", type=float, nargs="+", default=[0.45, 0.6, 0.85])
    args = ap.parse_args()
    print("B (GHz)  " + "  ".join(f"{f:>5.1f}" for f in args.factors) + "   (resolved / trials)")
    for spec, adc in CASES:
        l_res = range_resolution(spec.bandwidth)
        cells = []
        for f in args.factors:
            hits = sum(n_peaks(spec, adc, r1, f * l_res) >= 2 for r1 in args.r1)
            cells.append(f"{hits}/{len(args.r1)}")
        print(f"{spec.bandwidth / 1e9:7.0f}  " + "  ".join(f"{c:>5}" for c in cells))


if __name__ == "__main__":
    cli()
