"""Carrier amplitude against distance through a conductive medium.

For each carrier band, recordings are synthesised at distances spanning a few
skin depths; the measured band peak is compared with amplitude * exp(-d/delta)
and a log-linear fit recovers the decay constant.

    python scripts/distance_decay.py --points 7 --out results
"""
from __future__ import annotations

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from emgesture.signal_io import Segment
from emgesture.spectrum import average_power_spectrum
from emgesture.synth import load_scenario, skin_depth, synth_recording

from _common import write_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None)
    ap.add_argument("--points", type=int, default=7)
    ap.add_argument("--max-depths", type=float, default=3.0)
    ap.add_argument("--duration", type=float, default=0.5)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    sc = load_scenario(args.config)
    # noise-free, jitter-free carriers so the peak tracks the decay alone
    base = replace(sc.synth, noise_std=0.0, interferers=())
    profile = replace(sc.profile("no-gesture"), jitter_std=0.0)
    sigma = base.conductivity_s_per_m
    rows = []
    for b_idx, band in enumerate(base.carrier_bands):
        delta = skin_depth(sigma, band.center_hz)
        d = np.linspace(0, args.max_depths * delta, args.points)
        amp = []
        for dist in d:
            rec = synth_recording(replace(base, distance_m=float(dist)), profile, args.duration)
            aps = average_power_spectrum(Segment(rec.samples, rec.sample_rate_hz, 0), sc.subwindow_s)
            n = len(aps)
            # a tone of amplitude a puts a^2 N^2 into the APS; sum the hump
            k0 = int(round(band.center_hz / aps.bin_width_hz))
            amp.append(np.sqrt(aps.power[k0 - 50:k0 + 51].sum()) / n)
        amp = np.array(amp)
        slope, icpt = np.polyfit(d, np.log(amp), 1)
        resid = np.log(amp) - (slope * d + icpt)
        r2 = 1 - resid.var() / np.log(amp).var()
        print(f"{band.center_hz / 1e3:6.1f} kHz  delta {delta:.4f} m  "
              f"fitted delta {-1 / slope:.4f} m  R^2 {r2:.6f}")
        expected = band.amplitude * np.exp(-d / delta)
        rows += [(b_idx, band.center_hz, x, a, e) for x, a, e in zip(d, amp, expected)]
    path = write_rows(Path(args.out) / "distance_decay.csv",
                      ["band", "center_hz", "distance_m", "measured_amplitude", "model_amplitude"], rows)
    print(f"-> {path}")


if __name__ == "__main__":
    main()
