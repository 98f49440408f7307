"""Accuracy with no denoising, whole-spectrum subtraction and mode-wise subtraction.

Uses the bundled ablation scenario (3 dB band SNR plus broadened ambient
interferers beside each carrier) unless another config is given.

    python scripts/denoise_ablation.py --seeds 10 --out results
"""
from __future__ import annotations

import argparse
import time
import warnings
from pathlib import Path

import numpy as np

from emgesture.ml import ForestParams, evaluate, rf_train, train_test_split
from emgesture.pipeline import scenario_dataset, scenario_spectra
from emgesture.synth import bundled_scenario_path, load_scenario
from emgesture.vmd import VmdConvergenceWarning

from _common import write_rows

MODES = ("raw", "plain", "vmd")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None, help="scenario JSON (default: bundled ablation)")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--data-seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    warnings.simplefilter("ignore", VmdConvergenceWarning)

    sc = load_scenario(args.config or bundled_scenario_path("ablation"))
    t0 = time.perf_counter()
    spectra = scenario_spectra(sc, args.data_seed)
    print(f"generated {len(spectra.gesture)} spectra in {time.perf_counter() - t0:.0f}s")

    rows = []
    for mode in MODES:
        t0 = time.perf_counter()
        ds = scenario_dataset(sc, args.data_seed, mode, spectra)
        accs = []
        for seed in range(args.seeds):
            train, test = train_test_split(ds, 0.2, seed)
            accs.append(evaluate(rf_train(train, ForestParams(seed=seed)), test).accuracy)
            rows.append((seed, mode, accs[-1]))
        accs = np.array(accs)
        print(f"{mode:6s} {accs.mean():.4f} +- {accs.std():.4f}  ({time.perf_counter() - t0:.0f}s)")
    path = write_rows(Path(args.out) / "denoise_ablation.csv", ["seed", "mode", "accuracy"], rows)
    print(f"-> {path}")


if __name__ == "__main__":
    main()
