"""Random forest against KNN baselines on the reference scenario.

Generates the 414-sample reference dataset once, denoises it mode-wise, and
scores each classifier over several seeded 80/20 splits.

    python scripts/classifier_comparison.py --seeds 10 --out results
"""
from __future__ import annotations

import argparse
import time
import warnings
from pathlib import Path

import numpy as np

from emgesture.ml import ForestParams, KNNClassifier, evaluate, rf_train, train_test_split
from emgesture.pipeline import scenario_dataset, scenario_spectra
from emgesture.synth import load_scenario
from emgesture.vmd import VmdConvergenceWarning

from _common import write_rows

CLASSIFIERS = {
    "rf": lambda tr, s: rf_train(tr, ForestParams(seed=s)),
    "knn": lambda tr, s: KNNClassifier.fit(tr, 5, None),
    "knn-pca64": lambda tr, s: KNNClassifier.fit(tr, 5, 64),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None, help="scenario JSON (default: bundled reference)")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--data-seed", type=int, default=0)
    ap.add_argument("--mode", choices=("raw", "plain", "vmd"), default="vmd")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    warnings.simplefilter("ignore", VmdConvergenceWarning)

    sc = load_scenario(args.config)
    t0 = time.perf_counter()
    ds = scenario_dataset(sc, args.data_seed, args.mode, scenario_spectra(sc, args.data_seed))
    print(f"dataset {ds.n_samples} x {ds.n_dims} ({args.mode}) in {time.perf_counter() - t0:.0f}s")

    rows = []
    for seed in range(args.seeds):
        train, test = train_test_split(ds, 0.2, seed)
        for name, fit in CLASSIFIERS.items():
            acc = evaluate(fit(train, seed), test).accuracy
            rows.append((seed, name, acc))
    for name in CLASSIFIERS:
        accs = np.array([a for _, n, a in rows if n == name])
        print(f"{name:10s} {accs.mean():.4f} +- {accs.std():.4f}  (min {accs.min():.4f})")
    path = write_rows(Path(args.out) / "classifier_comparison.csv", ["seed", "classifier", "accuracy"], rows)
    print(f"-> {path}")


if __name__ == "__main__":
    main()
