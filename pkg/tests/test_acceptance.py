"""End-to-end acceptance checks, one test per criterion.

Each sub-check is logged through the ``acceptance`` fixture before it is
asserted; the terminal summary prints one pass/fail line per criterion.
"""
import csv
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from emgesture.cli import main
from emgesture.denoise import build_noise_profile, denoise_aps
from emgesture.ml import ForestParams, KNNClassifier, evaluate, rf_train, train_test_split
from emgesture.pipeline import recording_spectra, scenario_dataset, scenario_spectra
from emgesture.spectrum import AveragePowerSpectrum, Source, dft_direct, fft, ifft
from emgesture.synth import (
    GestureProfile,
    ModulationSpec,
    bundled_scenario_path,
    detect_modulation,
    distance_attenuation,
    envelope_aps,
    load_scenario,
    save_scenario,
    skin_depth,
    synth_modulated,
    synth_recording,
)
from emgesture.vmd import VmdConfig, reconstruct, vmd_decompose

SEEDS = range(10)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


# -- 1, 2: transforms --------------------------------------------------------------

@pytest.fixture(scope="module")
def fft_inputs():
    rng = np.random.default_rng(2024)
    return {n: rng.uniform(-1, 1, (200, n)) + 1j * rng.uniform(-1, 1, (200, n)) for n in (16, 256, 4096)}


def test_criterion_1_fft_matches_direct_dft(acceptance, fft_inputs):
    start = time.perf_counter()
    worst_bin = worst_trip = 0.0
    for x in fft_inputs.values():
        X = fft(x).bins
        worst_bin = max(worst_bin, float(np.abs(X - dft_direct(x).bins).max()))
        worst_trip = max(worst_trip, float(np.abs(ifft(X) - x).max()))
    elapsed = time.perf_counter() - start
    ok = [
        acceptance.check(1, "bin error", worst_bin < 1e-9, f"{worst_bin:.1e} < 1e-9"),
        acceptance.check(1, "round trip", worst_trip < 1e-9, f"{worst_trip:.1e} < 1e-9"),
        acceptance.check(1, "runtime", elapsed < 10, f"{elapsed:.1f}s < 10s"),
    ]
    assert all(ok)


def test_criterion_2_parseval(acceptance, fft_inputs):
    rng = np.random.default_rng(7)
    inputs = [row for x in fft_inputs.values() for row in x]
    inputs += [rng.standard_normal(1 << k) + 1j * rng.standard_normal(1 << k) for k in range(13) for _ in range(10)]
    worst = 0.0
    for x in inputs:
        energy = np.sum(np.abs(x) ** 2)
        X = fft(x).bins
        worst = max(worst, float(abs(energy - np.sum(np.abs(X) ** 2) / x.size) / energy))
    assert acceptance.check(2, f"{len(inputs)} inputs", worst < 1e-9, f"max rel {worst:.1e} < 1e-9")


# -- 3: VMD ------------------------------------------------------------------------

def test_criterion_3_vmd_two_tone(acceptance):
    start = time.perf_counter()
    n = np.arange(4096)
    tones = [np.cos(2 * np.pi * 0.05 * n), np.cos(2 * np.pi * 0.20 * n)]
    ms = vmd_decompose(tones[0] + tones[1], VmdConfig(k_modes=2))
    elapsed = time.perf_counter() - start
    freq_err = max(abs(ms.center_freqs[0] - 0.05) / 0.05, abs(ms.center_freqs[1] - 0.20) / 0.20)
    corr = min(np.corrcoef(m, t)[0, 1] for m, t in zip(ms.modes, tones))
    recon = _rel(reconstruct(ms), tones[0] + tones[1])
    ok = [
        acceptance.check(3, "centers", freq_err < 0.01, f"{freq_err:.2%} < 1%"),
        acceptance.check(3, "correlation", corr > 0.99, f"{corr:.4f} > 0.99"),
        acceptance.check(3, "reconstruction", recon < 0.05, f"{recon:.2%} < 5%"),
        acceptance.check(3, "runtime", elapsed < 30, f"{elapsed:.1f}s < 30s"),
    ]
    assert all(ok)


# -- 4: denoise ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def reference_aps():
    sc = load_scenario()
    rec = synth_recording(sc.synth.with_seed(1), sc.profile("fist"), 1.0)
    return recording_spectra(rec, "fist", sc.segment_s, sc.subwindow_s)[0], sc.denoise_vmd


def test_criterion_4a_self_subtraction(acceptance, reference_aps):
    x, cfg = reference_aps
    out = denoise_aps(x, build_noise_profile(x, cfg), cfg)
    ratio = float(np.linalg.norm(out.power) / np.linalg.norm(x.power))
    assert acceptance.check(4, "self-subtraction", ratio < 0.05, f"{ratio:.4f} < 0.05")


def test_criterion_4b_zero_profile_is_reconstruction(acceptance, reference_aps):
    x, cfg = reference_aps
    zero = x.with_power(np.zeros(len(x)), Source.NOISE)
    out = denoise_aps(x, build_noise_profile(zero, cfg), cfg)
    recon = np.maximum(reconstruct(vmd_decompose(x.power, cfg)), 0)
    gap = float(np.abs(out.power - recon).max() / x.power.max())
    assert acceptance.check(4, "zero profile equals VMD reconstruction", gap < 1e-9, f"max gap {gap:.1e}")


def test_criterion_4c_zero_profile_smooth_spectrum(acceptance):
    k = np.arange(2048)
    x = 40 + sum(a * np.exp(-0.5 * ((k - c) / 50) ** 2) for a, c in ((100, 600), (80, 950), (60, 1400)))
    aps = AveragePowerSpectrum(x, 100.0, 50)
    cfg = VmdConfig()
    out = denoise_aps(aps, build_noise_profile(aps.with_power(np.zeros(k.size), Source.NOISE), cfg), cfg)
    dev = _rel(out.power, x)
    assert acceptance.check(4, "zero profile, smooth spectrum", dev < 0.05, f"{dev:.2%} < 5%")


def test_criterion_4d_zero_profile_reference_spectrum(acceptance, reference_aps):
    # the denoising decomposition deliberately smooths bin-to-bin noise, so on a
    # raw gesture spectrum the reconstruction residual carries that noise
    x, cfg = reference_aps
    zero = x.with_power(np.zeros(len(x)), Source.NOISE)
    out = denoise_aps(x, build_noise_profile(zero, cfg), cfg)
    dev = _rel(out.power, x.power)
    assert acceptance.check(4, "zero profile, reference gesture spectrum", dev < 0.05, f"{dev:.2%} < 5%")


# -- 5, 10: reference scenario --------------------------------------------------------

@pytest.fixture(scope="module")
def reference_run():
    start = time.perf_counter()
    sc = load_scenario()
    spectra = scenario_spectra(sc, seed=0)
    ds = scenario_dataset(sc, 0, "vmd", spectra)
    return sc, spectra, ds, start


@pytest.mark.slow
def test_criterion_5_reference_accuracy(acceptance, reference_run):
    _, _, ds, start = reference_run
    rf, knn = [], []
    for seed in SEEDS:
        train, test = train_test_split(ds, 0.2, seed)
        rf.append(evaluate(rf_train(train, ForestParams(seed=seed)), test).accuracy)
        knn.append(evaluate(KNNClassifier.fit(train, 5, 64), test).accuracy)
    elapsed = time.perf_counter() - start
    rf, knn = np.array(rf), np.array(knn)
    hits = int(np.sum(rf >= 0.95))
    ok = [
        acceptance.check(5, "rf >= 0.95", hits >= 9, f"{hits}/10 seeds, min {rf.min():.3f}"),
        acceptance.check(5, "rf >= knn-pca64", bool(np.all(rf >= knn)),
                         f"rf mean {rf.mean():.3f}, knn mean {knn.mean():.3f}"),
        acceptance.check(5, "runtime", elapsed < 300, f"{elapsed:.0f}s < 300s"),
    ]
    assert all(ok)


def test_criterion_10_dataset_geometry(acceptance, reference_run):
    sc, spectra, ds, _ = reference_run
    counts = ds.class_counts()
    ok = [
        acceptance.check(10, "per class", bool(np.all(counts == 46)), f"{sorted(set(counts.tolist()))} == [46]"),
        acceptance.check(10, "rows", ds.n_samples == 414, f"{ds.n_samples} == 414"),
        acceptance.check(10, "classes", len(sc.class_names) == 9, f"{len(sc.class_names)} == 9"),
    ]
    assert all(ok)


# -- 6: ablation -------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_6_denoising_ablation(acceptance):
    sc = load_scenario(bundled_scenario_path("ablation"))
    spectra = scenario_spectra(sc, seed=0)
    acc = {}
    for mode in ("raw", "plain", "vmd"):
        ds = scenario_dataset(sc, 0, mode, spectra)
        acc[mode] = float(np.mean([
            evaluate(rf_train(tr, ForestParams(seed=s)), te).accuracy
            for s in SEEDS for tr, te in [train_test_split(ds, 0.2, s)]
        ]))
    gap = acc["vmd"] - acc["raw"]
    detail = f"raw {acc['raw']:.3f}, plain {acc['plain']:.3f}, vmd {acc['vmd']:.3f}"
    ok = [
        acceptance.check(6, "vmd > plain > raw", acc["vmd"] > acc["plain"] > acc["raw"], detail),
        acceptance.check(6, "gap", gap >= 0.05, f"{100 * gap:.1f} >= 5 points"),
    ]
    assert all(ok)


# -- 7: skin depth and decay ------------------------------------------------------------

def test_criterion_7_skin_depth_and_decay(acceptance, tmp_path):
    delta = skin_depth(5.8e7, 1e6)
    step = [distance_attenuation(1.0, (i + 1) * delta, delta) / distance_attenuation(1.0, i * delta, delta)
            for i in range(5)]
    step_err = max(abs(s - math.exp(-1)) for s in step)
    assert main(["--out", str(tmp_path), "plot", "decay", "--points", "8"]) == 0
    series = {}
    with open(tmp_path / "plot_decay.csv") as fh:
        for row in csv.DictReader(fh):
            series.setdefault(row["series"], []).append((float(row["x"]), float(row["y"])))
    sc = load_scenario()
    worst_r2, worst_slope = 1.0, 0.0
    for band in sc.synth.carrier_bands:
        d, a = map(np.array, zip(*series[f"{band.center_hz:g} Hz"]))
        slope, icpt = np.polyfit(d, np.log(a), 1)
        resid = np.log(a) - (slope * d + icpt)
        r2 = 1 - resid.var() / np.log(a).var()
        worst_r2 = min(worst_r2, r2)
        d_true = skin_depth(sc.synth.conductivity_s_per_m, band.center_hz)
        worst_slope = max(worst_slope, abs(slope * d_true + 1))
    ok = [
        acceptance.check(7, "copper 1 MHz", abs(delta - 6.61e-5) <= 0.01 * 6.61e-5, f"{delta:.4e} m"),
        acceptance.check(7, "e^-1 per depth", step_err < 1e-12, f"max error {step_err:.1e}"),
        acceptance.check(7, "decay plot R^2", worst_r2 > 0.999, f"{worst_r2:.6f} > 0.999"),
        acceptance.check(7, "slope -1/delta", worst_slope < 1e-6, f"rel error {worst_slope:.1e}"),
    ]
    assert all(ok)


# -- 8: modulation ----------------------------------------------------------------------

def test_criterion_8_modulation_detection(acceptance):
    sc = load_scenario(bundled_scenario_path("modulation"))
    quiet = GestureProfile("no-gesture", (1.0,) * len(sc.synth.carrier_bands))
    hits = clean = 0
    proms = []
    for seed in SEEDS:
        cfg = sc.synth.with_seed(seed)
        on = envelope_aps(synth_modulated(cfg, ModulationSpec(7000.0, depth=0.5), 1.0))
        found, prom, f_peak = detect_modulation(on, 7000.0, on.bin_width_hz)
        hits += found and abs(f_peak - 7000.0) <= on.bin_width_hz
        proms.append(prom)
        off = envelope_aps(synth_recording(cfg, quiet, 1.0))
        clean += not detect_modulation(off, 7000.0, off.bin_width_hz)[0]
    ok = [
        acceptance.check(8, "detected", hits == 10, f"{hits}/10 seeds, min prominence {min(proms):.1f} dB"),
        acceptance.check(8, "control clean", clean == 10, f"{clean}/10 seeds"),
    ]
    assert all(ok)


# -- 9: determinism ------------------------------------------------------------------------

def test_criterion_9_run_all_deterministic(acceptance, tmp_path):
    cfg = tmp_path / "small.json"
    save_scenario(cfg, replace(load_scenario(), record_s=1.5))
    assert main(["--config", str(cfg), "--out", str(tmp_path / "first"), "--seed", "11", "run-all"]) == 0
    manifest = tmp_path / "first" / "manifest.json"
    for name in ("a", "b"):
        assert main(["--config", str(manifest), "--out", str(tmp_path / name), "run-all"]) == 0
    same = {
        f: (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
        for f in ("features.csv", "model.json", "report.json")
    }
    assert acceptance.check(9, "byte-identical", all(same.values()),
                            ", ".join(f"{f} {'same' if s else 'differs'}" for f, s in same.items()))
