"""Command-line front end: synth, features, denoise, train, eval, plot, run-all.

Every stage reads and writes plain files under ``--out`` and records what it
did in ``<out>/manifest.json``. Errors end with a single line on stderr of the
form ``error code=<n> kind=<name> msg=<text>``; exit codes are 0 (ok),
2 (usage), 3 (data) and 4 (numeric non-convergence, only with ``--strict``).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import re
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .denoise import DenoiseError, build_noise_profile, denoise_aps, denoise_plain, read_bundle, write_bundle
from .ml import (
    DatasetError, ForestModel, ForestParams, KNNClassifier, evaluate, from_spectra, load_model,
    pool_dataset, rf_train, train_test_split,
)
from .pipeline import NOISE_LABEL, class_seed, noise_seed, recording_spectra
from .signal_io import WavFormatError, load_iq_wav, save_iq_wav
from .spectrum import Source, SpectrumError, mean_spectrum, read_aps_csv, write_aps_csv
from .synth import (
    BUNDLED_SCENARIOS, Scenario, SynthError, bundled_scenario_path, distance_attenuation, load_scenario, scenario_from_dict, skin_depth,
    synth_noise, synth_recording,
)
from .vmd import VmdConfig, VmdConvergenceWarning, VmdError, vmd_decompose

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGENCE = 0, 2, 3, 4
TEST_FRACTION = 0.2
PLOT_KINDS = ("spectrum", "confusion", "convergence", "decay")
_NAME_RE = re.compile(r"^(?P<label>.+)_(?P<take>\d+)$")


class CliError(Exception):
    def __init__(self, code: int, kind: str, msg: str):
        super().__init__(msg)
        self.code = code
        self.kind = kind


# data-level failures raised by the library
_DATA_ERRORS = (WavFormatError, SpectrumError, SynthError, DenoiseError, DatasetError, VmdError,
                FileNotFoundError, ValueError, KeyError, json.JSONDecodeError)


# -- manifest ----------------------------------------------------------------------

@dataclass
class PipelineManifest:
    run_id: str
    config: dict
    seeds: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    timestamps: dict = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, out_dir: Path) -> Path:
        # every referenced file must exist before the manifest is finalized
        for stage, files in self.outputs.items():
            for rel in files.values():
                if not (out_dir / rel).exists():
                    raise CliError(EXIT_DATA, "ManifestError", f"{stage} output {rel} is missing")
        path = out_dir / "manifest.json"
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _run_id(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _load_manifest(out_dir: Path, config: dict) -> PipelineManifest:
    path = out_dir / "manifest.json"
    if path.exists():
        with open(path) as fh:
            d = json.load(fh)
        m = PipelineManifest(**d)
        m.config = config
        m.run_id = _run_id(config)
        return m
    return PipelineManifest(_run_id(config), config)


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


# -- configuration -----------------------------------------------------------------

def _scenario(args) -> Scenario:
    """Scenario from --config (scenario JSON or a previous manifest) or the bundled defaults."""
    if args.config is None:
        name = "fidelity" if args.fidelity else args.scenario
        return load_scenario(bundled_scenario_path(name))
    path = Path(args.config)
    if not path.exists():
        raise CliError(EXIT_DATA, "FileNotFoundError", f"config {path} not found")
    with open(path) as fh:
        d = json.load(fh)
    if "run_id" in d and "config" in d:
        d = d["config"]["scenario"]
    return scenario_from_dict(d)


# training options, for subcommands that do not expose them
_TRAIN_DEFAULTS = {"n_trees": 100, "max_depth": None, "min_samples_leaf": 1,
                   "features_per_split": "sqrt", "knn_k": 5, "no_stratify": False}


def _opt(args, name):
    return getattr(args, name, _TRAIN_DEFAULTS.get(name))


def _forest_params(args) -> ForestParams:
    rule = _opt(args, "features_per_split")
    if rule not in ("sqrt", "log2", "all"):
        try:
            rule = int(rule)
        except ValueError:
            raise CliError(EXIT_USAGE, "UsageError", f"bad --features-per-split {rule!r}") from None
    return ForestParams(n_trees=_opt(args, "n_trees"), max_depth=_opt(args, "max_depth"),
                        min_samples_leaf=_opt(args, "min_samples_leaf"), features_per_split=rule,
                        seed=args.seed)


def _vmd_config(args, sc: Scenario) -> VmdConfig:
    cfg = sc.denoise_vmd
    overrides = {k: v for k, v in (("k_modes", args.k_modes), ("alpha", args.alpha), ("tau", args.tau))
                 if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


def _config_snapshot(args, sc: Scenario) -> dict:
    return {
        "scenario": sc.to_dict(),
        "seed": args.seed,
        "swap_iq": args.swap_iq,
        "no_vmd": args.no_vmd,
        "model": args.model,
        "pca": args.pca,
        "knn_k": _opt(args, "knn_k"),
        "forest": asdict(_forest_params(args)),
        "stratify": not _opt(args, "no_stratify"),
        "test_fraction": TEST_FRACTION,
    }


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _rel(path: Path, out: Path) -> str:
    try:
        return str(path.resolve().relative_to(out.resolve()))
    except ValueError:
        return str(path.resolve())


# -- stages ------------------------------------------------------------------------

def cmd_synth(args) -> int:
    sc = _scenario(args)
    out = _out(args)
    wav_dir = out / "wavs"
    wav_dir.mkdir(exist_ok=True)
    duration = args.duration or sc.record_s
    manifest = _load_manifest(out, _config_snapshot(args, sc))
    manifest.timestamps["synth_started"] = _now()
    files, seeds = {}, {}
    for take in range(sc.takes):
        for c, profile in enumerate(sc.profiles):
            seed = class_seed(args.seed, c, take)
            path = wav_dir / f"{profile.name}_{take}.wav"
            save_iq_wav(path, synth_recording(sc.synth.with_seed(seed), profile, duration), args.encoding)
            files[path.stem] = _rel(path, out)
            seeds[path.stem] = seed
            print(f"{path.name}\tseed={seed}")
        seed = noise_seed(args.seed, take)
        path = wav_dir / f"{NOISE_LABEL}_{take}.wav"
        save_iq_wav(path, synth_noise(sc.ambient().with_seed(seed), duration), args.encoding)
        files[path.stem] = _rel(path, out)
        seeds[path.stem] = seed
        print(f"{path.name}\tseed={seed}")
    manifest.seeds.update(seeds)
    manifest.outputs["synth"] = files
    manifest.timestamps["synth_finished"] = _now()
    manifest.save(out)
    return EXIT_OK


def _wav_inputs(paths, out: Path) -> list[Path]:
    paths = [Path(p) for p in paths] if paths else [out / "wavs"]
    found = []
    for p in paths:
        if p.is_dir():
            found += sorted(p.glob("*.wav"))
        elif p.exists():
            found.append(p)
        else:
            raise CliError(EXIT_DATA, "FileNotFoundError", f"input {p} not found")
    if not found:
        raise CliError(EXIT_DATA, "EmptyInput", "no wav files to process")
    return found


def parse_label(path: Path) -> tuple[str, int]:
    """``<class>_<take>.wav`` -> (class, take)."""
    m = _NAME_RE.match(path.stem)
    if m is None:
        raise CliError(EXIT_DATA, "UnlabeledFile",
                       f"{path.name} does not follow the <class>_<take>.wav naming convention")
    return m.group("label"), int(m.group("take"))


def cmd_features(args) -> int:
    sc = _scenario(args)
    out = _out(args)
    seg_s = args.segment or sc.segment_s
    sub_s = args.subwindow or sc.subwindow_s
    known = set(sc.class_names)
    gesture, noise = [], []
    for path in _wav_inputs(args.inputs, out):
        label, _ = parse_label(path)
        if label != NOISE_LABEL and label not in known:
            raise CliError(EXIT_DATA, "UnknownClass", f"{path.name}: class {label!r} is not in the config")
        rec = load_iq_wav(path, swap_iq=args.swap_iq)
        if args.no_trim:
            trim_s = None
        elif args.trim is not None:
            trim_s = tuple(args.trim)
        else:
            # short recordings (smoke runs) are used whole
            trim_s = (sc.trim_start_s, sc.trim_end_s) if rec.duration_s >= sc.trim_end_s else None
        source = Source.NOISE if label == NOISE_LABEL else Source.GESTURE
        rows = recording_spectra(rec, label, seg_s, sub_s, trim_s, source, args.window)
        (noise if label == NOISE_LABEL else gesture).extend(rows)
    if not gesture:
        raise CliError(EXIT_DATA, "EmptyInput", "no gesture recordings among the inputs")
    feats = out / "features.csv"
    write_aps_csv(feats, gesture)
    outputs = {"features": _rel(feats, out)}
    if noise:
        noise_csv = out / "noise.csv"
        write_aps_csv(noise_csv, noise)
        outputs["noise"] = _rel(noise_csv, out)
    print(f"{len(gesture)} gesture rows, {len(noise)} noise rows, {len(gesture[0])} bins")
    manifest = _load_manifest(out, _config_snapshot(args, sc))
    manifest.outputs["features"] = outputs
    manifest.timestamps["features_finished"] = _now()
    manifest.save(out)
    return EXIT_OK


def cmd_denoise(args) -> int:
    sc = _scenario(args)
    out = _out(args)
    original = read_aps_csv(Path(args.features) if args.features else out / "features.csv")
    noise_rows = read_aps_csv(Path(args.noise) if args.noise else out / "noise.csv")
    if not original or not noise_rows:
        raise CliError(EXIT_DATA, "EmptyInput", "features or noise CSV has no rows")
    noise = mean_spectrum(noise_rows)
    cfg = _vmd_config(args, sc)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", VmdConvergenceWarning)
        if args.no_vmd:
            denoised = [denoise_plain(s, noise) for s in original]
        else:
            profile = build_noise_profile(noise, cfg)
            denoised = [denoise_aps(s, profile, cfg) for s in original]
    stalled = sum(issubclass(w.category, VmdConvergenceWarning) for w in caught)
    if stalled:
        msg = f"VMD hit max_iter={cfg.max_iter} on {stalled} of {len(original) + 1} spectra"
        if args.strict:
            raise CliError(EXIT_NONCONVERGENCE, "VmdConvergenceWarning", msg)
        print(f"warning: {msg}", file=sys.stderr)
    path = out / "denoised.csv"
    write_aps_csv(path, denoised)
    meta = {"method": "plain" if args.no_vmd else "vmd", "vmd": None if args.no_vmd else asdict(cfg),
            "noise_rows": len(noise_rows)}
    bundle = write_bundle(out / "bundle", original, noise, denoised, meta)
    manifest = _load_manifest(out, _config_snapshot(args, sc))
    manifest.outputs["denoise"] = {"denoised": _rel(path, out), "bundle": _rel(bundle, out)}
    manifest.timestamps["denoise_finished"] = _now()
    manifest.save(out)
    return EXIT_OK


def _dataset(path: Path, sc: Scenario, pool_bins: int | None):
    spectra = read_aps_csv(path)
    if not spectra:
        raise CliError(EXIT_DATA, "EmptyInput", f"{path} has no rows")
    ds = from_spectra(spectra, sc.class_names)
    bins = sc.pool_bins if pool_bins is None else pool_bins
    return pool_dataset(ds, bins) if bins else ds


def _default_features(args, out: Path) -> Path:
    if args.features:
        return Path(args.features)
    denoised = out / "denoised.csv"
    return denoised if denoised.exists() else out / "features.csv"


def cmd_train(args) -> int:
    sc = _scenario(args)
    out = _out(args)
    feats = _default_features(args, out)
    ds = _dataset(feats, sc, args.pool_bins)
    if np.unique(ds.labels).size < 2:
        raise CliError(EXIT_DATA, "DegenerateDataset", "training needs at least 2 classes")
    train, _ = train_test_split(ds, TEST_FRACTION, args.seed, stratify=not args.no_stratify)
    if args.model == "rf":
        model = rf_train(train, _forest_params(args))
    else:
        model = KNNClassifier.fit(train, k=args.knn_k, n_components=args.pca)
    # eval reproduces the split from these
    model.feature_meta = {**(model.feature_meta or {}), "split_seed": args.seed,
                          "test_fraction": TEST_FRACTION, "stratify": not args.no_stratify,
                          "pool_bins": sc.pool_bins if args.pool_bins is None else args.pool_bins}
    path = Path(args.model_file) if args.model_file else out / "model.json"
    model.save(path)
    print(f"trained {model.name} on {train.n_samples} samples x {train.n_dims} features -> {path}")
    manifest = _load_manifest(out, _config_snapshot(args, sc))
    manifest.outputs["train"] = {"model": _rel(path, out), "features": _rel(feats, out)}
    manifest.timestamps["train_finished"] = _now()
    manifest.save(out)
    return EXIT_OK


def cmd_eval(args) -> int:
    sc = _scenario(args)
    out = _out(args)
    model_path = Path(args.model_file) if args.model_file else out / "model.json"
    model = load_model(model_path)
    meta = model.feature_meta or {}
    feats = _default_features(args, out)
    ds = _dataset(feats, sc, meta.get("pool_bins", args.pool_bins))
    _, test = train_test_split(ds, meta.get("test_fraction", TEST_FRACTION),
                               meta.get("split_seed", args.seed), stratify=meta.get("stratify", True))
    report = evaluate(model, test)
    rpath = out / "report.json"
    cpath = out / "confusion.csv"
    report.save(rpath)
    report.write_confusion_csv(cpath)
    print(f"{report.model_name}: accuracy {report.accuracy:.4f} on {report.n_test} test samples")
    manifest = _load_manifest(out, _config_snapshot(args, sc))
    manifest.outputs["eval"] = {"report": _rel(rpath, out), "confusion": _rel(cpath, out)}
    manifest.timestamps["eval_finished"] = _now()
    manifest.save(out)
    return EXIT_OK


# -- plot data ---------------------------------------------------------------------

def _plot_spectrum(args, out: Path) -> list[tuple]:
    src = Path(args.input) if args.input else out / "bundle"
    triples = read_bundle(src)
    if not 0 <= args.sample < len(triples):
        raise CliError(EXIT_DATA, "IndexError", f"sample {args.sample} outside 0..{len(triples) - 1}")
    rows = []
    for series in ("original", "noise", "denoised"):
        aps = triples[args.sample][series]
        rows += [(float(f), float(p), series) for f, p in zip(aps.frequencies(), aps.power)]
    return rows


def _plot_confusion(args, out: Path) -> list[tuple]:
    src = Path(args.input) if args.input else out / "report.json"
    with open(src) as fh:
        rep = json.load(fh)
    names = rep["class_names"]
    # one series per true class: x = predicted class, y = count
    return [(names[j], int(v), names[i]) for i, row in enumerate(rep["confusion"]) for j, v in enumerate(row)]


def _plot_convergence(args, out: Path, sc: Scenario) -> list[tuple]:
    src = Path(args.input) if args.input else out / "features.csv"
    spectra = read_aps_csv(src)
    if not 0 <= args.sample < len(spectra):
        raise CliError(EXIT_DATA, "IndexError", f"sample {args.sample} outside 0..{len(spectra) - 1}")
    ms = vmd_decompose(spectra[args.sample].power, _vmd_config(args, sc), record_history=True)
    rows = []
    K = ms.k
    for it, h in enumerate(ms.history, start=1):
        rows += [(it, float(h[k]), f"omega_{k + 1}") for k in range(K)]
        rows.append((it, float(h[K]), "residual"))
        rows.append((it, float(h[K + 1]), "recon_error"))
    return rows


def _plot_decay(args, sc: Scenario) -> list[tuple]:
    rows = []
    for b in sc.synth.carrier_bands:
        delta = skin_depth(sc.synth.conductivity_s_per_m, b.center_hz)
        for i in range(args.points):
            d = i * delta * args.max_depths / max(args.points - 1, 1)
            rows.append((d, distance_attenuation(1.0, d, delta), f"{b.center_hz:g} Hz"))
    return rows


def _svg(rows: list[tuple], kind: str) -> str:
    w, h, pad = 640, 400, 40
    if kind == "confusion":
        xs = list(dict.fromkeys(r[0] for r in rows))
        ys = list(dict.fromkeys(r[2] for r in rows))
        vmax = max((r[1] for r in rows), default=1) or 1
        cw, ch = (w - 2 * pad) / len(xs), (h - 2 * pad) / len(ys)
        cells = [
            f'<rect x="{pad + xs.index(x) * cw:.1f}" y="{pad + ys.index(s) * ch:.1f}" width="{cw:.1f}" '
            f'height="{ch:.1f}" fill="rgb({255 - int(200 * v / vmax)},{255 - int(200 * v / vmax)},255)"/>'
            for x, v, s in rows
        ]
        body = "".join(cells)
    else:
        series: dict[str, list] = {}
        for x, y, s in rows:
            series.setdefault(s, []).append((float(x), float(y)))
        allx = [p[0] for pts in series.values() for p in pts]
        ally = [p[1] for pts in series.values() for p in pts]
        x0, x1 = min(allx), max(allx) or 1.0
        y0, y1 = min(ally), max(ally)
        sx = (w - 2 * pad) / ((x1 - x0) or 1.0)
        sy = (h - 2 * pad) / ((y1 - y0) or 1.0)
        colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
        lines = []
        for i, (name, pts) in enumerate(series.items()):
            coords = " ".join(f"{pad + (x - x0) * sx:.1f},{h - pad - (y - y0) * sy:.1f}" for x, y in pts)
            lines.append(f'<polyline fill="none" stroke="{colors[i % len(colors)]}" points="{coords}">'
                         f"<title>{name}</title></polyline>")
        body = "".join(lines)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">'
            f'<text x="{pad}" y="20">{kind}</text>{body}</svg>\n')


def cmd_plot(args) -> int:
    sc = _scenario(args)
    out = _out(args)
    if args.kind == "spectrum":
        rows = _plot_spectrum(args, out)
    elif args.kind == "confusion":
        rows = _plot_confusion(args, out)
    elif args.kind == "convergence":
        rows = _plot_convergence(args, out, sc)
    else:
        rows = _plot_decay(args, sc)
    path = out / f"plot_{args.kind}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "series"])
        w.writerows(rows)
    files = {"csv": _rel(path, out)}
    if args.svg:
        svg = out / f"plot_{args.kind}.svg"
        svg.write_text(_svg(rows, args.kind))
        files["svg"] = _rel(svg, out)
    print(f"{len(rows)} rows -> {path}")
    manifest = _load_manifest(out, _config_snapshot(args, sc))
    manifest.outputs[f"plot_{args.kind}"] = files
    manifest.save(out)
    return EXIT_OK


def cmd_run_all(args) -> int:
    out = _out(args)
    started = _now()
    for stage in (cmd_synth, cmd_features, cmd_denoise, cmd_train, cmd_eval):
        stage(args)
    sc = _scenario(args)
    manifest = _load_manifest(out, _config_snapshot(args, sc))
    manifest.timestamps["run_all_started"] = started
    manifest.timestamps["run_all_finished"] = _now()
    manifest.save(out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors also end with the machine-parsable line."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, _error_line(EXIT_USAGE, "UsageError", message) + "\n")


def _global_options(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d(0), help="base seed for generation, split and model")
    g.add_argument("--config", default=d(None), help="scenario JSON, or a manifest.json from an earlier run")
    g.add_argument("--out", default=d("emgesture_out"), help="output directory")
    g.add_argument("--swap-iq", action="store_true", default=d(False), help="read wav channels as (Q, I)")
    g.add_argument("--no-vmd", action="store_true", default=d(False),
                   help="denoise by whole-spectrum subtraction instead of mode-wise")
    g.add_argument("--model", choices=("rf", "knn"), default=d("rf"))
    g.add_argument("--pca", type=int, default=d(64), help="PCA components before KNN (0 disables)")
    g.add_argument("--scenario", choices=BUNDLED_SCENARIOS, default=d("reference"),
                   help="bundled scenario used when no --config is given")
    g.add_argument("--fidelity", action="store_true", default=d(False),
                   help="shorthand for --scenario fidelity (20 MHz geometry)")
    g.add_argument("--strict", action="store_true", default=d(False),
                   help="treat VMD non-convergence as an error (exit 4)")


def _stage_options(p: argparse.ArgumentParser, *groups: str) -> None:
    if "synth" in groups:
        p.add_argument("--duration", type=float, default=None, help="seconds per recording (default: config)")
        p.add_argument("--encoding", choices=("float32", "pcm16", "pcm32"), default="float32")
    if "features" in groups:
        p.add_argument("inputs", nargs="*", help="wav files or directories (default: <out>/wavs)")
        p.add_argument("--trim", type=float, nargs=2, metavar=("START", "END"), default=None)
        p.add_argument("--no-trim", action="store_true")
        p.add_argument("--segment", type=float, default=None, help="segment length, s")
        p.add_argument("--subwindow", type=float, default=None, help="sub-window length, s")
        p.add_argument("--window", choices=("rect", "hann"), default="rect")
    if "denoise" in groups or "plot" in groups:
        p.add_argument("--k-modes", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--tau", type=float, default=None)
    if "denoise" in groups:
        p.add_argument("--noise", default=None, help="noise APS CSV (default: <out>/noise.csv)")
    if "denoise" in groups or "train" in groups:
        p.add_argument("--features", default=None, help="APS CSV (default: <out>/denoised.csv or features.csv)")
    if "train" in groups:
        p.add_argument("--model-file", default=None)
        p.add_argument("--pool-bins", type=int, default=None, help="max-pool features to this many bins")
        p.add_argument("--no-stratify", action="store_true")
        p.add_argument("--n-trees", type=int, default=100)
        p.add_argument("--max-depth", type=int, default=None)
        p.add_argument("--min-samples-leaf", type=int, default=1)
        p.add_argument("--features-per-split", default="sqrt", help="sqrt, log2, all or an integer")
        p.add_argument("--knn-k", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="emgesture", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    specs = [
        ("synth", cmd_synth, "generate gesture and ambient wav recordings", ("synth",)),
        ("features", cmd_features, "wav recordings -> averaged power spectra CSV", ("features",)),
        ("denoise", cmd_denoise, "subtract the ambient profile from each spectrum", ("denoise",)),
        ("train", cmd_train, "fit a classifier on the training split", ("train",)),
        ("eval", cmd_eval, "score a model on the held-out split", ("train",)),
        ("plot", cmd_plot, "write tidy plot data (and optional SVG)", ("plot",)),
        ("run-all", cmd_run_all, "synth, features, denoise, train and eval in one go",
         ("synth", "features", "denoise", "train")),
    ]
    for name, fn, help_text, groups in specs:
        p = sub.add_parser(name, help=help_text)
        _global_options(p, suppress=True)
        _stage_options(p, *groups)
        if name == "plot":
            p.add_argument("kind", choices=PLOT_KINDS)
            p.add_argument("--input", default=None)
            p.add_argument("--sample", type=int, default=0)
            p.add_argument("--points", type=int, default=4, help="decay: distances sampled")
            p.add_argument("--max-depths", type=float, default=3.0, help="decay: largest distance in skin depths")
            p.add_argument("--svg", action="store_true")
            p.add_argument("--model-file", default=None)
        p.set_defaults(func=fn)
    return parser


# run settings a manifest restores unless given explicitly on the command line
_MANIFEST_KEYS = ("seed", "swap_iq", "no_vmd", "model", "pca")


def _apply_manifest(args, parser: argparse.ArgumentParser) -> None:
    if args.config is None or not Path(args.config).exists():
        return
    try:
        with open(args.config) as fh:
            d = json.load(fh)
    except json.JSONDecodeError:
        return
    if not ("run_id" in d and "config" in d):
        return
    snap = d["config"]
    for key in _MANIFEST_KEYS:
        if key in snap and getattr(args, key) == parser.get_default(key):
            setattr(args, key, snap[key])


def _error_line(code: int, kind: str, msg: str) -> str:
    return f"error code={code} kind={kind} msg={' '.join(str(msg).split())}"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_manifest(args, parser)
        with warnings.catch_warnings():
            if args.strict:
                warnings.simplefilter("error", VmdConvergenceWarning)
            return args.func(args)
    except CliError as e:
        print(_error_line(e.code, e.kind, e), file=sys.stderr)
        return e.code
    except VmdConvergenceWarning as e:
        print(_error_line(EXIT_NONCONVERGENCE, "VmdConvergenceWarning", e), file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except _DATA_ERRORS as e:
        print(_error_line(EXIT_DATA, type(e).__name__, e), file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
