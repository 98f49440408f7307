"""End-to-end helpers: recordings -> spectra -> (denoised) dataset."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .denoise import build_noise_profile, denoise_aps, denoise_plain
from .ml.dataset import LabeledDataset, from_spectra, pool_dataset
from .signal_io import IQRecording, segment, trim
from .spectrum import AveragePowerSpectrum, Source, average_power_spectrum, mean_spectrum
from .synth import Scenario, synth_noise, synth_recording
from .vmd import VmdConfig

DenoiseMode = Literal["raw", "plain", "vmd"]
NOISE_LABEL = "noise"
# matches Scenario.denoise_vmd's default
DENOISE_VMD = VmdConfig(tau=0.0)


def derive_seed(*parts: int) -> int:
    """Stable 32-bit seed for a (base seed, class, take, ...) tuple."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def recording_spectra(
    rec: IQRecording,
    label: str | None,
    segment_s: float,
    subwindow_s: float,
    trim_s: tuple[float, float] | None = None,
    source: Source | str = Source.GESTURE,
    window: str = "rect",
) -> list[AveragePowerSpectrum]:
    if trim_s is not None:
        rec = trim(rec, *trim_s)
    return [
        average_power_spectrum(seg, subwindow_s, window=window, source=source)
        for seg in segment(rec, segment_s, label)
    ]


@dataclass
class SpectraSet:
    gesture: list[AveragePowerSpectrum]
    noise: AveragePowerSpectrum
    class_names: tuple[str, ...]


def class_seed(base_seed: int, class_index: int, take: int = 0) -> int:
    return derive_seed(base_seed, class_index, take)


def noise_seed(base_seed: int, take: int = 0) -> int:
    return derive_seed(base_seed, 1_000_003, take)


def scenario_spectra(sc: Scenario, seed: int = 0, record_s: float | None = None) -> SpectraSet:
    """Generate every class take plus the ambient profile and reduce them to spectra."""
    record_s = sc.record_s if record_s is None else record_s
    trim_s = (sc.trim_start_s, sc.trim_end_s) if record_s >= sc.trim_end_s else None
    spectra: list[AveragePowerSpectrum] = []
    for c, profile in enumerate(sc.profiles):
        for take in range(sc.takes):
            cfg = sc.synth.with_seed(class_seed(seed, c, take))
            rec = synth_recording(cfg, profile, record_s)
            spectra += recording_spectra(rec, profile.name, sc.segment_s, sc.subwindow_s, trim_s)
            del rec
    noise_rec = synth_noise(sc.ambient().with_seed(noise_seed(seed)), record_s)
    noise = mean_spectrum(
        recording_spectra(noise_rec, NOISE_LABEL, sc.segment_s, sc.subwindow_s, trim_s, Source.NOISE)
    )
    return SpectraSet(spectra, noise, sc.class_names)


def denoise_all(
    spectra: Sequence[AveragePowerSpectrum],
    noise: AveragePowerSpectrum,
    mode: DenoiseMode = "vmd",
    vmd_config: VmdConfig | None = None,
) -> list[AveragePowerSpectrum]:
    if mode == "raw":
        return list(spectra)
    if mode == "plain":
        return [denoise_plain(s, noise) for s in spectra]
    if mode == "vmd":
        profile = build_noise_profile(noise, vmd_config or DENOISE_VMD)
        return [denoise_aps(s, profile, profile.vmd_config) for s in spectra]
    raise ValueError(f"unknown denoise mode {mode!r}")


def to_dataset(spectra: Sequence[AveragePowerSpectrum], class_names: Sequence[str],
               pool_bins: int | None = None) -> LabeledDataset:
    ds = from_spectra(spectra, class_names)
    return pool_dataset(ds, pool_bins) if pool_bins else ds


def scenario_dataset(sc: Scenario, seed: int = 0, mode: DenoiseMode = "vmd",
                     spectra: SpectraSet | None = None) -> LabeledDataset:
    """Generate (or reuse) a scenario's spectra, denoise them and pool into a dataset."""
    spectra = spectra or scenario_spectra(sc, seed)
    cleaned = denoise_all(spectra.gesture, spectra.noise, mode, sc.denoise_vmd)
    return to_dataset(cleaned, spectra.class_names, sc.pool_bins)
