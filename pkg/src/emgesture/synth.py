"""Synthetic charger emissions.

A recording is a sum of narrow carrier bands (tones whose phase performs a
slow random walk, giving humps of a chosen width), each scaled by the
gesture's per-band attenuation, an exponential distance decay through a
conductive medium, and a slowly varying per-block jitter, plus ambient noise:
complex white Gaussian noise and optional fixed-frequency interferers.

Every generator is a pure function of its config and seed. Samples are
produced block by block so long recordings stay within memory.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .signal_io import IQRecording, Origin, Segment
from .spectrum import AveragePowerSpectrum, average_power_spectrum
from .vmd import VmdConfig

MU_0 = 4e-7 * math.pi

CLASS_NAMES = (
    "no-gesture",
    "gesture-1",
    "gesture-2",
    "gesture-3",
    "gesture-4",
    "hand-spreading",
    "gesture-ok",
    "gesture-8",
    "fist",
)


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class CarrierBand:
    center_hz: float
    amplitude: float
    bandwidth_hz: float = 0.0


@dataclass(frozen=True)
class Interferer:
    """Fixed-frequency ambient tone, present with or without the charger."""

    freq_hz: float
    amplitude: float
    # relative per-block amplitude fluctuation
    fluctuation: float = 0.0
    # Lorentzian linewidth; 0 keeps a pure tone
    bandwidth_hz: float = 0.0


@dataclass(frozen=True)
class SynthConfig:
    sample_rate_hz: float
    carrier_bands: tuple[CarrierBand, ...]
    noise_std: float = 0.0
    distance_m: float = 0.05
    conductivity_s_per_m: float = 0.5
    seed: int = 0
    interferers: tuple[Interferer, ...] = ()
    # hold time of the per-band amplitude jitter (one gesture segment by default)
    jitter_block_s: float = 0.5
    # phase-walk increments are drawn once per this many samples and interpolated
    phase_walk_decimation: int = 64

    def __post_init__(self):
        object.__setattr__(self, "carrier_bands", tuple(
            b if isinstance(b, CarrierBand) else CarrierBand(**b) for b in self.carrier_bands))
        object.__setattr__(self, "interferers", tuple(
            i if isinstance(i, Interferer) else Interferer(**i) for i in self.interferers))
        if not self.sample_rate_hz > 0:
            raise SynthError("sample rate must be positive")
        nyquist = self.sample_rate_hz / 2
        for b in self.carrier_bands:
            if abs(b.center_hz) >= nyquist:
                raise SynthError(f"carrier at {b.center_hz} Hz violates Nyquist ({nyquist} Hz)")
            if b.amplitude < 0 or b.bandwidth_hz < 0:
                raise SynthError("carrier amplitude and bandwidth must be non-negative")
        for i in self.interferers:
            if abs(i.freq_hz) >= nyquist:
                raise SynthError(f"interferer at {i.freq_hz} Hz violates Nyquist ({nyquist} Hz)")
        if self.noise_std < 0:
            raise SynthError("noise_std must be non-negative")
        if self.distance_m < 0:
            raise SynthError("distance must be non-negative")

    def with_seed(self, seed: int) -> "SynthConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class GestureProfile:
    name: str
    band_attenuation: tuple[float, ...]
    jitter_std: float = 0.05

    def __post_init__(self):
        att = tuple(float(a) for a in self.band_attenuation)
        if any(not 0.0 <= a <= 1.0 for a in att):
            raise SynthError(f"{self.name}: attenuation factors must lie in [0, 1]")
        if self.name == "no-gesture" and any(a != 1.0 for a in att):
            raise SynthError("no-gesture profile must leave every band unattenuated")
        object.__setattr__(self, "band_attenuation", att)


@dataclass(frozen=True)
class ModulationSpec:
    f_mod_hz: float
    duty: float = 0.5
    depth: float = 0.5

    def __post_init__(self):
        if not 0 < self.duty < 1:
            raise SynthError("duty must lie in (0, 1)")
        if not 0 <= self.depth <= 1:
            raise SynthError("depth must lie in [0, 1]")
        if self.f_mod_hz <= 0:
            raise SynthError("modulation frequency must be positive")


def skin_depth(sigma: float, f: float) -> float:
    """Good-conductor skin depth sqrt(2 / (mu0 * sigma * omega)) in metres."""
    if sigma <= 0 or f <= 0:
        raise SynthError("conductivity and frequency must be positive")
    return math.sqrt(2.0 / (MU_0 * sigma * 2.0 * math.pi * f))


def distance_attenuation(amplitude: float, d: float, delta: float) -> float:
    return amplitude * math.exp(-d / delta)


def check_separability(profiles: Sequence[GestureProfile], min_diff: float = 0.15, min_bands: int = 2) -> None:
    """Every pair of profiles must differ by >= ``min_diff`` in >= ``min_bands`` bands."""
    for i, a in enumerate(profiles):
        for b in profiles[i + 1:]:
            if len(a.band_attenuation) != len(b.band_attenuation):
                raise SynthError(f"{a.name} and {b.name} cover different band counts")
            diffs = np.abs(np.subtract(a.band_attenuation, b.band_attenuation))
            if np.count_nonzero(diffs >= min_diff - 1e-12) < min_bands:
                raise SynthError(f"profiles {a.name} and {b.name} are not separable")


# -- generation --------------------------------------------------------------

def _band_amplitudes(cfg: SynthConfig, g: GestureProfile | None) -> np.ndarray:
    amps = []
    for idx, band in enumerate(cfg.carrier_bands):
        att = 1.0 if g is None else g.band_attenuation[idx]
        decay = 1.0
        if cfg.distance_m > 0:
            delta = skin_depth(cfg.conductivity_s_per_m, max(abs(band.center_hz), 1.0))
            decay = distance_attenuation(1.0, cfg.distance_m, delta)
        amps.append(band.amplitude * att * decay)
    return np.array(amps)


def _walk(start: float, steps: np.ndarray, n: int, dec: int) -> tuple[np.ndarray, float]:
    """Piecewise-linear phase through decimated increments; returns (phase, next start)."""
    grid = np.arange(steps.size + 1)
    knots = start + np.concatenate([[0.0], np.cumsum(steps)])
    return np.interp(np.arange(n) / dec, grid, knots), float(np.interp(n / dec, grid, knots))


def _generate(
    cfg: SynthConfig,
    duration_s: float,
    g: GestureProfile | None,
    carriers_on: bool,
    envelope=None,
) -> IQRecording:
    if duration_s <= 0:
        raise SynthError("duration must be positive")
    if g is not None and len(g.band_attenuation) != len(cfg.carrier_bands):
        raise SynthError(f"profile {g.name} has {len(g.band_attenuation)} factors for "
                         f"{len(cfg.carrier_bands)} bands")
    fs = cfg.sample_rate_hz
    n_total = int(round(duration_s * fs))
    block = max(1, int(round(cfg.jitter_block_s * fs)))
    n_bands = len(cfg.carrier_bands)
    jitter_std = 0.0 if g is None else g.jitter_std
    base_amp = _band_amplitudes(cfg, g) if carriers_on else np.zeros(n_bands)

    # independent streams so the noise process is identical with or without carriers
    ss = np.random.SeedSequence(cfg.seed)
    carrier_ss, noise_ss, interf_ss = ss.spawn(3)
    rng_c = np.random.default_rng(carrier_ss)
    rng_n = np.random.default_rng(noise_ss)
    rng_i = np.random.default_rng(interf_ss)

    phase0 = rng_c.uniform(0, 2 * np.pi, size=n_bands)
    walk = phase0.copy()
    i_phase = rng_i.uniform(0, 2 * np.pi, size=len(cfg.interferers))
    dec = cfg.phase_walk_decimation
    # Wiener phase noise with Lorentzian FWHM B has per-sample variance 2*pi*B/fs
    step_std = np.array([math.sqrt(2 * np.pi * b.bandwidth_hz / fs * dec) for b in cfg.carrier_bands])
    i_step_std = np.array([math.sqrt(2 * np.pi * f.bandwidth_hz / fs * dec) for f in cfg.interferers])

    out = np.empty(n_total, dtype=np.complex64)
    for start in range(0, n_total, block):
        n = min(block, n_total - start)
        t = (start + np.arange(n)) / fs
        x = np.zeros(n, dtype=np.complex128)
        jitter = 1.0 + jitter_std * rng_c.standard_normal(n_bands)
        env = None if envelope is None else envelope(t)
        for b, band in enumerate(cfg.carrier_bands):
            n_steps = -(-n // dec)
            steps = rng_c.standard_normal(n_steps) * step_std[b]
            if not carriers_on or base_amp[b] == 0:
                # keep the walk state in step with the draws
                walk[b] += steps.sum() * min(1.0, n / (n_steps * dec))
                continue
            phase, walk[b] = _walk(walk[b], steps, n, dec)
            amp = base_amp[b] * jitter[b]
            tone = np.exp(1j * (2 * np.pi * band.center_hz * t + phase))
            if env is not None:
                tone *= env
            x += amp * tone
        fluct = rng_i.standard_normal(len(cfg.interferers))
        for j, itf in enumerate(cfg.interferers):
            amp = itf.amplitude * max(0.0, 1.0 + itf.fluctuation * fluct[j])
            if i_step_std[j] > 0:
                steps = rng_i.standard_normal(-(-n // dec)) * i_step_std[j]
                phase, i_phase[j] = _walk(i_phase[j], steps, n, dec)
                x += amp * np.exp(1j * (2 * np.pi * itf.freq_hz * t + phase))
            else:
                x += amp * np.exp(1j * (2 * np.pi * itf.freq_hz * t + i_phase[j]))
        noise = rng_n.standard_normal((2, n))
        if cfg.noise_std > 0:
            x.real += cfg.noise_std * noise[0]
            x.imag += cfg.noise_std * noise[1]
        out[start:start + n] = x
    return IQRecording(out, fs, Origin.SYNTHETIC)


def synth_recording(cfg: SynthConfig, g: GestureProfile, duration_s: float) -> IQRecording:
    return _generate(cfg, duration_s, g, carriers_on=True)


def synth_noise(cfg: SynthConfig, duration_s: float) -> IQRecording:
    """Ambient-only recording: charger off, same noise process as the gesture takes."""
    return _generate(cfg, duration_s, None, carriers_on=False)


def square_envelope(m: ModulationSpec):
    def env(t):
        phase = np.mod(t * m.f_mod_hz, 1.0)
        return np.where(phase < m.duty, 1.0, 1.0 - m.depth)
    return env


def synth_modulated(
    cfg: SynthConfig,
    m: ModulationSpec,
    duration_s: float,
    g: GestureProfile | None = None,
) -> IQRecording:
    """Carriers gated by a square wave in {1 - depth, 1} at ``m.f_mod_hz``."""
    if m.f_mod_hz >= cfg.sample_rate_hz / 2:
        raise SynthError("modulation frequency violates Nyquist")
    env = None if m.depth == 0 else square_envelope(m)
    return _generate(cfg, duration_s, g, carriers_on=True, envelope=env)


def envelope(rec: IQRecording) -> IQRecording:
    """Magnitude detection: |x| as a (real-valued) recording."""
    mag = np.abs(rec.samples).astype(np.float64)
    return IQRecording(mag.astype(np.complex128), rec.sample_rate_hz, rec.origin)


def envelope_aps(rec: IQRecording, subwindow_s: float = 0.01) -> AveragePowerSpectrum:
    """APS of the mean-removed magnitude envelope, the input of ``detect_modulation``."""
    mag = np.abs(rec.samples)
    seg = Segment((mag - mag.mean()).astype(np.complex128), rec.sample_rate_hz, 0, "envelope")
    return average_power_spectrum(seg, subwindow_s)


def detect_modulation(
    aps: AveragePowerSpectrum,
    f_expected: float,
    tol_hz: float,
    threshold_db: float = 10.0,
) -> tuple[bool, float, float]:
    """Look for a spectral line near ``f_expected`` in an envelope APS.

    Returns ``(detected, prominence_db, f_peak)``; prominence compares the
    peak against the median of the surrounding +-10*tol band with the
    +-tol search window excluded.
    """
    if tol_hz <= 0:
        raise SynthError("tol_hz must be positive")
    n = len(aps)
    bw = aps.bin_width_hz
    f_max = (n // 2) * bw
    if not 0 < f_expected < f_max:
        raise SynthError(f"expected frequency {f_expected} Hz outside spectrum range (0, {f_max})")
    freqs = np.arange(n // 2 + 1) * bw
    power = aps.power[: n // 2 + 1]
    dist = np.abs(freqs - f_expected)
    search = np.flatnonzero(dist <= tol_hz)
    if search.size == 0:
        search = np.array([int(np.argmin(dist))])
    k_peak = search[np.argmax(power[search])]
    ring = (dist <= 10 * tol_hz) & (dist > tol_hz)
    ref = np.median(power[ring]) if np.any(ring) else 0.0
    tiny = np.finfo(float).tiny
    prominence = 10 * np.log10(max(power[k_peak], tiny) / max(ref, tiny))
    return bool(prominence >= threshold_db), float(prominence), float(freqs[k_peak])


# -- config files ------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """Synthetic world plus recording/feature geometry."""

    synth: SynthConfig
    profiles: tuple[GestureProfile, ...]
    noise_synth: SynthConfig | None = None
    record_s: float = 30.0
    trim_start_s: float = 2.0
    trim_end_s: float = 25.0
    segment_s: float = 0.5
    subwindow_s: float = 0.01
    pool_bins: int = 4096
    takes: int = 1
    # decomposition used for mode-wise subtraction; tau = 0 lets the modes
    # act as narrowband filters along the bin axis instead of reproducing
    # every bin-to-bin fluctuation
    denoise_vmd: VmdConfig = field(default_factory=lambda: VmdConfig(tau=0.0))

    def __post_init__(self):
        if isinstance(self.denoise_vmd, dict):
            object.__setattr__(self, "denoise_vmd", VmdConfig(**self.denoise_vmd))
        check_separability(self.profiles)
        for p in self.profiles:
            if len(p.band_attenuation) != len(self.synth.carrier_bands):
                raise SynthError(f"profile {p.name} does not match the carrier band count")

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.profiles)

    def profile(self, name: str) -> GestureProfile:
        for p in self.profiles:
            if p.name == name:
                return p
        raise SynthError(f"unknown gesture class {name!r}")

    def ambient(self) -> SynthConfig:
        return self.noise_synth or self.synth

    def to_dict(self) -> dict:
        return asdict(self)


_SCENARIO_KEYS = {f.name for f in fields(Scenario)}
_SYNTH_KEYS = {f.name for f in fields(SynthConfig)}


def _synth_from_dict(d: dict) -> SynthConfig:
    unknown = set(d) - _SYNTH_KEYS
    if unknown:
        raise SynthError(f"unknown synth config keys: {sorted(unknown)}")
    return SynthConfig(**d)


def scenario_from_dict(d: dict) -> Scenario:
    unknown = set(d) - _SCENARIO_KEYS
    if unknown:
        raise SynthError(f"unknown scenario keys: {sorted(unknown)}")
    d = dict(d)
    d["synth"] = _synth_from_dict(d["synth"])
    if d.get("noise_synth") is not None:
        d["noise_synth"] = _synth_from_dict(d["noise_synth"])
    d["profiles"] = tuple(GestureProfile(**p) for p in d["profiles"])
    return Scenario(**d)


BUNDLED_SCENARIOS = ("reference", "ablation", "fidelity", "modulation")


def bundled_scenario_path(name: str) -> Path:
    if name not in BUNDLED_SCENARIOS:
        raise SynthError(f"unknown bundled scenario {name!r}; choose from {BUNDLED_SCENARIOS}")
    return Path(__file__).with_name("data") / f"{name}.json"


def load_scenario(path=None, fidelity: bool = False) -> Scenario:
    """Read a scenario JSON file; ``None`` loads the bundled reference scenario."""
    if path is None:
        path = bundled_scenario_path("fidelity" if fidelity else "reference")
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(path, sc: Scenario) -> None:
    with open(path, "w") as fh:
        json.dump(sc.to_dict(), fh, indent=2)
        fh.write("\n")
