"""Frequency-domain engine.

Direct DFT (the O(N^2) reference), a vectorised radix-2 FFT and its inverse,
bin-to-frequency mapping, and the averaged short-window power spectrum (APS)
used as the gesture feature.

All transforms accept arrays with leading batch axes and transform along the
last axis.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .signal_io import Segment


class SpectrumError(ValueError):
    pass


class Source(str, Enum):
    GESTURE = "gesture"
    NOISE = "noise"
    DENOISED = "denoised"


@dataclass(frozen=True)
class Spectrum:
    bins: np.ndarray
    sample_rate_hz: float
    n: int

    def __post_init__(self):
        if self.bins.shape[-1] != self.n:
            raise SpectrumError(f"bins length {self.bins.shape[-1]} != n={self.n}")

    @property
    def bin_width_hz(self) -> float:
        return self.sample_rate_hz / self.n


@dataclass(frozen=True)
class AveragePowerSpectrum:
    """Mean |X[k]|^2 over the sub-windows of one segment."""

    power: np.ndarray
    bin_width_hz: float
    n_subwindows: int
    source: Source = Source.GESTURE
    label: str | None = None

    def __post_init__(self):
        power = np.asarray(self.power, dtype=float)
        if power.ndim != 1 or power.size == 0:
            raise SpectrumError("power must be a non-empty 1-D vector")
        if np.any(power < 0):
            raise SpectrumError("power values must be non-negative")
        power.setflags(write=False)
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "source", Source(self.source))

    def __len__(self) -> int:
        return self.power.size

    def frequencies(self) -> np.ndarray:
        return np.arange(self.power.size) * self.bin_width_hz

    def with_power(self, power: np.ndarray, source: Source | str | None = None) -> "AveragePowerSpectrum":
        return AveragePowerSpectrum(
            power=power,
            bin_width_hz=self.bin_width_hz,
            n_subwindows=self.n_subwindows,
            source=self.source if source is None else Source(source),
            label=self.label,
        )


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _as_complex(x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1:] == (0,) or x.ndim == 0:
        raise SpectrumError("empty input")
    return x.astype(np.complex128, copy=False)


def dft_direct(x, sample_rate_hz: float = 1.0, chunk_rows: int = 256) -> Spectrum:
    """Evaluate X[k] = sum_n x[n] exp(-2j pi k n / N) by the definition.

    The exponent index k*n is reduced modulo N in integer arithmetic so the
    twiddles stay accurate for large N. Rows of the DFT matrix are built in
    chunks to bound memory.
    """
    x = _as_complex(x)
    n = x.shape[-1]
    idx = np.arange(n, dtype=np.int64)
    out = np.empty(x.shape, dtype=np.complex128)
    for start in range(0, n, chunk_rows):
        k = idx[start:start + chunk_rows, None]
        w = np.exp(-2j * np.pi * ((k * idx[None, :]) % n) / n)
        out[..., start:start + chunk_rows] = x @ w.T
    return Spectrum(out, float(sample_rate_hz), n)


_BASE = 64


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    # decimation in time: a small direct DFT on strided subsequences, then
    # log2(N/base) butterfly stages combining even/odd halves
    n = x.shape[-1]
    batch = x.shape[:-1]
    base = min(n, _BASE)
    kk = np.arange(base)
    w = np.exp(-2j * np.pi * ((kk[:, None] * kk[None, :]) % base) / base)
    # column m of the reshaped array holds x[m], x[m + n/base], ...
    X = w @ x.reshape(*batch, base, n // base)
    while X.shape[-2] < n:
        half = X.shape[-1] // 2
        size = X.shape[-2]
        twiddle = np.exp(-1j * np.pi * np.arange(size) / size)[:, None]
        t = X[..., half:] * twiddle
        even = X[..., :half]
        out = np.empty(batch + (2 * size, half), dtype=np.complex128)
        np.add(even, t, out=out[..., :size, :])
        np.subtract(even, t, out=out[..., size:, :])
        X = out
    return X.reshape(*batch, n)


def fft(x, sample_rate_hz: float = 1.0) -> Spectrum:
    """Radix-2 FFT along the last axis. Length must be a power of two."""
    x = _as_complex(x)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise SpectrumError(f"fft length {n} is not a power of two")
    return Spectrum(_fft_pow2(x), float(sample_rate_hz), n)


def ifft(X) -> np.ndarray:
    """Inverse of :func:`fft`: x[n] = (1/N) sum_k X[k] exp(2j pi k n / N)."""
    bins = X.bins if isinstance(X, Spectrum) else X
    bins = _as_complex(bins)
    n = bins.shape[-1]
    if not is_power_of_two(n):
        raise SpectrumError(f"ifft length {n} is not a power of two")
    return np.conj(_fft_pow2(np.conj(bins))) / n


def transform(x) -> np.ndarray:
    """FFT when the length allows it, direct DFT otherwise."""
    x = _as_complex(x)
    if is_power_of_two(x.shape[-1]):
        return _fft_pow2(x)
    return dft_direct(x).bins


def inverse_transform(X) -> np.ndarray:
    X = _as_complex(X)
    n = X.shape[-1]
    if is_power_of_two(n):
        return ifft(X)
    return np.conj(dft_direct(np.conj(X)).bins) / n


def bin_frequency(k: int, fs: float, n: int) -> float:
    if not 0 <= k < n:
        raise SpectrumError(f"bin index {k} outside [0, {n})")
    return k * fs / n


def _window(kind: str, n: int) -> np.ndarray | None:
    if kind in ("rect", "rectangular", "none", None):
        return None
    if kind == "hann":
        return np.hanning(n)
    raise SpectrumError(f"unknown window {kind!r}")


def subwindow_power(windows: np.ndarray, window: str = "rect", nfft: int | None = None) -> np.ndarray:
    """|FFT|^2 of each row of ``windows`` (rows zero-padded to ``nfft``)."""
    windows = np.asarray(windows, dtype=np.complex128)
    sub_n = windows.shape[-1]
    taper = _window(window, sub_n)
    if taper is not None:
        windows = windows * taper
    if nfft is None:
        nfft = sub_n if is_power_of_two(sub_n) else next_power_of_two(sub_n)
    if nfft != sub_n:
        padded = np.zeros(windows.shape[:-1] + (nfft,), dtype=np.complex128)
        padded[..., :sub_n] = windows
        windows = padded
    X = _fft_pow2(windows)
    return X.real ** 2 + X.imag ** 2


def average_power_spectrum(
    seg: Segment,
    subwindow_len_s: float,
    window: str = "rect",
    source: Source | str = Source.GESTURE,
) -> AveragePowerSpectrum:
    """Split ``seg`` into non-overlapping sub-windows and average their power spectra.

    Sub-windows whose sample count is not a power of two are zero-padded to the
    next power of two, so ``len(power)`` is the FFT length and the bin width is
    ``fs / nfft``.
    """
    if subwindow_len_s <= 0:
        raise SpectrumError("sub-window length must be positive")
    fs = seg.sample_rate_hz
    sub_n = int(round(subwindow_len_s * fs))
    if sub_n < 2:
        raise SpectrumError(f"sub-window of {subwindow_len_s} s is {sub_n} samples; need >= 2")
    if sub_n > len(seg.samples):
        raise SpectrumError("sub-window longer than segment")
    m = len(seg.samples) // sub_n
    windows = np.asarray(seg.samples[: m * sub_n]).reshape(m, sub_n)
    nfft = sub_n if is_power_of_two(sub_n) else next_power_of_two(sub_n)
    power = subwindow_power(windows, window=window, nfft=nfft)
    # fixed-order reduction over sub-windows
    total = np.zeros(nfft)
    for row in power:
        total += row
    return AveragePowerSpectrum(
        power=total / m,
        bin_width_hz=fs / nfft,
        n_subwindows=m,
        source=source,
        label=seg.source_label,
    )


# -- CSV exchange ------------------------------------------------------------

CSV_FIXED_COLUMNS = ("label", "source", "n_subwindows", "bin_width_hz")


def write_aps_csv(path, spectra: Sequence[AveragePowerSpectrum]) -> None:
    """One row per spectrum: label, source, n_subwindows, bin_width_hz, p0..p{L-1}."""
    if not spectra:
        raise SpectrumError("no spectra to write")
    length = len(spectra[0])
    if any(len(s) != length for s in spectra):
        raise SpectrumError("all spectra in one CSV must have the same length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(CSV_FIXED_COLUMNS) + [f"p{i}" for i in range(length)])
        for s in spectra:
            writer.writerow(
                [s.label or "", s.source.value, s.n_subwindows, repr(float(s.bin_width_hz))]
                + [repr(float(v)) for v in s.power]
            )


def read_aps_csv(path) -> list[AveragePowerSpectrum]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SpectrumError(f"{path}: empty CSV") from None
        if tuple(header[:4]) != CSV_FIXED_COLUMNS:
            raise SpectrumError(f"{path}: unexpected header {header[:4]}")
        out = []
        for row in reader:
            if not row:
                continue
            out.append(
                AveragePowerSpectrum(
                    power=np.array(row[4:], dtype=float),
                    bin_width_hz=float(row[3]),
                    n_subwindows=int(row[2]),
                    source=row[1],
                    label=row[0] or None,
                )
            )
    return out


def mean_spectrum(spectra: Iterable[AveragePowerSpectrum], source=Source.NOISE) -> AveragePowerSpectrum:
    spectra = list(spectra)
    if not spectra:
        raise SpectrumError("no spectra to average")
    first = spectra[0]
    total = np.zeros(len(first))
    for s in spectra:
        if len(s) != len(first) or s.bin_width_hz != first.bin_width_hz:
            raise SpectrumError("spectra differ in length or bin width")
        total += s.power
    return AveragePowerSpectrum(
        power=total / len(spectra),
        bin_width_hz=first.bin_width_hz,
        n_subwindows=sum(s.n_subwindows for s in spectra),
        source=source,
        label=first.label,
    )
