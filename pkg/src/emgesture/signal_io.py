"""IQ recordings: wav loading/saving, complex reconstruction, trimming, segmentation.

Wav layout: two channels, channel 0 = in-phase, channel 1 = quadrature
(``swap_iq=True`` flips the convention). Integer PCM is scaled by
``2**(bits-1)``; float data is passed through unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.io import wavfile


class WavFormatError(ValueError):
    """Base class for malformed IQ wav files."""


class ChannelCountError(WavFormatError):
    pass


class UnsupportedEncodingError(WavFormatError):
    pass


class EmptyRecordingError(WavFormatError):
    pass


class Origin(str, Enum):
    FILE = "file"
    SYNTHETIC = "synthetic"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a).view()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class IQRecording:
    samples: np.ndarray
    sample_rate_hz: float
    origin: Origin = Origin.FILE

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        samples = np.asarray(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise EmptyRecordingError("recording has no samples")
        if not np.iscomplexobj(samples):
            samples = samples.astype(np.complex128)
        object.__setattr__(self, "samples", _frozen(samples))
        object.__setattr__(self, "origin", Origin(self.origin))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True, eq=False)
class Segment:
    samples: np.ndarray
    sample_rate_hz: float
    index: int
    source_label: str | None = None

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


_PCM_SCALE = {np.dtype(np.int16): 2.0 ** 15, np.dtype(np.int32): 2.0 ** 31}


def _normalize(data: np.ndarray) -> np.ndarray:
    if data.dtype in _PCM_SCALE:
        return data.astype(np.float64) / _PCM_SCALE[data.dtype]
    if data.dtype in (np.float32, np.float64):
        return data
    raise UnsupportedEncodingError(f"unsupported wav sample encoding {data.dtype}")


def load_iq_wav(path, swap_iq: bool = False) -> IQRecording:
    """Read a two-channel wav and return ``samples = I + 1j*Q``."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such wav file: {path}")
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise UnsupportedEncodingError(f"{path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        n_ch = 1 if data.ndim == 1 else data.shape[1]
        raise ChannelCountError(f"{path}: channel count {n_ch}, expected 2")
    if rate <= 0:
        raise WavFormatError(f"{path}: sample rate {rate} is not positive")
    if data.shape[0] == 0:
        raise EmptyRecordingError(f"{path}: zero-length audio")
    data = _normalize(data)
    i_ch, q_ch = (1, 0) if swap_iq else (0, 1)
    ctype = np.complex64 if data.dtype == np.float32 else np.complex128
    samples = np.empty(data.shape[0], dtype=ctype)
    samples.real = data[:, i_ch]
    samples.imag = data[:, q_ch]
    return IQRecording(samples, float(rate), Origin.FILE)


def save_iq_wav(path, rec: IQRecording, encoding: str = "float32") -> None:
    """Write ``rec`` as a two-channel wav (I on channel 0, Q on channel 1).

    ``encoding`` is one of ``float32``, ``pcm16`` or ``pcm32``. PCM values are
    clipped to the representable range.
    """
    rate = int(round(rec.sample_rate_hz))
    if rate != rec.sample_rate_hz:
        raise WavFormatError(f"wav needs an integer sample rate, got {rec.sample_rate_hz}")
    iq = np.stack([rec.samples.real, rec.samples.imag], axis=1)
    if encoding == "float32":
        data = iq.astype(np.float32)
    elif encoding in ("pcm16", "pcm32"):
        dtype = np.int16 if encoding == "pcm16" else np.int32
        scale = _PCM_SCALE[np.dtype(dtype)]
        info = np.iinfo(dtype)
        data = np.clip(np.round(iq * scale), info.min, info.max).astype(dtype)
    else:
        raise UnsupportedEncodingError(f"unknown encoding {encoding!r}")
    wavfile.write(Path(path), rate, data)


def trim(rec: IQRecording, start_s: float, end_s: float) -> IQRecording:
    """Samples in ``[start_s*fs, end_s*fs)`` as a new recording."""
    if start_s >= end_s:
        raise ValueError(f"inverted trim bounds: start {start_s} >= end {end_s}")
    if start_s < 0 or end_s > rec.duration_s + 0.5 / rec.sample_rate_hz:
        raise ValueError(
            f"trim bounds [{start_s}, {end_s}) outside recording of {rec.duration_s} s"
        )
    lo = int(round(start_s * rec.sample_rate_hz))
    hi = min(int(round(end_s * rec.sample_rate_hz)), len(rec))
    return IQRecording(rec.samples[lo:hi], rec.sample_rate_hz, rec.origin)


def segment(rec: IQRecording, segment_len_s: float, label: str | None = None) -> list[Segment]:
    """Non-overlapping fixed-length segments in temporal order; the tail is dropped."""
    if segment_len_s <= 0:
        raise ValueError("segment length must be positive")
    seg_n = int(round(segment_len_s * rec.sample_rate_hz))
    if seg_n == 0 or seg_n > len(rec):
        raise ValueError(
            f"segment of {segment_len_s} s is longer than the {rec.duration_s} s recording"
        )
    count = len(rec) // seg_n
    return [
        Segment(rec.samples[i * seg_n:(i + 1) * seg_n], rec.sample_rate_hz, i, label)
        for i in range(count)
    ]
