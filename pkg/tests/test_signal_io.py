import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.io import wavfile

from emgesture.signal_io import (
    ChannelCountError,
    EmptyRecordingError,
    IQRecording,
    Origin,
    UnsupportedEncodingError,
    load_iq_wav,
    save_iq_wav,
    segment,
    trim,
)


def _write(path, rate, data):
    wavfile.write(path, rate, data)
    return path


def test_float_channels_become_i_plus_jq(tmp_path):
    data = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=np.float32)
    rec = load_iq_wav(_write(tmp_path / "a.wav", 8000, data))
    np.testing.assert_array_equal(rec.samples, [1 + 0j, 0 + 1j])
    assert rec.sample_rate_hz == 8000
    assert rec.origin is Origin.FILE


def test_pcm16_normalisation(tmp_path):
    data = np.array([[16384, 0]], dtype=np.int16)
    rec = load_iq_wav(_write(tmp_path / "b.wav", 1000, data))
    assert rec.samples[0] == 0.5 + 0j


def test_pcm32_normalisation(tmp_path):
    data = np.array([[-(2 ** 31), 2 ** 30]], dtype=np.int32)
    rec = load_iq_wav(_write(tmp_path / "c.wav", 1000, data))
    assert rec.samples[0] == -1.0 + 0.5j


def test_swap_iq(tmp_path):
    data = np.array([[0.25, -0.5]], dtype=np.float32)
    rec = load_iq_wav(_write(tmp_path / "d.wav", 1000, data), swap_iq=True)
    assert rec.samples[0] == -0.5 + 0.25j


def test_mono_is_rejected(tmp_path):
    path = _write(tmp_path / "mono.wav", 1000, np.zeros(10, dtype=np.int16))
    with pytest.raises(ChannelCountError, match="channel count"):
        load_iq_wav(path)


def test_three_channels_rejected(tmp_path):
    path = _write(tmp_path / "tri.wav", 1000, np.zeros((10, 3), dtype=np.float32))
    with pytest.raises(ChannelCountError):
        load_iq_wav(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_iq_wav(tmp_path / "nope.wav")


def test_zero_length(tmp_path):
    path = _write(tmp_path / "empty.wav", 1000, np.zeros((0, 2), dtype=np.float32))
    with pytest.raises(EmptyRecordingError):
        load_iq_wav(path)


def test_unsupported_encoding(tmp_path):
    path = _write(tmp_path / "u8.wav", 1000, np.full((4, 2), 128, dtype=np.uint8))
    with pytest.raises(UnsupportedEncodingError):
        load_iq_wav(path)


def test_not_a_wav(tmp_path):
    path = tmp_path / "junk.wav"
    path.write_bytes(b"not a riff file at all")
    with pytest.raises(UnsupportedEncodingError):
        load_iq_wav(path)


@pytest.mark.parametrize("encoding,step", [("float32", 0.0), ("pcm16", 2.0 ** -15), ("pcm32", 2.0 ** -31)])
def test_round_trip(tmp_path, encoding, step):
    rng = np.random.default_rng(4)
    x = (rng.uniform(-0.9, 0.9, 500) + 1j * rng.uniform(-0.9, 0.9, 500)).astype(np.complex64)
    rec = IQRecording(x, 48000.0)
    save_iq_wav(tmp_path / "rt.wav", rec, encoding)
    back = load_iq_wav(tmp_path / "rt.wav")
    assert back.sample_rate_hz == 48000.0
    err = np.max(np.maximum(np.abs(back.samples.real - x.real), np.abs(back.samples.imag - x.imag)))
    if encoding == "float32":
        assert err == 0.0
    else:
        assert err <= step


def test_recording_is_read_only():
    rec = IQRecording(np.zeros(4, dtype=complex), 10.0)
    with pytest.raises(ValueError):
        rec.samples[0] = 1.0


def test_invalid_sample_rate():
    with pytest.raises(ValueError):
        IQRecording(np.ones(3, dtype=complex), 0.0)


def _ramp(seconds, fs=100.0):
    n = int(round(seconds * fs))
    return IQRecording(np.arange(n) + 0j, fs)


def test_trim_reference_window():
    rec = _ramp(30.0)
    out = trim(rec, 2, 25)
    assert out.duration_s == pytest.approx(23.0)
    assert out.samples[0] == 200
    assert len(rec) == 3000  # original untouched


def test_trim_identity():
    rec = _ramp(3.0)
    out = trim(rec, 0, rec.duration_s)
    np.testing.assert_array_equal(out.samples, rec.samples)


@pytest.mark.parametrize("bounds", [(5, 3), (1, 1), (-1, 2), (0, 31)])
def test_trim_bad_bounds(bounds):
    with pytest.raises(ValueError):
        trim(_ramp(30.0), *bounds)


def test_segment_counts():
    assert len(segment(_ramp(23.0), 0.5)) == 46
    one = segment(_ramp(1.0), 1.0)
    assert len(one) == 1
    np.testing.assert_array_equal(one[0].samples, _ramp(1.0).samples)
    assert len(segment(_ramp(1.2), 0.5)) == 2


def test_segment_too_long():
    with pytest.raises(ValueError):
        segment(_ramp(1.0), 1.5)


def test_segment_order_and_labels():
    segs = segment(_ramp(2.0), 0.5, label="fist")
    assert [s.index for s in segs] == [0, 1, 2, 3]
    assert all(s.source_label == "fist" for s in segs)
    assert len({len(s.samples) for s in segs}) == 1


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=10, max_value=5000),
    seg_n=st.integers(min_value=1, max_value=400),
)
def test_segment_count_and_concatenation(n, seg_n):
    fs = 1000.0
    rec = IQRecording(np.arange(n) + 1j * np.arange(n), fs)
    seg_len = seg_n / fs
    if seg_n > n:
        with pytest.raises(ValueError):
            segment(rec, seg_len)
        return
    segs = segment(rec, seg_len)
    assert len(segs) == n // seg_n
    tail = rec.samples[len(segs) * seg_n:]
    joined = np.concatenate([s.samples for s in segs] + [tail])
    np.testing.assert_array_equal(joined, rec.samples)
