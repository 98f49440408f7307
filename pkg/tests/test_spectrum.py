import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emgesture.signal_io import IQRecording, Segment, segment
from emgesture.spectrum import (
    AveragePowerSpectrum,
    Source,
    SpectrumError,
    average_power_spectrum,
    bin_frequency,
    dft_direct,
    fft,
    ifft,
    mean_spectrum,
    read_aps_csv,
    write_aps_csv,
)


def _rand_complex(rng, *shape):
    return rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)


# -- direct DFT ---------------------------------------------------------------

def test_dft_impulse():
    X = dft_direct([1, 0, 0, 0]).bins
    np.testing.assert_allclose(X, [1, 1, 1, 1], atol=1e-15)


def test_dft_constant():
    c = 0.3 - 0.2j
    X = dft_direct(np.full(16, c)).bins
    assert X[0] == pytest.approx(16 * c)
    np.testing.assert_allclose(X[1:], 0, atol=1e-13)


def test_dft_complex_exponential():
    n = np.arange(8)
    X = dft_direct(np.exp(2j * np.pi * 3 * n / 8)).bins
    expected = np.zeros(8, dtype=complex)
    expected[3] = 8
    np.testing.assert_allclose(X, expected, atol=1e-12)


def test_dft_matches_definition_term_by_term():
    # independent scalar loop over the defining sum
    rng = np.random.default_rng(1)
    x = _rand_complex(rng, 12)
    N = x.size
    ref = [sum(x[m] * np.exp(-2j * np.pi * k * m / N) for m in range(N)) for k in range(N)]
    np.testing.assert_allclose(dft_direct(x).bins, ref, atol=1e-12)


def test_dft_empty():
    with pytest.raises(SpectrumError):
        dft_direct([])


# -- FFT ----------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 4, 8, 64, 128, 1024, 4096])
def test_fft_matches_dft(n):
    rng = np.random.default_rng(n)
    x = _rand_complex(rng, 5, n)
    err = np.abs(fft(x).bins - dft_direct(x).bins).max()
    assert err < 1e-9


def test_fft_impulse_flat():
    x = np.zeros(32, dtype=complex)
    x[0] = 1
    np.testing.assert_allclose(fft(x).bins, np.ones(32), atol=1e-15)


def test_fft_rejects_non_power_of_two():
    with pytest.raises(SpectrumError):
        fft(np.ones(12))


def test_fft_large_against_dft_subset():
    # N = 2^16: compare a handful of bins against the defining sum
    rng = np.random.default_rng(7)
    x = _rand_complex(rng, 1 << 16)
    X = fft(x).bins
    n = np.arange(x.size)
    for k in (0, 1, 12345, 40000, x.size - 1):
        ref = np.sum(x * np.exp(-2j * np.pi * ((k * n) % x.size) / x.size))
        assert abs(X[k] - ref) < 1e-9


def test_ifft_inverse_pairs():
    N = 8
    c = 0.5 + 0.25j
    X = np.zeros(N, dtype=complex)
    X[0] = N * c
    np.testing.assert_allclose(ifft(X), np.full(N, c), atol=1e-15)
    np.testing.assert_allclose(ifft(np.ones(4)), [1, 0, 0, 0], atol=1e-15)


def test_ifft_of_direct_dft_round_trip():
    rng = np.random.default_rng(3)
    x = _rand_complex(rng, 256)
    assert np.abs(ifft(dft_direct(x)) - x).max() < 1e-9


def test_ifft_rejects_non_power_of_two():
    with pytest.raises(SpectrumError):
        ifft(np.ones(6))


@settings(max_examples=40, deadline=None)
@given(log_n=st.integers(min_value=0, max_value=11), seed=st.integers(0, 2 ** 32 - 1))
def test_fft_properties(log_n, seed):
    rng = np.random.default_rng(seed)
    x = _rand_complex(rng, 1 << log_n)
    X = fft(x).bins
    # agreement with the definition
    assert np.abs(X - dft_direct(x).bins).max() < 1e-9
    # round trip
    assert np.abs(ifft(X) - x).max() < 1e-9
    # Parseval
    energy = np.sum(np.abs(x) ** 2)
    assert abs(energy - np.sum(np.abs(X) ** 2) / x.size) <= 1e-9 * energy


# -- bins -----------------------------------------------------------------------

def test_bin_frequency():
    assert bin_frequency(0, 20e6, 200_000) == 0
    assert bin_frequency(1, 20e6, 200_000) == pytest.approx(100.0)
    assert bin_frequency(3, 8, 8) == 3
    with pytest.raises(SpectrumError):
        bin_frequency(8, 8, 8)
    with pytest.raises(SpectrumError):
        bin_frequency(-1, 8, 8)


# -- averaged power spectrum ---------------------------------------------------

def _segment(x, fs):
    return Segment(np.asarray(x, dtype=complex), fs, 0, "x")


def test_aps_reference_subwindow_count():
    fs = 12800.0
    seg = _segment(np.zeros(int(0.5 * fs)), fs)
    aps = average_power_spectrum(seg, 0.01)
    assert aps.n_subwindows == 50
    assert len(aps) == 128
    assert aps.bin_width_hz == pytest.approx(100.0)


def test_aps_constant():
    c = 0.5 - 0.5j
    aps = average_power_spectrum(_segment(np.full(64, c), 64.0), 0.25)
    n = 16
    assert aps.power[0] == pytest.approx((n * abs(c)) ** 2)
    np.testing.assert_allclose(aps.power[1:], 0, atol=1e-20)


def test_aps_pure_tone():
    n, k0 = 64, 5
    t = np.arange(4 * n)
    x = np.cos(2 * np.pi * k0 * t / n)
    aps = average_power_spectrum(_segment(x, float(n)), 1.0)
    oracle = np.abs(dft_direct(x[:n]).bins) ** 2
    np.testing.assert_allclose(aps.power, oracle, atol=1e-9)
    assert aps.power[k0] == pytest.approx(n ** 2 / 4)
    assert aps.power[n - k0] == pytest.approx(n ** 2 / 4)
    rest = np.delete(aps.power, [k0, n - k0])
    assert rest.max() < 1e-18


def test_aps_zero_pads_non_power_of_two():
    fs = 1000.0
    x = np.ones(100, dtype=complex)
    aps = average_power_spectrum(_segment(x, fs), 0.02)  # 20-sample windows
    assert aps.n_subwindows == 5
    assert len(aps) == 32
    assert aps.bin_width_hz == pytest.approx(fs / 32)
    assert aps.power[0] == pytest.approx(400.0)


def test_aps_errors():
    seg = _segment(np.ones(10), 10.0)
    with pytest.raises(SpectrumError):
        average_power_spectrum(seg, 2.0)
    with pytest.raises(SpectrumError):
        average_power_spectrum(seg, 0.0)
    with pytest.raises(SpectrumError):
        average_power_spectrum(seg, 0.1)  # one sample


def test_aps_is_mean_of_halves():
    rng = np.random.default_rng(0)
    fs = 256.0
    x = _rand_complex(rng, 512)
    whole = average_power_spectrum(_segment(x, fs), 0.125)
    a = average_power_spectrum(_segment(x[:256], fs), 0.125)
    b = average_power_spectrum(_segment(x[256:], fs), 0.125)
    np.testing.assert_allclose(whole.power, (a.power + b.power) / 2, rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(shift=st.integers(0, 63), k0=st.integers(1, 15), seed=st.integers(0, 1000))
def test_aps_shift_invariance(shift, k0, seed):
    # period 16 divides the 64-sample window, so a circular shift only moves phase
    rng = np.random.default_rng(seed)
    n = np.arange(256)
    amp = rng.uniform(0.1, 1.0, 2)
    x = amp[0] * np.exp(2j * np.pi * k0 * n / 16) + amp[1] * np.cos(2 * np.pi * 3 * n / 16)
    base = average_power_spectrum(_segment(x, 64.0), 1.0)
    shifted = average_power_spectrum(_segment(np.roll(x, shift), 64.0), 1.0)
    np.testing.assert_allclose(shifted.power, base.power, atol=1e-9 * base.power.max())


def test_aps_hann_option_changes_leakage():
    n = 64
    t = np.arange(n)
    x = np.exp(2j * np.pi * 5.5 * t / n)
    rect = average_power_spectrum(_segment(x, float(n)), 1.0)
    hann = average_power_spectrum(_segment(x, float(n)), 1.0, window="hann")
    far = slice(20, 40)
    assert hann.power[far].max() < rect.power[far].max()


def test_aps_from_recording_segments():
    rng = np.random.default_rng(2)
    rec = IQRecording(_rand_complex(rng, 4096), 1024.0)
    spectra = [average_power_spectrum(s, 0.25) for s in segment(rec, 1.0, "fist")]
    assert len(spectra) == 4
    assert all(s.label == "fist" and s.n_subwindows == 4 for s in spectra)


def test_aps_rejects_negative_power():
    with pytest.raises(SpectrumError):
        AveragePowerSpectrum(np.array([1.0, -1.0]), 1.0, 1)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    spectra = [
        AveragePowerSpectrum(rng.uniform(0, 10, 8), 100.0, 50, Source.GESTURE, "fist"),
        AveragePowerSpectrum(rng.uniform(0, 10, 8), 100.0, 50, Source.DENOISED, "gesture-1"),
    ]
    path = tmp_path / "f.csv"
    write_aps_csv(path, spectra)
    header = path.read_text().splitlines()[0].split(",")
    assert header[:5] == ["label", "source", "n_subwindows", "bin_width_hz", "p0"]
    back = read_aps_csv(path)
    for a, b in zip(spectra, back):
        np.testing.assert_array_equal(a.power, b.power)
        assert (a.label, a.source, a.n_subwindows, a.bin_width_hz) == (b.label, b.source, b.n_subwindows, b.bin_width_hz)


def test_mean_spectrum():
    a = AveragePowerSpectrum(np.array([1.0, 3.0]), 10.0, 5, Source.NOISE, "noise")
    b = AveragePowerSpectrum(np.array([3.0, 5.0]), 10.0, 5, Source.NOISE, "noise")
    m = mean_spectrum([a, b])
    np.testing.assert_array_equal(m.power, [2.0, 4.0])
    assert m.source is Source.NOISE
