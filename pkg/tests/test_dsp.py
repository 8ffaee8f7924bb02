"""Framing, FFT power spectra, mel filterbank, and DCT-II."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dct2_literal, naive_dft_power
from soundscreen.dsp import (
    FramingParams,
    dct2,
    dct2_matrix,
    filter_energies,
    frame_signal,
    mel_filterbank,
    mel_from_hz,
    power_spectra,
    power_spectrum,
)


class TestFraming:
    def test_canonical_clip_frame_count(self):
        frames = frame_signal(np.zeros(160000), FramingParams())
        assert frames.shape == (624, 512)

    def test_exact_single_frame(self):
        frames = frame_signal(np.arange(512, dtype=float), FramingParams())
        assert frames.shape == (1, 512)

    def test_too_short_signal_rejected(self):
        with pytest.raises(ValueError, match="shorter than one frame"):
            frame_signal(np.zeros(511), FramingParams())

    def test_hop_offsets(self):
        signal = np.arange(2048, dtype=float)
        params = FramingParams(window="rectangular")
        frames = frame_signal(signal, params)
        for i, frame in enumerate(frames):
            np.testing.assert_array_equal(frame, signal[i * 256 : i * 256 + 512])

    def test_hamming_window_applied(self):
        frames = frame_signal(np.ones(512), FramingParams())
        np.testing.assert_allclose(frames[0], np.hamming(512))

    @given(
        extra=st.integers(min_value=0, max_value=8192),
        frame_len=st.sampled_from([64, 128, 256, 512]),
        hop=st.integers(min_value=1, max_value=64),
    )
    @settings(max_examples=60, deadline=None)
    def test_frame_count_formula(self, extra, frame_len, hop):
        params = FramingParams(frame_len_samples=frame_len, hop_samples=hop)
        num_samples = frame_len + extra
        frames = frame_signal(np.zeros(num_samples), params)
        assert frames.shape == ((num_samples - frame_len) // hop + 1, frame_len)

    def test_rejects_unknown_window(self):
        with pytest.raises(ValueError, match="window"):
            FramingParams(window="hann")

    def test_rejects_nonpositive_hop(self):
        with pytest.raises(ValueError):
            FramingParams(hop_samples=0)

    def test_rejects_hop_beyond_frame(self):
        with pytest.raises(ValueError):
            FramingParams(frame_len_samples=256, hop_samples=512)


class TestPowerSpectrum:
    def test_zero_frame(self):
        np.testing.assert_array_equal(power_spectrum(np.zeros(512)).bins, np.zeros(257))

    def test_bin_metadata(self):
        spec = power_spectrum(np.ones(512))
        assert len(spec.bins) == 257
        assert spec.bin_width_hz == pytest.approx(31.25)

    def test_bin_aligned_cosine_concentrates(self):
        n = 512
        k = 32
        frame = np.cos(2 * np.pi * k * np.arange(n) / n)
        bins = power_spectrum(frame).bins
        assert bins[k] == pytest.approx((n / 2) ** 2, rel=1e-9)
        others = np.delete(bins, k)
        assert others.max() <= 1e-9 * bins[k]

    def test_matches_naive_dft(self, rng):
        for _ in range(20):
            frame = rng.normal(size=512)
            expected = naive_dft_power(frame)
            np.testing.assert_allclose(power_spectrum(frame).bins, expected, rtol=1e-6, atol=1e-9)

    def test_parseval(self, rng):
        n = 512
        frame = rng.normal(size=n)
        bins = power_spectrum(frame).bins
        two_sided_sum = 2.0 * bins.sum() - bins[0] - bins[n // 2]
        np.testing.assert_allclose(two_sided_sum / n, np.sum(frame**2), rtol=1e-9)

    def test_batch_matches_single(self, rng):
        frames = rng.normal(size=(5, 256))
        batch = power_spectra(frames)
        for row, frame in zip(batch, frames):
            np.testing.assert_allclose(row, power_spectrum(frame).bins, rtol=1e-12)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            power_spectrum(np.zeros(500))

    def test_rejects_2d_input(self):
        with pytest.raises(ValueError, match="1-D"):
            power_spectrum(np.zeros((2, 512)))


class TestMelFilterbank:
    def test_shape(self):
        fb = mel_filterbank(26, 512, 16000)
        assert fb.weights.shape == (26, 257)
        assert fb.num_filters == 26

    def test_weights_nonnegative(self):
        fb = mel_filterbank(26, 512, 16000)
        assert (fb.weights >= 0.0).all()

    def test_no_holes_between_first_and_last_peak(self):
        fb = mel_filterbank(26, 512, 16000)
        coverage = fb.weights.sum(axis=0)
        peaks = [int(np.argmax(row)) for row in fb.weights]
        covered = coverage[min(peaks) : max(peaks) + 1]
        assert (covered > 0.0).all()

    def test_band_edges_equally_spaced_in_mel(self):
        fb = mel_filterbank(26, 512, 16000)
        assert len(fb.band_edges_hz) == 28
        assert fb.band_edges_hz[0] == pytest.approx(0.0)
        assert fb.band_edges_hz[-1] == pytest.approx(8000.0)
        gaps = np.diff(mel_from_hz(fb.band_edges_hz))
        np.testing.assert_allclose(gaps, gaps[0], rtol=1e-9)

    def test_every_filter_has_support(self):
        fb = mel_filterbank(26, 512, 16000)
        assert (fb.weights.sum(axis=1) > 0.0).all()

    def test_filter_energies_matrix_product(self, rng):
        fb = mel_filterbank(26, 512, 16000)
        spec = power_spectrum(rng.normal(size=512))
        np.testing.assert_allclose(filter_energies(spec, fb), fb.weights @ spec.bins, rtol=1e-12)

    def test_filter_energies_rejects_wrong_length(self):
        fb = mel_filterbank(26, 512, 16000)
        spec = power_spectrum(np.zeros(256))
        with pytest.raises(ValueError, match="bins"):
            filter_energies(spec, fb)

    def test_rejects_zero_filters(self):
        with pytest.raises(ValueError):
            mel_filterbank(0, 512, 16000)


class TestDct2:
    def test_constant_sequence(self):
        out = dct2(np.full(8, 3.0), 5)
        assert out[0] == pytest.approx(24.0)
        np.testing.assert_allclose(out[1:], 0.0, atol=1e-12)

    def test_first_basis_function(self):
        m = 16
        seq = np.cos((2 * np.arange(m) + 1) * np.pi / (2 * m))
        out = dct2(seq, 3)
        assert out[1] == pytest.approx(m / 2)
        assert out[0] == pytest.approx(0.0, abs=1e-12)
        assert out[2] == pytest.approx(0.0, abs=1e-12)

    def test_matches_literal_double_loop(self, rng):
        for m, order in [(8, 8), (26, 23), (32, 15), (13, 5)]:
            seq = rng.normal(size=m)
            np.testing.assert_allclose(dct2(seq, order), dct2_literal(seq, order), rtol=1e-9, atol=1e-9)

    def test_matrix_rows_are_kernel(self, rng):
        seq = rng.normal(size=26)
        np.testing.assert_allclose(dct2_matrix(26, 23) @ seq, dct2(seq, 23), rtol=1e-12)

    @given(
        st.lists(st.floats(min_value=-100, max_value=100), min_size=4, max_size=32),
        st.floats(min_value=-5, max_value=5),
    )
    @settings(max_examples=40, deadline=None)
    def test_scaling_linearity(self, values, scale):
        seq = np.asarray(values)
        order = len(seq) // 2 + 1
        np.testing.assert_allclose(
            dct2(scale * seq, order), scale * dct2(seq, order), rtol=1e-9, atol=1e-9
        )

    def test_rejects_order_beyond_input(self):
        with pytest.raises(ValueError):
            dct2(np.zeros(8), 9)

    def test_rejects_zero_order(self):
        with pytest.raises(ValueError):
            dct2(np.zeros(8), 0)
