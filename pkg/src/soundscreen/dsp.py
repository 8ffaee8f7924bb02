"""Deterministic spectral primitives shared by all feature families.

Framing, windowing, power spectra, the mel filterbank, and the unnormalized
DCT-II kernel live here. Everything is a pure function of its inputs, so
results can be shared freely across threads and cached where convenient.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Additive floor applied to filter energies before any logarithm, so that
# silence stays finite in the log-mel domain.
LOG_FLOOR = 1e-10

FRAME_LEN_SAMPLES = 512   # 32 ms at 16 kHz
HOP_SAMPLES = 256         # 50 % overlap

WINDOWS = ("rectangular", "hamming")


@dataclass(frozen=True)
class FramingParams:
    """Analysis framing: frame length, hop and window type.

    The defaults (512 samples, 256-sample hop, Hamming) are the canonical
    32 ms frames with 50 % overlap at 16 kHz.
    """

    frame_len_samples: int = FRAME_LEN_SAMPLES
    hop_samples: int = HOP_SAMPLES
    window: str = "hamming"

    def __post_init__(self):
        if not 0 < self.hop_samples <= self.frame_len_samples:
            raise ValueError(
                f"hop_samples must satisfy 0 < hop <= frame_len, "
                f"got hop={self.hop_samples}, frame_len={self.frame_len_samples}"
            )
        if self.window not in WINDOWS:
            raise ValueError(f"unknown window {self.window!r}, expected one of {WINDOWS}")

    def window_values(self) -> np.ndarray:
        if self.window == "hamming":
            return np.hamming(self.frame_len_samples)
        return np.ones(self.frame_len_samples)


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    """One-sided squared-magnitude DFT of a single frame."""

    bins: np.ndarray       # length frame_len/2 + 1, all >= 0
    bin_width_hz: float


@dataclass(frozen=True, eq=False)
class MelFilterbank:
    """Triangular bandpass filters with edges equally spaced on the mel scale."""

    weights: np.ndarray        # (num_filters, num_bins)
    band_edges_hz: np.ndarray  # (num_filters + 2,) ascending

    @property
    def num_filters(self) -> int:
        return self.weights.shape[0]


def mel_from_hz(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def hz_from_mel(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def frame_signal(clip, params: FramingParams | None = None) -> np.ndarray:
    """Slice a signal into overlapping windowed frames.

    Frame t starts at t * hop_samples; a trailing remainder shorter than one
    frame is dropped. Returns an array of shape (num_frames, frame_len).
    """
    if params is None:
        params = FramingParams()
    samples = np.asarray(getattr(clip, "samples", clip), dtype=np.float64)
    n = len(samples)
    flen, hop = params.frame_len_samples, params.hop_samples
    if n < flen:
        raise ValueError(f"signal of {n} samples is shorter than one frame ({flen})")
    num_frames = (n - flen) // hop + 1
    starts = np.arange(num_frames) * hop
    frames = np.lib.stride_tricks.sliding_window_view(samples, flen)[starts]
    return frames * params.window_values()


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


@lru_cache(maxsize=32)
def _stage_twiddles(m: int) -> np.ndarray:
    return np.exp(-2j * np.pi * np.arange(m // 2) / m)


def _fft_radix2(x: np.ndarray) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT along the last axis."""
    n = x.shape[-1]
    if n < 1 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    a = np.ascontiguousarray(x, dtype=np.complex128)[..., _bit_reversal(n)]
    m = 2
    while m <= n:
        half = m // 2
        blocks = a.reshape(a.shape[:-1] + (n // m, m))
        # butterfly: even' = even + w*odd, odd' = even - w*odd
        t = blocks[..., half:] * _stage_twiddles(m)
        blocks[..., half:] = blocks[..., :half] - t
        blocks[..., :half] += t
        m *= 2
    return a


def power_spectra(frames: np.ndarray, sample_rate_hz: int = 16000) -> np.ndarray:
    """Squared-magnitude one-sided spectra for a batch of frames.

    frames has shape (num_frames, frame_len) with frame_len a power of two;
    the result has shape (num_frames, frame_len/2 + 1).
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    n = frames.shape[-1]
    spectrum = _fft_radix2(frames)[..., : n // 2 + 1]
    return (spectrum.real ** 2 + spectrum.imag ** 2)


def power_spectrum(frame: np.ndarray, sample_rate_hz: int = 16000) -> PowerSpectrum:
    """Power spectrum of one windowed frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1:
        raise ValueError(f"expected a single 1-D frame, got shape {frame.shape}")
    bins = power_spectra(frame[None, :], sample_rate_hz)[0]
    return PowerSpectrum(bins=bins, bin_width_hz=sample_rate_hz / len(frame))


@lru_cache(maxsize=32)
def mel_filterbank(
    num_filters: int = 26,
    frame_len_samples: int = FRAME_LEN_SAMPLES,
    sample_rate_hz: int = 16000,
) -> MelFilterbank:
    """Build triangular mel filters covering 0 .. sample_rate/2.

    Band edges are equally spaced in mel; filter b rises over
    [edge_b, edge_{b+1}] and falls over [edge_{b+1}, edge_{b+2}], evaluated at
    the FFT bin centre frequencies so adjacent filters tile without holes.
    """
    if num_filters < 1:
        raise ValueError("num_filters must be positive")
    num_bins = frame_len_samples // 2 + 1
    fmax = sample_rate_hz / 2.0
    edges = hz_from_mel(np.linspace(0.0, float(mel_from_hz(fmax)), num_filters + 2))
    freqs = np.arange(num_bins) * (sample_rate_hz / frame_len_samples)

    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    weights = np.clip(np.minimum(rising, falling), 0.0, None)
    return MelFilterbank(weights=weights, band_edges_hz=edges)


def filter_energies(spec: PowerSpectrum, fb: MelFilterbank) -> np.ndarray:
    """Per-filter energies: the mel-weighted sums of the power bins."""
    if fb.weights.shape[1] != len(spec.bins):
        raise ValueError(
            f"filterbank built for {fb.weights.shape[1]} bins, "
            f"spectrum has {len(spec.bins)}"
        )
    return fb.weights @ spec.bins


@lru_cache(maxsize=256)
def dct2_matrix(length: int, order: int) -> np.ndarray:
    """Cosine kernel matrix K[p, i] = cos((2i+1) p pi / (2 length))."""
    if not 1 <= order <= length:
        raise ValueError(f"order must be in 1..{length}, got {order}")
    i = np.arange(length)
    p = np.arange(order)[:, None]
    m = np.cos((2 * i + 1) * p * np.pi / (2 * length))
    m.flags.writeable = False
    return m


def dct2(seq: np.ndarray, order: int) -> np.ndarray:
    """Unnormalized DCT-II: out[p] = sum_i seq[i] cos((2i+1) p pi / (2 M))."""
    seq = np.asarray(seq, dtype=np.float64)
    return dct2_matrix(len(seq), order) @ seq
