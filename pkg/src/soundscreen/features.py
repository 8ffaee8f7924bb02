"""Clip-level feature extraction.

Six feature families turn a 10 s clip into one fixed-length vector:

- ``rcsf``: per-segment matrix of temporal DCT coefficients of the MFCC
  sequence, flattened row-major. Captures how each cepstral coefficient
  modulates over a segment, which is what distinguishes repeated pitch
  arcs from steady content.
- ``mfcc`` / ``mfccd`` / ``mfccdd``: static cepstra, optionally augmented
  with first and second regression differences.
- ``llf_s`` / ``llf_es``: low-level spectral statistics per frame; the
  extended variant adds total and sub-band energies.

Every family aggregates per-segment vectors into the clip vector by
concatenating their per-dimension mean and population standard deviation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .dsp import (
    LOG_FLOOR,
    FramingParams,
    PowerSpectrum,
    dct2_matrix,
    filter_energies,
    frame_signal,
    mel_filterbank,
    power_spectra,
    power_spectrum,
)

FAMILY_RCSF = "rcsf"
FAMILY_MFCC = "mfcc"
FAMILY_MFCCD = "mfccd"
FAMILY_MFCCDD = "mfccdd"
FAMILY_LLF_S = "llf_s"
FAMILY_LLF_ES = "llf_es"
FAMILIES = (FAMILY_RCSF, FAMILY_MFCC, FAMILY_MFCCD, FAMILY_MFCCDD, FAMILY_LLF_S, FAMILY_LLF_ES)

NUM_BASE_LLF = 5
DELTA_WINDOW = 2


@dataclass(frozen=True)
class FeatureConfig:
    """Feature family plus the orders that fix the vector dimensionality."""

    family: str = FAMILY_RCSF
    quefrency_order: int = 23
    temporal_order: int = 15
    frames_per_segment: int = 32
    num_mel_filters: int = 26
    framing: FramingParams = field(default_factory=FramingParams)
    rolloff_fraction: float = 0.85
    num_subbands: int = 8

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown feature family {self.family!r}, expected one of {FAMILIES}")
        if not 1 <= self.quefrency_order < self.num_mel_filters:
            raise ValueError(
                f"quefrency_order must be in [1, {self.num_mel_filters - 1}], got {self.quefrency_order}"
            )
        if not 1 <= self.temporal_order <= self.frames_per_segment:
            raise ValueError(
                f"temporal_order must be in [1, {self.frames_per_segment}], got {self.temporal_order}"
            )
        if not 0.0 < self.rolloff_fraction <= 1.0:
            raise ValueError(f"rolloff_fraction must be in (0, 1], got {self.rolloff_fraction}")
        if self.num_subbands < 1:
            raise ValueError(f"num_subbands must be >= 1, got {self.num_subbands}")

    @property
    def segment_length(self) -> int:
        """Per-segment feature dimensionality before the mean/std doubling."""
        if self.family == FAMILY_RCSF:
            return self.quefrency_order * self.temporal_order
        if self.family == FAMILY_MFCC:
            return self.quefrency_order
        if self.family == FAMILY_MFCCD:
            return 2 * self.quefrency_order
        if self.family == FAMILY_MFCCDD:
            return 3 * self.quefrency_order
        if self.family == FAMILY_LLF_S:
            return NUM_BASE_LLF
        return NUM_BASE_LLF + 1 + self.num_subbands

    @property
    def vector_length(self) -> int:
        return 2 * self.segment_length

    def fingerprint(self) -> str:
        """Stable short digest identifying the extraction configuration."""
        key = "|".join(
            repr(v)
            for v in (
                self.family,
                self.quefrency_order,
                self.temporal_order,
                self.frames_per_segment,
                self.num_mel_filters,
                self.framing.frame_len_samples,
                self.framing.hop_samples,
                self.framing.window,
                self.rolloff_fraction,
                self.num_subbands,
            )
        )
        return hashlib.sha256(key.encode("ascii")).hexdigest()[:16]


@dataclass(eq=False)
class SegmentFeature:
    values: np.ndarray
    segment_index: int = 0


@dataclass(eq=False)
class ClipFeatureVector:
    """One clip's feature vector: per-dimension mean then std over segments."""

    values: np.ndarray
    fingerprint: str
    num_segments: int


def mfcc_frame(energies: np.ndarray, order: int) -> np.ndarray:
    """Cepstral coefficients 0..order-1 of one frame's filter energies.

    C(q) = sum_b log(E(b)) * cos((2b+1)*q*pi / (2B)), with E floored so the
    logarithm stays finite on silence. Coefficient 0 (the log-energy term)
    is included.
    """
    energies = np.asarray(energies, dtype=np.float64)
    if order >= len(energies):
        raise ValueError(f"quefrency order {order} must be < number of filters {len(energies)}")
    log_e = np.log(np.maximum(energies, LOG_FLOOR))
    return dct2_matrix(len(energies), order) @ log_e


def delta_coeffs(per_frame: np.ndarray, window: int = DELTA_WINDOW) -> np.ndarray:
    """Regression differences of a per-frame coefficient sequence.

    delta_t = sum_{w=1..W} w*(c_{t+w} - c_{t-w}) / (2 * sum w^2), with edge
    frames replicated. Apply twice for the second difference.
    """
    x = np.asarray(per_frame, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
        squeeze = True
    else:
        squeeze = False
    num_frames = x.shape[0]
    if num_frames <= 2 * window:
        raise ValueError(f"need more than {2 * window} frames for deltas, got {num_frames}")
    padded = np.pad(x, ((window, window), (0, 0)), mode="edge")
    denom = 2.0 * sum(w * w for w in range(1, window + 1))
    out = np.zeros_like(x)
    for w in range(1, window + 1):
        out += w * (padded[window + w : window + w + num_frames] - padded[window - w : window - w + num_frames])
    out /= denom
    return out[:, 0] if squeeze else out


def llf_frame(
    spec: PowerSpectrum,
    frame: np.ndarray,
    prev_spec: PowerSpectrum | None,
    config: FeatureConfig,
) -> np.ndarray:
    """Low-level spectral features of one frame.

    Base order: bandwidth, centroid, flatness, flux, roll-off frequency.
    The extended family appends the log total energy of the frame samples
    and log energies of contiguous equal-width sub-bands up to Nyquist.
    """
    bins = spec.bins
    freqs = np.arange(len(bins)) * spec.bin_width_hz
    total = float(bins.sum())
    if total > 0.0:
        centroid = float(freqs @ bins) / total
        bandwidth = float(np.sqrt(((freqs - centroid) ** 2 @ bins) / total))
        cum = np.cumsum(bins)
        idx = int(np.searchsorted(cum, config.rolloff_fraction * total))
        rolloff = freqs[min(idx, len(bins) - 1)]
    else:
        centroid = bandwidth = rolloff = 0.0
    floored = bins + LOG_FLOOR
    flatness = float(np.exp(np.mean(np.log(floored))) / np.mean(floored))
    if prev_spec is None:
        flux = 0.0
    else:
        if len(prev_spec.bins) != len(bins):
            raise ValueError("consecutive spectra must share a bin layout")
        flux = float(np.sum((bins - prev_spec.bins) ** 2))
    base = [bandwidth, centroid, flatness, flux, rolloff]
    if config.family != FAMILY_LLF_ES:
        return np.array(base)

    total_energy = float(np.sum(np.asarray(frame, dtype=np.float64) ** 2))
    nyquist = (len(bins) - 1) * spec.bin_width_hz
    band_idx = np.minimum(
        (freqs / (nyquist / config.num_subbands)).astype(int), config.num_subbands - 1
    )
    band_energy = np.bincount(band_idx, weights=bins, minlength=config.num_subbands)
    logs = np.log(np.maximum(np.concatenate(([total_energy], band_energy)), LOG_FLOOR))
    return np.concatenate((base, logs))


def rcsf_segment_matrix(frame_mfccs: np.ndarray, temporal_order: int) -> np.ndarray:
    """Temporal DCT of one segment's MFCC sequence.

    Input rows are frames, columns quefrencies. Output[q, n] =
    sum_t mfcc[t, q] * cos((2t+1)*n*pi / (2L)), for n = 0..temporal_order-1.
    Row q = 0 tracks the short-time energy's temporal variation; column
    n = 0 is (up to scale) the average cepstrum of the segment.
    """
    frame_mfccs = np.asarray(frame_mfccs, dtype=np.float64)
    if frame_mfccs.ndim != 2:
        raise ValueError(f"expected a frames-by-quefrencies matrix, got shape {frame_mfccs.shape}")
    return (dct2_matrix(frame_mfccs.shape[0], temporal_order) @ frame_mfccs).T


def rcsf_segment_vector(matrix: np.ndarray, segment_index: int = 0) -> SegmentFeature:
    """Row-major flattening: all temporal coefficients of quefrency 0 first."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-D segment matrix, got shape {matrix.shape}")
    return SegmentFeature(matrix.reshape(-1).copy(), segment_index)


def _segment_vectors(clip, config: FeatureConfig) -> np.ndarray:
    """Per-segment feature vectors of a clip, shape (K, segment_length)."""
    frames = frame_signal(clip, config.framing)
    seg_len = config.frames_per_segment
    num_segments = frames.shape[0] // seg_len
    if num_segments == 0:
        raise ValueError(
            f"clip too short: {frames.shape[0]} frames, need at least {seg_len} (one segment)"
        )
    frames = frames[: num_segments * seg_len]

    if config.family in (FAMILY_LLF_S, FAMILY_LLF_ES):
        sample_rate = getattr(clip, "sample_rate_hz", 16000)
        per_frame = []
        prev = None
        for frame in frames:
            spec = power_spectrum(frame, sample_rate)
            per_frame.append(llf_frame(spec, frame, prev, config))
            prev = spec
        per_frame = np.array(per_frame)
        return per_frame.reshape(num_segments, seg_len, -1).mean(axis=1)

    fb = mel_filterbank(
        config.num_mel_filters,
        config.framing.frame_len_samples,
        getattr(clip, "sample_rate_hz", 16000),
    )
    spectra = power_spectra(frames)
    energies = spectra @ fb.weights.T
    log_e = np.log(np.maximum(energies, LOG_FLOOR))
    mfccs = log_e @ dct2_matrix(config.num_mel_filters, config.quefrency_order).T

    if config.family == FAMILY_RCSF:
        segments = mfccs.reshape(num_segments, seg_len, config.quefrency_order)
        temporal = dct2_matrix(seg_len, config.temporal_order)
        matrices = np.einsum("nt,ktq->kqn", temporal, segments)
        return matrices.reshape(num_segments, -1)

    if config.family == FAMILY_MFCCD:
        mfccs = np.hstack((mfccs, delta_coeffs(mfccs)))
    elif config.family == FAMILY_MFCCDD:
        delta = delta_coeffs(mfccs)
        mfccs = np.hstack((mfccs, delta, delta_coeffs(delta)))
    return mfccs.reshape(num_segments, seg_len, -1).mean(axis=1)


def clip_feature(clip, config: FeatureConfig) -> ClipFeatureVector:
    """Extract one clip's feature vector under the configured family.

    Frames are grouped into K consecutive non-overlapping segments of
    frames_per_segment; trailing frames beyond the last full segment are
    dropped. The clip vector concatenates the per-dimension mean and
    population standard deviation across the K segment vectors.
    """
    segments = _segment_vectors(clip, config)
    values = np.concatenate((segments.mean(axis=0), segments.std(axis=0)))
    return ClipFeatureVector(values, config.fingerprint(), segments.shape[0])


def save_features(path, labels, vectors: np.ndarray, fingerprint: str) -> None:
    """Write a feature file: a fingerprint header, then one line per clip.

    Each clip line is the label followed by whitespace-separated values,
    printed with full round-trip precision so reruns are byte-identical.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if len(labels) != vectors.shape[0]:
        raise ValueError(f"{len(labels)} labels for {vectors.shape[0]} vectors")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# fingerprint={fingerprint}\n")
        for label, row in zip(labels, vectors):
            fh.write(label + " " + " ".join(repr(float(v)) for v in row) + "\n")


def load_features(path) -> tuple[str, list[str], np.ndarray]:
    """Read a feature file; returns (fingerprint, labels, vectors)."""
    fingerprint = None
    labels: list[str] = []
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if fingerprint is None and "fingerprint=" in line:
                    fingerprint = line.split("fingerprint=", 1)[1].split()[0]
                continue
            parts = line.split()
            labels.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
    if fingerprint is None:
        raise ValueError(f"{path}: missing fingerprint header line")
    if not rows:
        raise ValueError(f"{path}: no feature lines")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: inconsistent vector lengths {sorted(widths)}")
    return fingerprint, labels, np.array(rows, dtype=np.float64)
