"""Audio loading, canonicalization, clip splitting, and noise corruption.

Every downstream stage consumes the canonical signal produced here: mono
float samples in [-1, 1] at 16 kHz. Classification operates on fixed 10 s
clips cut from longer recordings.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CANONICAL_RATE_HZ = 16000
CLIP_SECONDS = 10.0

LABEL_OBSCENE = "obscene"
LABEL_NON_OBSCENE = "non_obscene"
LABELS = (LABEL_OBSCENE, LABEL_NON_OBSCENE)
SPLITS = ("train", "test")


class AudioFormatError(ValueError):
    """Raised for unreadable or unsupported WAV content."""


@dataclass(eq=False)
class PcmClip:
    """A mono sample buffer plus its position within the source recording.

    Samples lie in [-1, 1] unless ``noise_augmented`` is set, in which case
    only finiteness is guaranteed (noise corruption is deliberately not
    re-clipped, which would bias the realized SNR).
    """

    samples: np.ndarray
    sample_rate_hz: int = CANONICAL_RATE_HZ
    source_offset_s: float = 0.0
    noise_augmented: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {self.samples.shape}")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def num_samples(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


def _sign_extend_24bit(raw: bytes) -> np.ndarray:
    b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
    value = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
    return np.where(value >= 1 << 23, value - (1 << 24), value)


def _parse_riff_chunks(data: bytes, path) -> dict[bytes, bytes]:
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file")
    chunks: dict[bytes, bytes] = {}
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + size]
        if cid not in chunks:  # first occurrence wins
            chunks[cid] = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    return chunks


def resample_linear(samples: np.ndarray, src_rate_hz: int, dst_rate_hz: int) -> np.ndarray:
    """Rate conversion by linear interpolation between neighbouring samples."""
    if src_rate_hz == dst_rate_hz:
        return np.asarray(samples, dtype=np.float64)
    n_src = len(samples)
    n_dst = int(round(n_src * dst_rate_hz / src_rate_hz))
    positions = np.arange(n_dst) * (src_rate_hz / dst_rate_hz)
    return np.interp(positions, np.arange(n_src), samples)


def load_audio(path) -> PcmClip:
    """Load a PCM WAV file as a canonical 16 kHz mono clip.

    Accepts 8/16/24-bit integer and 32-bit float data, 1 or 2 channels, any
    sample rate. Multi-channel input is averaged per sample; integer samples
    are divided by the type's max magnitude; other rates are converted by
    linear interpolation.
    """
    path = Path(path)
    data = path.read_bytes()
    chunks = _parse_riff_chunks(data, path)
    if b"fmt " not in chunks:
        raise AudioFormatError(f"{path}: missing 'fmt ' chunk")
    if b"data" not in chunks:
        raise AudioFormatError(f"{path}: missing 'data' chunk")
    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise AudioFormatError(f"{path}: truncated 'fmt ' chunk ({len(fmt)} bytes)")
    codec, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if codec not in (1, 3):
        raise AudioFormatError(f"{path}: unsupported codec tag {codec} (PCM=1 or IEEE float=3 required)")
    if channels not in (1, 2):
        raise AudioFormatError(f"{path}: unsupported channel count {channels}")
    if rate <= 0:
        raise AudioFormatError(f"{path}: invalid sample rate {rate}")

    raw = chunks[b"data"]
    if codec == 1:
        if bits == 8:
            x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
        elif bits == 16:
            x = np.frombuffer(raw[: len(raw) // 2 * 2], dtype="<i2").astype(np.float64) / 32768.0
        elif bits == 24:
            x = _sign_extend_24bit(raw[: len(raw) // 3 * 3]).astype(np.float64) / float(1 << 23)
        else:
            raise AudioFormatError(f"{path}: unsupported PCM bit depth {bits}")
    else:
        if bits != 32:
            raise AudioFormatError(f"{path}: unsupported float bit depth {bits}")
        x = np.frombuffer(raw[: len(raw) // 4 * 4], dtype="<f4").astype(np.float64)

    if channels == 2:
        x = x[: len(x) // 2 * 2].reshape(-1, 2).mean(axis=1)
    if len(x) == 0:
        raise AudioFormatError(f"{path}: zero-length audio data")

    x = resample_linear(x, rate, CANONICAL_RATE_HZ)
    # Float files written by the noise path may legitimately exceed [-1, 1];
    # preserve the values and mark the clip instead of clipping them.
    out_of_range = bool(np.max(np.abs(x)) > 1.0)
    return PcmClip(x, CANONICAL_RATE_HZ, 0.0, noise_augmented=out_of_range)


def save_wav(path, clip: PcmClip, sample_format: str = "int16") -> None:
    """Write a clip as a mono WAV file ('int16' or 'float32')."""
    path = Path(path)
    if sample_format == "int16":
        codec, bits = 1, 16
        q = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
        payload = q.tobytes()
    elif sample_format == "float32":
        codec, bits = 3, 32
        payload = clip.samples.astype("<f4").tobytes()
    else:
        raise ValueError(f"unknown sample_format {sample_format!r}")
    rate = clip.sample_rate_hz
    block_align = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, codec, 1, rate, rate * block_align, block_align, bits,
        b"data", len(payload),
    )
    path.write_bytes(header + payload)


def split_into_clips(signal: PcmClip, clip_len_s: float = CLIP_SECONDS) -> list[PcmClip]:
    """Cut a signal into consecutive non-overlapping fixed-length clips.

    A final remainder shorter than clip_len_s is discarded; a signal shorter
    than one clip yields an empty list.
    """
    n_clip = int(round(clip_len_s * signal.sample_rate_hz))
    if n_clip <= 0:
        raise ValueError(f"clip_len_s too small: {clip_len_s}")
    count = len(signal.samples) // n_clip
    return [
        PcmClip(
            signal.samples[k * n_clip : (k + 1) * n_clip].copy(),
            signal.sample_rate_hz,
            signal.source_offset_s + k * clip_len_s,
            signal.noise_augmented,
        )
        for k in range(count)
    ]


def add_awgn(clip: PcmClip, snr_db: float, rng_seed: int) -> PcmClip:
    """Add white Gaussian noise at the requested signal-to-noise ratio.

    Noise variance is signal_power / 10^(snr_db/10) with signal_power the
    mean squared sample. Deterministic for a fixed seed; the result is not
    re-clipped to [-1, 1].
    """
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    power = float(np.mean(clip.samples ** 2))
    if power == 0.0:
        raise ValueError(
            f"cannot add noise at a fixed SNR: clip at offset {clip.source_offset_s}s is silent"
        )
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    noise = np.random.default_rng(rng_seed).normal(0.0, sigma, len(clip.samples))
    return PcmClip(
        clip.samples + noise,
        clip.sample_rate_hz,
        clip.source_offset_s,
        noise_augmented=True,
    )


def label_sign(label: str) -> int:
    """Map a class label to the classifier's {-1, +1} convention."""
    if label == LABEL_OBSCENE:
        return 1
    if label == LABEL_NON_OBSCENE:
        return -1
    raise ValueError(f"unknown label {label!r}, expected one of {LABELS}")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    split: str
    category: str | None = None


@dataclass
class DatasetManifest:
    """Labelled audio paths with train/test assignment, one entry per clip."""

    entries: list[ManifestEntry] = field(default_factory=list)

    def for_split(self, split: str) -> list[ManifestEntry]:
        if split == "all":
            return list(self.entries)
        return [e for e in self.entries if e.split == split]

    def validate(self) -> None:
        seen = set()
        for e in self.entries:
            if e.label not in LABELS:
                raise ValueError(f"manifest entry {e.path}: unknown label {e.label!r}")
            if e.split not in SPLITS:
                raise ValueError(f"manifest entry {e.path}: unknown split {e.split!r}")
            if e.path in seen:
                raise ValueError(f"manifest contains duplicate path {e.path}")
            seen.add(e.path)


def load_manifest(path) -> DatasetManifest:
    """Read a JSON Lines manifest (fields: path, label, split, category)."""
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                entries.append(
                    ManifestEntry(
                        path=record["path"],
                        label=record["label"],
                        split=record["split"],
                        category=record.get("category"),
                    )
                )
            except KeyError as exc:
                raise ValueError(f"{path}:{lineno}: missing field {exc}") from exc
    manifest = DatasetManifest(entries)
    manifest.validate()
    return manifest


def save_manifest(manifest: DatasetManifest, path) -> None:
    manifest.validate()
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            record = {"path": e.path, "label": e.label, "split": e.split}
            if e.category is not None:
                record["category"] = e.category
            fh.write(json.dumps(record) + "\n")
