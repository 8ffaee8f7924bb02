"""Synthetic clip generators for desk-scale experiments.

The real corpora behind this detection task are not distributable, so
experiments run on synthetic stand-ins: the positive class imitates the
target's signature, short pitch arcs around 500 Hz repeated every half
second or so, with harmonics and breathy high-band bursts; the negative
class covers steady tones, chords, shaped noise, slowly wandering tones,
and stationary noise whose spectrum matches the sweeps. Every clip gets
an individual random background noise floor (8 to 30 dB SNR) so that
classifiers cannot key on a sterile silence floor.

All generators are deterministic functions of their seed.
"""

from __future__ import annotations

import numpy as np

from .audio_io import (
    CANONICAL_RATE_HZ,
    LABEL_NON_OBSCENE,
    LABEL_OBSCENE,
    DatasetManifest,
    ManifestEntry,
    PcmClip,
    save_manifest,
    save_wav,
)

NEGATIVE_KINDS = ("tone", "chord", "noise", "wander", "matched")
# wander and matched are the hard negatives, so they get double weight
NEGATIVE_CYCLE = ("tone", "wander", "chord", "matched", "noise", "wander", "matched")


def _bandpass(samples: np.ndarray, low_hz: float, high_hz: float, rate: int) -> np.ndarray:
    spectrum = np.fft.rfft(samples)
    freqs = np.fft.rfftfreq(len(samples), 1.0 / rate)
    spectrum[(freqs < low_hz) | (freqs > high_hz)] = 0.0
    return np.fft.irfft(spectrum, len(samples))


def _with_background(rng: np.random.Generator, signal: np.ndarray) -> np.ndarray:
    """Add a per-clip white noise floor at a random 8 to 30 dB SNR."""
    power = float(np.mean(signal**2))
    snr_db = rng.uniform(8.0, 30.0)
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    return signal + rng.normal(0.0, sigma, len(signal))


def _finalize(rng: np.random.Generator, samples: np.ndarray, rate: int) -> PcmClip:
    """Normalize to a class-independent random loudness, then peak-limit.

    Drawing the target RMS from one shared distribution keeps overall
    level uninformative about the class.
    """
    target_rms = rng.uniform(0.05, 0.25)
    samples = samples * (target_rms / max(float(np.sqrt(np.mean(samples**2))), 1e-12))
    peak = float(np.max(np.abs(samples)))
    if peak > 0.95:
        samples = samples * (0.95 / peak)
    return PcmClip(samples, rate)


def repeated_sweep_clip(seed: int, duration_s: float = 10.0, sample_rate_hz: int = CANONICAL_RATE_HZ) -> PcmClip:
    """A clip of repeated rise-and-fall pitch arcs (the positive class).

    Each arc lasts roughly half a second, sweeps around a per-clip center
    pitch near 500 Hz with two harmonics, and carries a breathy 4 to 7 kHz
    noise burst at its crest.
    """
    rng = np.random.default_rng(seed)
    rate = sample_rate_hz
    n = int(round(duration_s * rate))
    t_arc_s = rng.uniform(0.40, 0.60)
    n_arc = int(round(t_arc_s * rate))
    center = rng.uniform(350.0, 700.0)
    span = rng.uniform(150.0, 350.0)

    freq = np.empty(n)
    envelope = np.empty(n)
    pos = 0
    arc_phase = np.sin(np.pi * np.arange(n_arc) / n_arc)  # rise then fall
    while pos < n:
        m = min(n_arc, n - pos)
        jitter = 1.0 + rng.uniform(-0.08, 0.08)
        freq[pos : pos + m] = center * jitter + span * arc_phase[:m]
        envelope[pos : pos + m] = 0.15 + 0.85 * arc_phase[:m] ** 2
        pos += m

    phase = 2.0 * np.pi * np.cumsum(freq) / rate
    tone = np.zeros(n)
    for harmonic, amp in ((1, 1.0), (2, 0.5), (3, 0.25)):
        tone += amp * np.sin(harmonic * phase + rng.uniform(0.0, 2.0 * np.pi))
    tone *= envelope

    breath = _bandpass(rng.normal(0.0, 1.0, n), 4000.0, 7000.0, rate) * envelope**2
    breath *= 0.25 * np.sqrt(np.mean(tone**2)) / max(np.sqrt(np.mean(breath**2)), 1e-12)

    gain = rng.uniform(0.15, 0.40)
    return _finalize(rng, _with_background(rng, gain * (tone + breath)), rate)


def steady_tone_clip(seed: int, duration_s: float = 10.0, sample_rate_hz: int = CANONICAL_RATE_HZ) -> PcmClip:
    """A sustained harmonic tone with mild vibrato and slow amplitude drift."""
    rng = np.random.default_rng(seed)
    rate = sample_rate_hz
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate
    f0 = rng.uniform(200.0, 2000.0)
    vibrato = 1.0 + 0.003 * np.sin(2.0 * np.pi * rng.uniform(0.1, 2.0) * t + rng.uniform(0.0, 6.28))
    phase = 2.0 * np.pi * np.cumsum(f0 * vibrato) / rate
    tone = np.zeros(n)
    for harmonic, amp in ((1, 1.0), (2, 0.5), (3, 0.25)):
        if harmonic * f0 < 0.45 * rate:
            tone += amp * np.sin(harmonic * phase + rng.uniform(0.0, 6.28))
    drift = 1.0 + 0.1 * np.sin(2.0 * np.pi * rng.uniform(0.05, 0.3) * t + rng.uniform(0.0, 6.28))
    gain = rng.uniform(0.15, 0.40)
    return _finalize(rng, _with_background(rng, gain * tone * drift), rate)


def chord_clip(seed: int, duration_s: float = 10.0, sample_rate_hz: int = CANONICAL_RATE_HZ) -> PcmClip:
    """Several unrelated sustained tones at once."""
    rng = np.random.default_rng(seed)
    rate = sample_rate_hz
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate
    chord = np.zeros(n)
    for _ in range(rng.integers(3, 6)):
        f = rng.uniform(150.0, 3000.0)
        chord += rng.uniform(0.3, 1.0) * np.sin(2.0 * np.pi * f * t + rng.uniform(0.0, 6.28))
    drift = 1.0 + 0.1 * np.sin(2.0 * np.pi * rng.uniform(0.05, 0.3) * t + rng.uniform(0.0, 6.28))
    gain = rng.uniform(0.1, 0.3)
    return _finalize(rng, _with_background(rng, gain * chord * drift), rate)


def noise_clip(seed: int, duration_s: float = 10.0, sample_rate_hz: int = CANONICAL_RATE_HZ) -> PcmClip:
    """Spectrally tilted broadband noise with slow amplitude modulation."""
    rng = np.random.default_rng(seed)
    rate = sample_rate_hz
    n = int(round(duration_s * rate))
    spectrum = np.fft.rfft(rng.normal(0.0, 1.0, n))
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    knee = rng.uniform(200.0, 2000.0)
    shaped = np.fft.irfft(spectrum / (1.0 + freqs / knee), n)
    t = np.arange(n) / rate
    drift = 1.0 + 0.2 * np.sin(2.0 * np.pi * rng.uniform(0.05, 0.5) * t + rng.uniform(0.0, 6.28))
    shaped *= drift
    target_rms = rng.uniform(0.05, 0.20)
    shaped *= target_rms / max(float(np.sqrt(np.mean(shaped**2))), 1e-12)
    return _finalize(rng, shaped, rate)


def wander_tone_clip(seed: int, duration_s: float = 10.0, sample_rate_hz: int = CANONICAL_RATE_HZ) -> PcmClip:
    """A harmonic tone whose pitch drifts slowly and non-repetitively.

    Covers the same band as the positive class over the whole clip, but
    moves on a seconds-long timescale instead of sweeping every half
    second, so only the temporal structure distinguishes it.
    """
    rng = np.random.default_rng(seed)
    rate = sample_rate_hz
    n = int(round(duration_s * rate))
    step_hz = 100  # pitch random walk simulated at 100 Hz then upsampled
    steps = int(duration_s * step_hz) + 1
    mu = rng.uniform(450.0, 700.0)
    theta, sigma, dt = 1.0 / 3.0, 180.0, 1.0 / step_hz
    walk = np.empty(steps)
    walk[0] = mu
    noise = rng.normal(0.0, sigma * np.sqrt(dt), steps - 1)
    for k in range(steps - 1):
        walk[k + 1] = walk[k] + theta * (mu - walk[k]) * dt + noise[k]
    walk = np.clip(walk, 250.0, 1200.0)
    freq = np.interp(np.arange(n) / rate, np.arange(steps) * dt, walk)
    phase = 2.0 * np.pi * np.cumsum(freq) / rate
    tone = np.zeros(n)
    for harmonic, amp in ((1, 1.0), (2, 0.5), (3, 0.25)):
        tone += amp * np.sin(harmonic * phase + rng.uniform(0.0, 6.28))
    t = np.arange(n) / rate
    drift = 1.0 + 0.15 * np.sin(2.0 * np.pi * rng.uniform(0.05, 0.3) * t + rng.uniform(0.0, 6.28))
    gain = rng.uniform(0.15, 0.40)
    return _finalize(rng, _with_background(rng, gain * tone * drift), rate)


def matched_noise_clip(seed: int, duration_s: float = 10.0, sample_rate_hz: int = CANONICAL_RATE_HZ) -> PcmClip:
    """Stationary noise shaped like the positive class's long-term spectrum.

    Occupies the fundamental band, two harmonic bands, and the breathy
    high band, with no temporal modulation at all; a static spectral
    profile alone cannot tell it from the repeated sweeps.
    """
    rng = np.random.default_rng(seed)
    rate = sample_rate_hz
    n = int(round(duration_s * rate))
    center = rng.uniform(350.0, 700.0)
    span = rng.uniform(150.0, 350.0)
    low, high = center - span * 0.5, center + span * 1.1
    shaped = np.zeros(n)
    for harmonic, amp in ((1, 1.0), (2, 0.5), (3, 0.25)):
        band = _bandpass(rng.normal(0.0, 1.0, n), harmonic * low, harmonic * high, rate)
        shaped += amp * band / max(float(np.sqrt(np.mean(band**2))), 1e-12)
    breath = _bandpass(rng.normal(0.0, 1.0, n), 4000.0, 7000.0, rate)
    shaped += 0.25 * breath / max(float(np.sqrt(np.mean(breath**2))), 1e-12)
    shaped *= rng.uniform(0.05, 0.20) / max(float(np.sqrt(np.mean(shaped**2))), 1e-12)
    return _finalize(rng, _with_background(rng, shaped), rate)


def negative_clip(kind: str, seed: int, duration_s: float = 10.0) -> PcmClip:
    maker = {
        "tone": steady_tone_clip,
        "chord": chord_clip,
        "noise": noise_clip,
        "wander": wander_tone_clip,
        "matched": matched_noise_clip,
    }.get(kind)
    if maker is None:
        raise ValueError(f"unknown negative kind {kind!r}, expected one of {NEGATIVE_KINDS}")
    return maker(seed, duration_s)


def corpus_clips(num_obscene: int, num_general: int, seed: int, duration_s: float = 10.0):
    """Yield (clip, label, category, split) for a balanced synthetic corpus.

    Splits alternate by index within each class, giving an exact 50/50
    train/test division with categories balanced across splits.
    """
    for i in range(num_obscene):
        clip = repeated_sweep_clip(seed + i, duration_s)
        yield clip, LABEL_OBSCENE, "sweep", "train" if i % 2 == 0 else "test"
    for i in range(num_general):
        kind = NEGATIVE_CYCLE[i % len(NEGATIVE_CYCLE)]
        clip = negative_clip(kind, seed + num_obscene + i, duration_s)
        yield clip, LABEL_NON_OBSCENE, kind, "train" if i % 2 == 0 else "test"


def make_corpus(out_dir, num_obscene: int, num_general: int, seed: int, duration_s: float = 10.0) -> DatasetManifest:
    """Write corpus WAVs plus a manifest.jsonl into out_dir."""
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    counters: dict[str, int] = {}
    for clip, label, category, split in corpus_clips(num_obscene, num_general, seed, duration_s):
        k = counters.get(category, 0)
        counters[category] = k + 1
        path = out_dir / f"{category}_{k:04d}.wav"
        save_wav(path, clip)
        entries.append(ManifestEntry(str(path), label, split, category))
    manifest = DatasetManifest(entries)
    save_manifest(manifest, out_dir / "manifest.jsonl")
    return manifest
