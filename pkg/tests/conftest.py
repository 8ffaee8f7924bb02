"""Shared fixtures and independent oracle implementations.

The oracles deliberately use naive literal-formula evaluation (explicit
loops, O(n^2) transforms, a generic projected-gradient solver) so they
share no code with the library paths they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from soundscreen.dsp import LOG_FLOOR


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def naive_dft_power(frame: np.ndarray) -> np.ndarray:
    """O(n^2) DFT by definition; returns |X[j]|^2 for j = 0..n/2."""
    n = len(frame)
    j = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(j, j) / n)
    spectrum = w @ frame.astype(complex)
    half = spectrum[: n // 2 + 1]
    return (half * half.conj()).real


def dct2_literal(seq, order: int) -> np.ndarray:
    """Literal double-loop unnormalized DCT-II."""
    m = len(seq)
    out = np.zeros(order)
    for p in range(order):
        acc = 0.0
        for i in range(m):
            acc += seq[i] * np.cos((2 * i + 1) * p * np.pi / (2 * m))
        out[p] = acc
    return out


def mfcc_literal(energies, order: int) -> np.ndarray:
    """Literal cepstrum: sum_b log(E(b)) cos((2b+1)q pi / 2B)."""
    b_total = len(energies)
    out = np.zeros(order)
    for q in range(order):
        acc = 0.0
        for b in range(b_total):
            acc += np.log(max(energies[b], LOG_FLOOR)) * np.cos((2 * b + 1) * q * np.pi / (2 * b_total))
        out[q] = acc
    return out


def delta_literal(per_frame: np.ndarray, window: int = 2) -> np.ndarray:
    """Literal regression difference with replicated edges."""
    num_frames, dim = per_frame.shape
    out = np.zeros_like(per_frame)
    denom = 2.0 * sum(w * w for w in range(1, window + 1))
    for t in range(num_frames):
        for w in range(1, window + 1):
            ahead = per_frame[min(t + w, num_frames - 1)]
            behind = per_frame[max(t - w, 0)]
            out[t] += w * (ahead - behind)
        out[t] /= denom
    return out


def rcsf_matrix_literal(frame_mfccs: np.ndarray, temporal_order: int) -> np.ndarray:
    """Literal temporal DCT: C(q, n) = sum_t mfcc[t, q] cos((2t+1)n pi / 2L)."""
    seg_len, quefrency_order = frame_mfccs.shape
    out = np.zeros((quefrency_order, temporal_order))
    for q in range(quefrency_order):
        for n in range(temporal_order):
            acc = 0.0
            for t in range(seg_len):
                acc += frame_mfccs[t, q] * np.cos((2 * t + 1) * n * np.pi / (2 * seg_len))
            out[q, n] = acc
    return out


def clip_feature_literal(samples: np.ndarray, config) -> np.ndarray:
    """Monolithic single-pass evaluation of the whole extraction chain.

    Frames, windows, and transforms are computed with explicit loops and
    numpy.fft only; aggregation follows the mean/std definition directly.
    Supports the rcsf family.
    """
    flen = config.framing.frame_len_samples
    hop = config.framing.hop_samples
    window = np.hamming(flen) if config.framing.window == "hamming" else np.ones(flen)
    num_frames = (len(samples) - flen) // hop + 1
    num_segments = num_frames // config.frames_per_segment

    edges_mel = np.linspace(
        0.0, 2595.0 * np.log10(1.0 + 8000.0 / 700.0), config.num_mel_filters + 2
    )
    edges_hz = 700.0 * (10.0 ** (edges_mel / 2595.0) - 1.0)
    bin_freqs = np.arange(flen // 2 + 1) * (16000.0 / flen)

    segment_vectors = []
    for k in range(num_segments):
        mfccs = np.zeros((config.frames_per_segment, config.quefrency_order))
        for t in range(config.frames_per_segment):
            start = (k * config.frames_per_segment + t) * hop
            frame = samples[start : start + flen] * window
            bins = np.abs(np.fft.rfft(frame)) ** 2
            energies = np.zeros(config.num_mel_filters)
            for b in range(config.num_mel_filters):
                lo, mid, hi = edges_hz[b], edges_hz[b + 1], edges_hz[b + 2]
                for j, f in enumerate(bin_freqs):
                    rising = (f - lo) / (mid - lo)
                    falling = (hi - f) / (hi - mid)
                    weight = max(min(rising, falling), 0.0)
                    energies[b] += weight * bins[j]
            mfccs[t] = mfcc_literal(energies, config.quefrency_order)
        matrix = rcsf_matrix_literal(mfccs, config.temporal_order)
        segment_vectors.append(matrix.reshape(-1))
    segment_vectors = np.array(segment_vectors)
    return np.concatenate((segment_vectors.mean(axis=0), segment_vectors.std(axis=0)))


def _project_box_hyperplane(v: np.ndarray, labels: np.ndarray, c: float) -> np.ndarray:
    """Euclidean projection onto {0 <= alpha <= c, sum(alpha * labels) = 0}.

    The projection is clip(v - mu*y, 0, c) for the unique multiplier mu at
    which the equality constraint holds; g(mu) = y . clip(v - mu*y, 0, c)
    is piecewise linear and nonincreasing, so mu is found exactly by
    interpolating between breakpoints.
    """
    breakpoints = np.concatenate((labels * v - c, labels * v, labels * v + c))
    breakpoints = np.unique(breakpoints)
    breakpoints = np.concatenate(([breakpoints[0] - 1.0], breakpoints, [breakpoints[-1] + 1.0]))
    candidates = np.clip(v[None, :] - breakpoints[:, None] * labels[None, :], 0.0, c)
    g = candidates @ labels
    k = int(np.searchsorted(-g, 0.0, side="left"))
    if k == 0:
        mu = breakpoints[0]
    elif k == len(g):
        mu = breakpoints[-1]
    elif g[k - 1] == g[k]:
        mu = breakpoints[k]
    else:
        span = breakpoints[k] - breakpoints[k - 1]
        mu = breakpoints[k - 1] + span * g[k - 1] / (g[k - 1] - g[k])
    return np.clip(v - mu * labels, 0.0, c)


def projected_gradient_dual(kernel: np.ndarray, labels: np.ndarray, c: float,
                            steps: int = 4000) -> np.ndarray:
    """Generic solver for the dual problem, independent of the SMO path.

    Accelerated projected gradient ascent on W(alpha) over the box plus
    equality-constraint feasible set, with exact projections.
    """
    n = len(labels)
    q = kernel * np.outer(labels, labels)
    lr = 1.0 / max(float(np.linalg.eigvalsh(q).max()), 1e-12)

    alpha = np.zeros(n)
    lookahead = alpha
    momentum = 1.0
    for _ in range(steps):
        step = _project_box_hyperplane(lookahead + lr * (1.0 - q @ lookahead), labels, c)
        momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum**2))
        lookahead = step + ((momentum - 1.0) / momentum_next) * (step - alpha)
        alpha, momentum = step, momentum_next
    return alpha


def full_alpha_vector(model, x: np.ndarray) -> np.ndarray:
    """Per-row multipliers of training matrix x; 0 for non-support rows."""
    by_row = {}
    for row, a in zip(model.support_vectors, model.alphas):
        by_row[row.tobytes()] = by_row.get(row.tobytes(), 0.0) + float(a)
    return np.array([by_row.get(np.asarray(row, float).tobytes(), 0.0) for row in x])


def max_kkt_violation(model, x: np.ndarray, y: np.ndarray, c: float) -> float:
    """Worst KKT violation over a training set the model was fit on.

    alpha = 0 requires margin >= 1; alpha = c requires margin <= 1; an
    unbound multiplier requires margin = 1.
    """
    from soundscreen.svm import SUPPORT_ALPHA_MIN, decision_values

    margins = y * decision_values(model, x)
    alphas = full_alpha_vector(model, x)
    worst = 0.0
    for a, margin in zip(alphas, margins):
        if a <= SUPPORT_ALPHA_MIN:
            worst = max(worst, 1.0 - margin)
        elif a >= c - SUPPORT_ALPHA_MIN:
            worst = max(worst, margin - 1.0)
        else:
            worst = max(worst, abs(margin - 1.0))
    return worst
