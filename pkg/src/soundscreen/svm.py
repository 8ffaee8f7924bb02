"""Binary soft-margin SVM with an RBF kernel, trained from scratch.

The dual problem is solved by sequential minimal optimization (Platt's
two-multiplier updates with the |E_i - E_j| second-choice heuristic).
Feature scaling to [-1, 1] is fit on training data only and travels with
the model, so prediction always consumes raw feature vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

SUPPORT_ALPHA_MIN = 1e-8
MODEL_FILE_VERSION = 1

DEFAULT_C_GRID = tuple(2.0 ** e for e in range(-5, 16, 2))
DEFAULT_GAMMA_GRID = tuple(2.0 ** e for e in range(-15, 4, 2))


@dataclass(eq=False)
class ScalingParams:
    """Per-dimension affine map onto [-1, +1], fit on the training set.

    Constant dimensions map to 0; values outside the training range map
    outside [-1, 1] (deliberately not clamped).
    """

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        self.mins = np.asarray(self.mins, dtype=np.float64)
        self.maxs = np.asarray(self.maxs, dtype=np.float64)
        if self.mins.shape != self.maxs.shape or self.mins.ndim != 1:
            raise ValueError("mins and maxs must be 1-D arrays of equal length")
        if np.any(self.maxs < self.mins):
            raise ValueError("every dimension must satisfy min <= max")


@dataclass(frozen=True)
class TrainConfig:
    """Solver hyperparameters: box constraint c, kernel width gamma."""

    c: float = 1.0
    gamma: float = 0.5
    kkt_tolerance: float = 1e-3
    max_passes: int = 200
    folds: int = 5
    rng_seed: int = 0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.kkt_tolerance <= 0:
            raise ValueError(f"kkt_tolerance must be positive, got {self.kkt_tolerance}")
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")


@dataclass(eq=False)
class SvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    labels: np.ndarray
    bias: float
    gamma: float
    scaling: ScalingParams
    feature_fingerprint: str = ""

    def __post_init__(self):
        self.support_vectors = np.asarray(self.support_vectors, dtype=np.float64)
        self.alphas = np.asarray(self.alphas, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if np.any(self.alphas <= 0):
            raise ValueError("support vector multipliers must be positive")
        if abs(float(self.alphas @ self.labels)) > 1e-6:
            raise ValueError("dual equality constraint violated: sum(alpha*label) != 0")


def fit_scaling(train_vectors: np.ndarray) -> ScalingParams:
    train_vectors = np.asarray(train_vectors, dtype=np.float64)
    if train_vectors.ndim != 2 or train_vectors.shape[0] == 0:
        raise ValueError("fit_scaling needs a nonempty 2-D training matrix")
    return ScalingParams(train_vectors.min(axis=0), train_vectors.max(axis=0))


def identity_scaling(dim: int) -> ScalingParams:
    """Scaling that leaves vectors unchanged (min -1, max +1 per dimension)."""
    return ScalingParams(np.full(dim, -1.0), np.full(dim, 1.0))


def apply_scaling(params: ScalingParams, vectors: np.ndarray) -> np.ndarray:
    x = np.asarray(vectors, dtype=np.float64)
    if x.shape[-1] != len(params.mins):
        raise ValueError(f"vector dimension {x.shape[-1]} != scaling dimension {len(params.mins)}")
    span = params.maxs - params.mins
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = -1.0 + 2.0 * (x - params.mins) / span
    return np.where(span > 0, scaled, 0.0)


def rbf_kernel(x: np.ndarray, z: np.ndarray, gamma: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ValueError(f"kernel arguments must share a dimension, got {x.shape} and {z.shape}")
    diff = x - z
    return float(np.exp(-gamma * (diff @ diff)))


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aa = np.sum(a * a, axis=1)
    bb = np.sum(b * b, axis=1)
    return np.maximum(aa[:, None] + bb[None, :] - 2.0 * (a @ b.T), 0.0)


def _rbf_matrix(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * _sq_dists(a, b))


def dual_objective(kernel: np.ndarray, labels: np.ndarray, alphas: np.ndarray) -> float:
    """W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij."""
    coef = alphas * labels
    return float(alphas.sum() - 0.5 * (coef @ kernel @ coef))


def smo_train(
    scaled_vectors: np.ndarray,
    labels,
    config: TrainConfig,
    scaling: ScalingParams | None = None,
    fingerprint: str = "",
    objective_trace: list | None = None,
) -> SvmModel:
    """Solve the dual soft-margin problem by sequential minimal optimization.

    Runs until every KKT condition holds within an internal tolerance of
    0.4 * kkt_tolerance or max_passes sweeps elapse; the final bias is the
    average implied bias over unbound support vectors, which keeps every
    unbound margin within kkt_tolerance of 1. When objective_trace is
    given, the dual objective is appended after every accepted step.
    """
    x = np.asarray(scaled_vectors, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != len(y):
        raise ValueError("need one label per row of a 2-D feature matrix")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature matrix contains non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise ValueError("training needs both classes present")

    n = len(y)
    big_c = config.c
    tol = 0.4 * config.kkt_tolerance
    eps = 1e-14
    kernel = _rbf_matrix(x, x, config.gamma)
    np.fill_diagonal(kernel, 1.0)

    alpha = np.zeros(n)
    bias = 0.0
    fx = np.zeros(n)  # cached decision values, refreshed every sweep
    rng = np.random.default_rng(config.rng_seed)

    def take_step(i, j):
        nonlocal bias, fx
        if i == j:
            return False
        yi, yj = y[i], y[j]
        ai, aj = alpha[i], alpha[j]
        err_i, err_j = fx[i] - yi, fx[j] - yj
        if yi == yj:
            low, high = max(0.0, ai + aj - big_c), min(big_c, ai + aj)
        else:
            low, high = max(0.0, aj - ai), min(big_c, big_c + aj - ai)
        if high - low < eps:
            return False
        eta = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        if eta <= 0.0:
            return False  # degenerate direction; rare for RBF with distinct points
        aj_new = min(max(aj + yj * (err_i - err_j) / eta, low), high)
        if abs(aj_new - aj) < eps * (aj_new + aj + eps):
            return False
        ai_new = ai + yi * yj * (aj - aj_new)
        b1 = bias - err_i - yi * (ai_new - ai) * kernel[i, i] - yj * (aj_new - aj) * kernel[i, j]
        b2 = bias - err_j - yi * (ai_new - ai) * kernel[i, j] - yj * (aj_new - aj) * kernel[j, j]
        if 0.0 < ai_new < big_c:
            bias_new = b1
        elif 0.0 < aj_new < big_c:
            bias_new = b2
        else:
            bias_new = 0.5 * (b1 + b2)
        fx += yi * (ai_new - ai) * kernel[i] + yj * (aj_new - aj) * kernel[j] + (bias_new - bias)
        alpha[i], alpha[j] = ai_new, aj_new
        bias = bias_new
        if objective_trace is not None:
            objective_trace.append(dual_objective(kernel, y, alpha))
        return True

    def examine(j):
        err_j = fx[j] - y[j]
        r = err_j * y[j]
        if not ((r < -tol and alpha[j] < big_c) or (r > tol and alpha[j] > 0.0)):
            return False
        unbound = np.flatnonzero((alpha > 0.0) & (alpha < big_c))
        if len(unbound) > 1:
            errs = fx[unbound] - y[unbound]
            if take_step(int(unbound[np.argmax(np.abs(errs - err_j))]), j):
                return True
        for i in rng.permutation(unbound):
            if take_step(int(i), j):
                return True
        for i in rng.permutation(n):
            if take_step(int(i), j):
                return True
        return False

    examine_all = True
    for _ in range(config.max_passes):
        fx = (alpha * y) @ kernel + bias
        candidates = range(n) if examine_all else np.flatnonzero((alpha > 0.0) & (alpha < big_c))
        changed = sum(examine(int(j)) for j in candidates)
        if examine_all:
            if changed == 0:
                break
            examine_all = False
        elif changed == 0:
            examine_all = True

    raw = (alpha * y) @ kernel  # decision values without bias
    support = alpha > SUPPORT_ALPHA_MIN
    unbound = support & (alpha < big_c - SUPPORT_ALPHA_MIN)
    pool = unbound if unbound.any() else support
    bias = float(np.mean(y[pool] - raw[pool]))

    if scaling is None:
        scaling = identity_scaling(x.shape[1])
    return SvmModel(
        x[support].copy(), alpha[support].copy(), y[support].copy(),
        bias, config.gamma, scaling, fingerprint,
    )


def train_model(raw_vectors, labels, config: TrainConfig, fingerprint: str = "") -> SvmModel:
    """Fit scaling on the raw training set, scale, and run the solver."""
    raw_vectors = np.asarray(raw_vectors, dtype=np.float64)
    scaling = fit_scaling(raw_vectors)
    scaled = apply_scaling(scaling, raw_vectors)
    return smo_train(scaled, labels, config, scaling=scaling, fingerprint=fingerprint)


def decision_values(model: SvmModel, raw_vectors) -> np.ndarray:
    """Signed decision values for a batch of raw (unscaled) vectors."""
    raw_vectors = np.atleast_2d(np.asarray(raw_vectors, dtype=np.float64))
    scaled = apply_scaling(model.scaling, raw_vectors)
    weights = model.alphas * model.labels
    return weights @ _rbf_matrix(model.support_vectors, scaled, model.gamma) + model.bias


def predict(model: SvmModel, vector) -> tuple[int, float]:
    """Classify one raw vector; returns (class in {-1, +1}, decision value).

    Accepts a plain array or a feature object carrying a fingerprint, in
    which case the fingerprint must match the model's.
    """
    values = getattr(vector, "values", vector)
    fingerprint = getattr(vector, "fingerprint", None)
    if fingerprint is not None and model.feature_fingerprint and fingerprint != model.feature_fingerprint:
        raise ValueError(
            f"feature fingerprint {fingerprint} does not match model's {model.feature_fingerprint}"
        )
    value = float(decision_values(model, values)[0])
    return (1 if value >= 0.0 else -1), value


def predict_batch(model: SvmModel, raw_vectors) -> tuple[np.ndarray, np.ndarray]:
    values = decision_values(model, raw_vectors)
    return np.where(values >= 0.0, 1, -1), values


def _stratified_folds(labels: np.ndarray, folds: int, rng_seed: int) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    fold_of = np.empty(len(labels), dtype=int)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < folds:
            raise ValueError(f"class {cls:+.0f} has {len(idx)} samples, fewer than {folds} folds")
        rng.shuffle(idx)
        fold_of[idx] = np.arange(len(idx)) % folds
    return fold_of


def cross_validate(vectors, labels, config: TrainConfig) -> float:
    """Mean held-out accuracy over stratified folds with a seeded shuffle.

    Scaling is re-fit inside each fold on that fold's training part only.
    """
    x = np.asarray(vectors, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    fold_of = _stratified_folds(y, config.folds, config.rng_seed)
    accuracies = []
    for f in range(config.folds):
        held = fold_of == f
        model = train_model(x[~held], y[~held], config)
        predicted, _ = predict_batch(model, x[held])
        accuracies.append(float(np.mean(predicted == y[held])))
    return float(np.mean(accuracies))


@dataclass
class GridSearchResult:
    c: float
    gamma: float
    accuracy: float
    evaluations: list[tuple[float, float, float]] = field(default_factory=list)


def grid_search(
    vectors,
    labels,
    base_config: TrainConfig,
    c_values=DEFAULT_C_GRID,
    gamma_values=DEFAULT_GAMMA_GRID,
) -> GridSearchResult:
    """Pick (c, gamma) by cross-validated accuracy over a log-spaced grid.

    Ties go to the smaller c, then the smaller gamma (the smoother model).
    """
    c_values = sorted(c_values)
    gamma_values = sorted(gamma_values)
    if not c_values or not gamma_values:
        raise ValueError("grid must contain at least one (c, gamma) point")
    best = None
    evaluations = []
    for c in c_values:
        for gamma in gamma_values:
            accuracy = cross_validate(vectors, labels, replace(base_config, c=c, gamma=gamma))
            evaluations.append((float(c), float(gamma), accuracy))
            if best is None or accuracy > best[2]:
                best = (float(c), float(gamma), accuracy)
    return GridSearchResult(best[0], best[1], best[2], evaluations)


def save_model(model: SvmModel, path) -> None:
    document = {
        "version": MODEL_FILE_VERSION,
        "gamma": model.gamma,
        "bias": model.bias,
        "scaling": {"mins": model.scaling.mins.tolist(), "maxs": model.scaling.maxs.tolist()},
        "support_vectors": model.support_vectors.tolist(),
        "alphas": model.alphas.tolist(),
        "labels": model.labels.tolist(),
        "feature_fingerprint": model.feature_fingerprint,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh)
        fh.write("\n")


def load_model(path) -> SvmModel:
    with open(path, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    version = document.get("version")
    if version != MODEL_FILE_VERSION:
        raise ValueError(f"{path}: unsupported model file version {version}")
    return SvmModel(
        np.array(document["support_vectors"], dtype=np.float64),
        np.array(document["alphas"], dtype=np.float64),
        np.array(document["labels"], dtype=np.float64),
        float(document["bias"]),
        float(document["gamma"]),
        ScalingParams(np.array(document["scaling"]["mins"]), np.array(document["scaling"]["maxs"])),
        document.get("feature_fingerprint", ""),
    )
