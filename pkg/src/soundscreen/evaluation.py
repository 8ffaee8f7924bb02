"""Clip-level metrics and the recording-level harmful-rate decision.

Obscene clips are the positive class. Precision, recall, and F1 are
percentages; quantities whose denominator is zero are reported as None
(explicitly undefined), never as NaN or a substitute number. A recording
is ruled x_rated when strictly more than threshold_pct of its clips are
classified obscene.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .audio_io import DatasetManifest, load_audio, label_sign
from .features import FeatureConfig, clip_feature
from .svm import SvmModel, predict

DEFAULT_THRESHOLD_PCT = 20.0
VERDICT_X_RATED = "x_rated"
VERDICT_GENERAL = "general"
UNCATEGORIZED = "uncategorized"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def metrics(counts: ConfusionCounts) -> tuple[float | None, float | None, float | None]:
    """(precision_pct, recall_pct, f1_pct); None where the denominator is 0."""
    precision = 100.0 * counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp > 0 else None
    recall = 100.0 * counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn > 0 else None
    return precision, recall, f1_from_precision_recall(precision, recall)


def f1_from_precision_recall(precision_pct, recall_pct):
    """Harmonic mean of two percentages; None if either is undefined."""
    if precision_pct is None or recall_pct is None:
        return None
    if precision_pct + recall_pct == 0.0:
        return 0.0
    return 2.0 * precision_pct * recall_pct / (precision_pct + recall_pct)


@dataclass(frozen=True)
class ClipDecision:
    offset_s: float
    predicted: int  # +1 obscene, -1 non_obscene
    decision_value: float


@dataclass
class HarmfulRateReport:
    clip_decisions: list[ClipDecision]
    harmful_rate_pct: float
    threshold_pct: float
    verdict: str


def harmful_rate(decisions, threshold_pct: float = DEFAULT_THRESHOLD_PCT) -> HarmfulRateReport:
    """Fraction of clips classified obscene, and the strict-threshold verdict.

    Accepts ClipDecision objects or bare classes in {-1, +1}.
    """
    normalized = [
        d if isinstance(d, ClipDecision) else ClipDecision(float(k), int(d), 0.0)
        for k, d in enumerate(decisions)
    ]
    if not normalized:
        raise ValueError("cannot rate a recording with zero clips")
    for d in normalized:
        if d.predicted not in (-1, 1):
            raise ValueError(f"clip class must be -1 or +1, got {d.predicted}")
    obscene = sum(1 for d in normalized if d.predicted == 1)
    rate = 100.0 * obscene / len(normalized)
    verdict = VERDICT_X_RATED if rate > threshold_pct else VERDICT_GENERAL
    return HarmfulRateReport(normalized, rate, threshold_pct, verdict)


@dataclass
class CategoryStats:
    clips: int = 0
    errors: int = 0

    @property
    def error_rate_pct(self) -> float:
        return 100.0 * self.errors / self.clips if self.clips else 0.0


@dataclass
class EvaluationReport:
    counts: ConfusionCounts
    per_category: dict[str, CategoryStats]
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def precision_pct(self):
        return metrics(self.counts)[0]

    @property
    def recall_pct(self):
        return metrics(self.counts)[1]

    @property
    def f1_pct(self):
        return metrics(self.counts)[2]


def evaluate_manifest(
    model: SvmModel,
    manifest: DatasetManifest,
    config: FeatureConfig,
    split: str = "test",
) -> EvaluationReport:
    """Extract, predict, and tally every manifest entry in the given split.

    Unreadable or too-short clips are excluded and reported in `skipped`;
    the confusion counts sum to the number of successfully processed clips.
    """
    entries = manifest.for_split(split)
    if not entries:
        raise ValueError(f"manifest has no entries in split {split!r}")
    tp = tn = fp = fn = 0
    per_category: dict[str, CategoryStats] = {}
    skipped: list[tuple[str, str]] = []
    for entry in entries:
        try:
            feature = clip_feature(load_audio(entry.path), config)
        except (OSError, ValueError) as exc:
            skipped.append((entry.path, str(exc)))
            continue
        predicted, _ = predict(model, feature)
        actual = label_sign(entry.label)
        if actual == 1:
            tp += predicted == 1
            fn += predicted == -1
        else:
            tn += predicted == -1
            fp += predicted == 1
        stats = per_category.setdefault(entry.category or UNCATEGORIZED, CategoryStats())
        stats.clips += 1
        stats.errors += predicted != actual
    return EvaluationReport(ConfusionCounts(tp, tn, fp, fn), per_category, skipped)


def _pct(value) -> str:
    return "undefined" if value is None else f"{value:.2f}"


def format_report_text(report: EvaluationReport) -> str:
    """Render the evaluation as a fixed-width text table."""
    counts = report.counts
    lines = [
        f"clips evaluated: {counts.total}   skipped: {len(report.skipped)}",
        f"tp={counts.tp} tn={counts.tn} fp={counts.fp} fn={counts.fn}",
        f"precision(%): {_pct(report.precision_pct)}   "
        f"recall(%): {_pct(report.recall_pct)}   f1(%): {_pct(report.f1_pct)}",
        "",
        f"{'category':<16}{'clips':>8}{'errors':>8}{'error_rate(%)':>16}",
    ]
    for name in sorted(report.per_category):
        stats = report.per_category[name]
        lines.append(f"{name:<16}{stats.clips:>8}{stats.errors:>8}{stats.error_rate_pct:>16.2f}")
    for path, reason in report.skipped:
        lines.append(f"skipped {path}: {reason}")
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvaluationReport) -> dict:
    counts = report.counts
    return {
        "counts": {"tp": counts.tp, "tn": counts.tn, "fp": counts.fp, "fn": counts.fn},
        "precision_pct": report.precision_pct,
        "recall_pct": report.recall_pct,
        "f1_pct": report.f1_pct,
        "per_category": {
            name: {
                "clips": stats.clips,
                "errors": stats.errors,
                "error_rate_pct": stats.error_rate_pct,
            }
            for name, stats in sorted(report.per_category.items())
        },
        "skipped": [{"path": p, "reason": r} for p, r in report.skipped],
    }


def format_harmful_rate_text(report: HarmfulRateReport) -> str:
    lines = [
        f"clips: {len(report.clip_decisions)}   "
        f"harmful_rate(%): {report.harmful_rate_pct:.2f}   "
        f"threshold(%): {report.threshold_pct:.2f}   verdict: {report.verdict}",
        f"{'offset_s':>10}{'class':>14}{'decision_value':>18}",
    ]
    for d in report.clip_decisions:
        name = "obscene" if d.predicted == 1 else "non_obscene"
        lines.append(f"{d.offset_s:>10.1f}{name:>14}{d.decision_value:>18.6f}")
    return "\n".join(lines) + "\n"


def harmful_rate_to_dict(report: HarmfulRateReport) -> dict:
    return {
        "harmful_rate_pct": report.harmful_rate_pct,
        "threshold_pct": report.threshold_pct,
        "verdict": report.verdict,
        "clips": [
            {
                "offset_s": d.offset_s,
                "class": "obscene" if d.predicted == 1 else "non_obscene",
                "decision_value": d.decision_value,
            }
            for d in report.clip_decisions
        ],
    }
