"""Command-line surface: extract, train, predict, scan, noise, sweep,
evaluate, synth.

Every subcommand is deterministic given its flags and seeds. Exit code 0
means zero per-file failures; partial failures are logged to stderr and
signalled with exit code 1. Report-producing subcommands (scan, sweep,
evaluate) write JSON and text next to a rendered PNG figure when --out
is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .audio_io import (
    DatasetManifest,
    ManifestEntry,
    add_awgn,
    label_sign,
    load_audio,
    load_manifest,
    save_manifest,
    save_wav,
    split_into_clips,
)
from .evaluation import (
    ClipDecision,
    ConfusionCounts,
    DEFAULT_THRESHOLD_PCT,
    evaluate_manifest,
    format_harmful_rate_text,
    format_report_text,
    harmful_rate,
    harmful_rate_to_dict,
    metrics,
    report_to_dict,
)
from .features import FAMILIES, FAMILY_RCSF, FeatureConfig, clip_feature, load_features, save_features
from .svm import (
    DEFAULT_C_GRID,
    DEFAULT_GAMMA_GRID,
    TrainConfig,
    grid_search,
    load_model,
    predict,
    predict_batch,
    save_model,
    train_model,
)
from .synth import make_corpus

DEFAULT_QUEFRENCY_ORDERS = "7,9,11,13,15,17,19,21,23"
DEFAULT_TEMPORAL_ORDERS = "5,7,9,11,13,15,17,19"


def _add_feature_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=FAMILIES, default=FAMILY_RCSF)
    parser.add_argument("--quefrency-order", type=int, default=23)
    parser.add_argument("--temporal-order", type=int, default=15)


def _feature_config(args) -> FeatureConfig:
    return FeatureConfig(
        family=args.family,
        quefrency_order=args.quefrency_order,
        temporal_order=args.temporal_order,
    )


def _check_fingerprint(model, config: FeatureConfig) -> None:
    if model.feature_fingerprint and model.feature_fingerprint != config.fingerprint():
        raise ValueError(
            "model was trained under a different feature configuration; "
            "pass the matching --family/--quefrency-order/--temporal-order"
        )


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _sibling(out, suffix: str) -> Path:
    return Path(out).with_suffix(suffix)


def _write_json(path, document) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2)
        fh.write("\n")


def _extract_matrix(entries, config: FeatureConfig):
    """Extract features for manifest entries; returns (labels, matrix, failures)."""
    labels, rows, failures = [], [], 0
    for entry in entries:
        try:
            feature = clip_feature(load_audio(entry.path), config)
        except (OSError, ValueError) as exc:
            print(f"error: {entry.path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        labels.append(entry.label)
        rows.append(feature.values)
    matrix = np.array(rows) if rows else np.zeros((0, config.vector_length))
    return labels, matrix, failures


def cmd_extract(args) -> int:
    manifest = load_manifest(args.manifest)
    config = _feature_config(args)
    labels, matrix, failures = _extract_matrix(manifest.for_split(args.split), config)
    save_features(args.out, labels, matrix, config.fingerprint())
    print(f"wrote {len(labels)} feature vectors to {args.out}"
          + (f" ({failures} files failed)" if failures else ""))
    return 1 if failures else 0


def _train_config(args) -> TrainConfig:
    return TrainConfig(folds=args.folds, rng_seed=args.seed)


def _grids(args):
    c_values = _parse_floats(args.c_grid) if args.c_grid else DEFAULT_C_GRID
    gamma_values = _parse_floats(args.gamma_grid) if args.gamma_grid else DEFAULT_GAMMA_GRID
    return c_values, gamma_values


def cmd_train(args) -> int:
    fingerprint, labels, matrix = load_features(args.features)
    y = np.array([label_sign(lbl) for lbl in labels], dtype=np.float64)
    base = _train_config(args)
    c_values, gamma_values = _grids(args)
    result = grid_search(matrix, y, base, c_values, gamma_values)
    model = train_model(matrix, y, replace(base, c=result.c, gamma=result.gamma), fingerprint)
    save_model(model, args.model)
    print(
        f"selected c={result.c:g} gamma={result.gamma:g} "
        f"(cv accuracy {result.accuracy:.4f}); model -> {args.model}"
    )
    return 0


def _class_name(cls: int) -> str:
    return "obscene" if cls == 1 else "non_obscene"


def cmd_predict(args) -> int:
    model = load_model(args.model)
    config = _feature_config(args)
    lines, failures = [], 0
    for path in args.inputs:
        if path.endswith(".wav"):
            _check_fingerprint(model, config)
            try:
                clips = split_into_clips(load_audio(path))
                if not clips:
                    raise ValueError("recording shorter than one 10 s clip")
                for clip in clips:
                    cls, value = predict(model, clip_feature(clip, config))
                    lines.append(f"{path}\t{clip.source_offset_s:g}\t{_class_name(cls)}\t{value:.6f}")
            except (OSError, ValueError) as exc:
                print(f"error: {path}: {exc}", file=sys.stderr)
                failures += 1
        else:
            try:
                fingerprint, _, matrix = load_features(path)
                if model.feature_fingerprint and fingerprint != model.feature_fingerprint:
                    raise ValueError("feature file fingerprint does not match the model's")
                classes, values = predict_batch(model, matrix)
                for k, (cls, value) in enumerate(zip(classes, values)):
                    lines.append(f"{path}\t{k}\t{_class_name(int(cls))}\t{value:.6f}")
            except (OSError, ValueError) as exc:
                print(f"error: {path}: {exc}", file=sys.stderr)
                failures += 1
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 1 if failures else 0


def cmd_scan(args) -> int:
    from .plotting import save_scan_figure

    model = load_model(args.model)
    config = _feature_config(args)
    _check_fingerprint(model, config)
    clips = split_into_clips(load_audio(args.audio))
    if not clips:
        raise ValueError(f"{args.audio}: recording shorter than one 10 s clip")
    decisions = []
    for clip in clips:
        cls, value = predict(model, clip_feature(clip, config))
        decisions.append(ClipDecision(clip.source_offset_s, cls, value))
    report = harmful_rate(decisions, args.threshold_pct)
    text = format_harmful_rate_text(report)
    print(text, end="")
    if args.out:
        _write_json(_sibling(args.out, ".json"), harmful_rate_to_dict(report))
        _sibling(args.out, ".txt").write_text(text, encoding="utf-8")
        save_scan_figure(report, _sibling(args.out, ".png"))
    return 0


def cmd_noise(args) -> int:
    manifest = load_manifest(args.manifest)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries, failures = [], 0
    for index, entry in enumerate(manifest.entries):
        try:
            noisy = add_awgn(load_audio(entry.path), args.snr_db, args.seed + index)
        except (OSError, ValueError) as exc:
            print(f"error: {entry.path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        path = out_dir / f"{index:04d}_{Path(entry.path).stem}_snr{args.snr_db:g}db.wav"
        save_wav(path, noisy, "float32")
        entries.append(ManifestEntry(str(path), entry.label, entry.split, entry.category))
    save_manifest(DatasetManifest(entries), out_dir / "manifest.jsonl")
    print(f"wrote {len(entries)} noisy clips to {out_dir}"
          + (f" ({failures} files failed)" if failures else ""))
    return 1 if failures else 0


def _sweep_point(manifest: DatasetManifest, config: FeatureConfig, args):
    """Grid-search, train on the train split, evaluate on the test split."""
    labels, matrix, failures = _extract_matrix(manifest.for_split("train"), config)
    y = np.array([label_sign(lbl) for lbl in labels], dtype=np.float64)
    base = _train_config(args)
    c_values, gamma_values = _grids(args)
    result = grid_search(matrix, y, base, c_values, gamma_values)
    model = train_model(matrix, y, replace(base, c=result.c, gamma=result.gamma), config.fingerprint())
    report = evaluate_manifest(model, manifest, config, "test")
    precision, recall, f1 = metrics(report.counts)
    return f1, precision, recall, failures + len(report.skipped)


def _fmt_pct(value) -> str:
    return "undefined" if value is None else f"{value:.2f}"


def cmd_sweep(args) -> int:
    from .plotting import save_sweep_figure

    manifest = load_manifest(args.manifest)
    q_orders = _parse_ints(args.quefrency_orders)
    t_orders = _parse_ints(args.temporal_orders) if args.family == FAMILY_RCSF else [args.temporal_order]
    rows, failures = [], 0
    for q in q_orders:
        for t in t_orders:
            config = FeatureConfig(family=args.family, quefrency_order=q, temporal_order=t)
            f1, precision, recall, skipped = _sweep_point(manifest, config, args)
            rows.append((q, t, f1, precision, recall))
            failures += skipped

    lines = ["order\tf1(%)\tprecision(%)\trecall(%)"]
    for q, t, f1, precision, recall in rows:
        name = f"Q({q})_T({t})" if args.family == FAMILY_RCSF else f"Q({q})"
        lines.append(f"{name}\t{_fmt_pct(f1)}\t{_fmt_pct(precision)}\t{_fmt_pct(recall)}")
    for stat, reducer in (("Mean", np.mean), ("Std", np.std)):
        cells = []
        for col in range(3):
            defined = [row[2 + col] for row in rows if row[2 + col] is not None]
            cells.append(f"{reducer(defined):.2f}" if defined else "undefined")
        lines.append(f"{stat}\t" + "\t".join(cells))
    table = "\n".join(lines) + "\n"
    print(table, end="")

    if args.out:
        _sibling(args.out, ".tsv").write_text(table, encoding="utf-8")
        _write_json(
            _sibling(args.out, ".json"),
            [
                {"quefrency_order": q, "temporal_order": t, "f1_pct": f1,
                 "precision_pct": precision, "recall_pct": recall}
                for q, t, f1, precision, recall in rows
            ],
        )
        save_sweep_figure([(q, t, f1) for q, t, f1, _, _ in rows], _sibling(args.out, ".png"))
    return 1 if failures else 0


def cmd_evaluate(args) -> int:
    from .plotting import save_category_error_figure

    model = load_model(args.model)
    config = _feature_config(args)
    _check_fingerprint(model, config)
    report = evaluate_manifest(model, load_manifest(args.manifest), config, args.split)
    text = format_report_text(report)
    print(text, end="")
    if args.out:
        _write_json(_sibling(args.out, ".json"), report_to_dict(report))
        _sibling(args.out, ".txt").write_text(text, encoding="utf-8")
        save_category_error_figure(report, _sibling(args.out, ".png"))
    return 1 if report.skipped else 0


def cmd_synth(args) -> int:
    manifest = make_corpus(args.out, args.num_obscene, args.num_general, args.seed, args.duration_s)
    print(f"wrote {len(manifest.entries)} clips and manifest.jsonl to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soundscreen",
        description="Detect obscene sound in 10 s audio clips and screen recordings by harmful rate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract clip feature vectors for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="feature file to write")
    p.add_argument("--split", choices=("train", "test", "all"), default="all")
    _add_feature_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="grid-search and train a model from a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True, help="model JSON file to write")
    p.add_argument("--c-grid", help="comma-separated box-constraint values")
    p.add_argument("--gamma-grid", help="comma-separated RBF gamma values")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify clips from WAV files or a feature file")
    p.add_argument("--model", required=True)
    p.add_argument("inputs", nargs="+", help="WAV paths (split into 10 s clips) or feature files")
    p.add_argument("--out", help="write the per-clip table here instead of stdout")
    _add_feature_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("scan", help="rate one recording by its share of obscene clips")
    p.add_argument("--model", required=True)
    p.add_argument("audio", help="WAV recording to scan")
    p.add_argument("--threshold-pct", type=float, default=DEFAULT_THRESHOLD_PCT)
    p.add_argument("--out", help="report path; writes .json, .txt, and .png siblings")
    _add_feature_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("noise", help="write noise-corrupted copies of manifest clips")
    p.add_argument("--manifest", required=True)
    p.add_argument("--snr-db", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("sweep", help="train and evaluate across feature-order combinations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--family", choices=FAMILIES, default=FAMILY_RCSF)
    p.add_argument("--quefrency-orders", default=DEFAULT_QUEFRENCY_ORDERS)
    p.add_argument("--temporal-orders", default=DEFAULT_TEMPORAL_ORDERS)
    p.add_argument("--temporal-order", type=int, default=15, help="fixed order for non-rcsf families")
    p.add_argument("--c-grid", help="comma-separated box-constraint values")
    p.add_argument("--gamma-grid", help="comma-separated RBF gamma values")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="table path; writes .tsv, .json, and .png siblings")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("evaluate", help="confusion counts and per-category error rates on a manifest split")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", choices=("train", "test", "all"), default="test")
    p.add_argument("--out", help="report path; writes .json, .txt, and .png siblings")
    _add_feature_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic labelled corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--num-obscene", type=int, default=40)
    p.add_argument("--num-general", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration-s", type=float, default=10.0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
