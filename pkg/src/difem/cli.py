"""Command-line interface: synthesize corpora, extract features, train,
predict, and evaluate with reproducible configuration.

Exit codes: 0 success, 2 input or configuration error, 3 data or contract
error. Every run writes its resolved configuration next to its outputs
(``<file>.run.json`` for file outputs, ``run_config.json`` in output
directories), so any result can be reproduced bit for bit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from .classifiers import ClassifierConfig, predict_many, train_model
from .data import (
    INT_TO_LABEL,
    load_video_dir,
    read_feature_cache,
    read_manifest,
    write_feature_cache,
)
from .errors import (
    ConfigError,
    ContractViolation,
    DifemError,
    DimensionError,
    DuplicateFrameError,
    ParseError,
    StratificationError,
)
from .evaluation import confusion, kfold_cv, metrics
from .features import enabled_feature_names, extract_features
from .model_io import load_model, save_model

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DATA = 3

CLASSIFIER_CHOICES = {
    "decision-tree": "decision_tree",
    "random-forest": "random_forest",
    "adaboost": "adaboost",
    "knn": "knn",
}


def _add_feature_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-velocity", action="store_true",
                        help="drop the velocity feature group")
    parser.add_argument("--no-overlap", action="store_true",
                        help="drop the joint-overlap feature group")


def _feature_flags(args) -> tuple[bool, bool]:
    return (not args.no_velocity, not args.no_overlap)


def _add_classifier_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--classifier", required=True, choices=sorted(CLASSIFIER_CHOICES))
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--trees", type=int, default=100, help="forest size")
    parser.add_argument("--estimators", type=int, default=100, help="boosting rounds")
    parser.add_argument("--k", type=int, default=5, help="neighbours for knn")


def _classifier_config(args) -> ClassifierConfig:
    return ClassifierConfig(
        kind=CLASSIFIER_CHOICES[args.classifier],
        n_trees=args.trees,
        n_estimators=args.estimators,
        k=args.k,
        seed=args.seed,
    )


def _parse_frame_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        width, height = int(w), int(h)
    except ValueError as exc:
        raise ConfigError(f"frame size must look like 640x480, got {text!r}") from exc
    if width <= 0 or height <= 0:
        raise ConfigError("frame size must be positive")
    return width, height


def _write_sidecar(path: Path, args) -> None:
    resolved = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key != "func"
    }
    payload = {"format": "difem-run/1", "tool_version": __version__, "config": resolved}
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _extract_one(task):
    video_dir, label, use_velocity, use_overlap, floor, diagonal = task
    try:
        sequence = load_video_dir(video_dir, label=label)
        fv = extract_features(
            sequence,
            use_velocity,
            use_overlap,
            confidence_floor=floor,
            normalize_diagonal=diagonal,
        )
        return ("ok", sequence.video_id, label, fv.enabled_values())
    except (DifemError, OSError) as exc:
        return ("err", f"{type(exc).__name__}: {exc}")


def cmd_synth(args) -> int:
    from .synth import FIGHT_PRESET, NONFIGHT_PRESET, corpus_params, write_corpus

    overrides = {}
    if args.frames is not None:
        overrides["n_frames"] = args.frames
    if args.persons is not None:
        overrides["n_persons"] = args.persons
    if args.frame_size is not None:
        overrides["frame_size"] = _parse_frame_size(args.frame_size)
    if args.drop_rate is not None:
        overrides["joint_drop_rate"] = args.drop_rate
    named = corpus_params(
        args.videos_per_class,
        base_seed=args.seed,
        fight=replace(FIGHT_PRESET, **overrides),
        nonfight=replace(NONFIGHT_PRESET, **overrides),
    )
    manifest = write_corpus(args.out, named)
    _write_sidecar(Path(args.out) / "run_config.json", args)
    print(f"wrote {len(named)} video(s) under {args.out} (manifest: {manifest})")
    return EXIT_OK


def cmd_extract(args) -> int:
    entries = read_manifest(args.manifest)
    use_velocity, use_overlap = _feature_flags(args)
    names = enabled_feature_names(use_velocity, use_overlap)
    diagonal = None
    if args.normalize is not None:
        width, height = _parse_frame_size(args.normalize)
        diagonal = math.hypot(width, height)
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")

    tasks = [
        (str(video_dir), label, use_velocity, use_overlap, args.confidence_floor, diagonal)
        for video_dir, label in entries
    ]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_extract_one, tasks))
    else:
        results = [_extract_one(task) for task in tasks]

    rows, failures = [], []
    for task, result in zip(tasks, results):
        if result[0] == "ok":
            rows.append(result[1:])
        else:
            failures.append((task[0], result[1]))

    write_feature_cache(args.out, rows, names)
    _write_sidecar(Path(str(args.out) + ".run.json"), args)
    print(f"wrote {len(rows)} feature row(s) to {args.out}")
    if failures:
        errors_path = Path(str(args.out) + ".errors.txt")
        errors_path.write_text(
            "".join(f"{video_dir}\t{message}\n" for video_dir, message in failures),
            encoding="utf-8",
        )
        for video_dir, message in failures:
            print(f"error: {video_dir}: {message}", file=sys.stderr)
        print(f"{len(failures)} video(s) failed; details in {errors_path}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def cmd_train(args) -> int:
    table = read_feature_cache(args.features)
    use_velocity, use_overlap = _feature_flags(args)
    dataset = table.to_dataset(use_velocity=use_velocity, use_overlap=use_overlap)
    if dataset.n_rows == 0:
        raise ContractViolation("feature cache holds no rows to train on")
    model = train_model(_classifier_config(args), dataset)
    save_model(args.out, model)
    _write_sidecar(Path(str(args.out) + ".run.json"), args)
    train_accuracy = float((predict_many(model, dataset.features) == dataset.labels).mean())
    print(f"trained {args.classifier} on {dataset.n_rows} row(s), "
          f"{dataset.n_features} feature(s) {list(dataset.feature_names)}")
    print(f"training accuracy: {train_accuracy:.4f}")
    print(f"model written to {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    table = read_feature_cache(args.features)
    model = load_model(args.model)
    predictions = predict_many(model, table.select(model.feature_names))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write("video_id,label,prediction\n")
        for video_id, label, pred in zip(table.video_ids, table.labels, predictions):
            fh.write(f"{video_id},{label},{INT_TO_LABEL[int(pred)]}\n")
    _write_sidecar(Path(str(args.out) + ".run.json"), args)
    print(f"wrote {len(table.video_ids)} prediction(s) to {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .report import write_evaluation_outputs

    table = read_feature_cache(args.features)
    model = load_model(args.model)
    predictions = predict_many(model, table.select(model.feature_names))
    report = metrics(confusion(predictions, table.label_ints()))
    out_dir = Path(args.out_dir)
    written = write_evaluation_outputs(out_dir, report, figures=not args.no_figures)
    _write_sidecar(out_dir / "run_config.json", args)
    print(f"accuracy: {report.accuracy:.4f} over {report.confusion.total} video(s)")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_cv(args) -> int:
    from .report import write_cv_outputs

    table = read_feature_cache(args.features)
    use_velocity, use_overlap = _feature_flags(args)
    dataset = table.to_dataset(use_velocity=use_velocity, use_overlap=use_overlap)
    cv = kfold_cv(dataset, _classifier_config(args), k=args.folds, seed=args.seed)
    out_dir = Path(args.out_dir)
    written = write_cv_outputs(out_dir, cv, figures=not args.no_figures)
    _write_sidecar(out_dir / "run_config.json", args)
    print(f"averaged accuracy over {cv.k} folds: {cv.averaged.accuracy:.4f}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="difem",
        description="Joint-velocity and joint-overlap video features "
                    "with simple two-class classifiers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="write a synthetic pose corpus with a manifest")
    sp.add_argument("--out", required=True, type=Path)
    sp.add_argument("--videos-per-class", type=int, default=10)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--frames", type=int, default=None)
    sp.add_argument("--persons", type=int, default=None)
    sp.add_argument("--frame-size", default=None, metavar="WxH")
    sp.add_argument("--drop-rate", type=float, default=None)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("extract", help="extract per-video features for a manifest")
    sp.add_argument("--manifest", required=True, type=Path)
    sp.add_argument("--out", required=True, type=Path)
    _add_feature_flags(sp)
    sp.add_argument("--confidence-floor", type=float, default=0.0,
                    help="keypoints at or below this confidence are ignored")
    sp.add_argument("--normalize", default=None, metavar="WxH",
                    help="divide coordinates by the diagonal of this frame size")
    sp.add_argument("--jobs", type=int, default=1, help="videos processed in parallel")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("train", help="train a classifier on a feature cache")
    sp.add_argument("--features", required=True, type=Path)
    sp.add_argument("--out", required=True, type=Path)
    _add_classifier_options(sp)
    _add_feature_flags(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="label feature rows with a trained model")
    sp.add_argument("--features", required=True, type=Path)
    sp.add_argument("--model", required=True, type=Path)
    sp.add_argument("--out", required=True, type=Path)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("evaluate", help="score a model against labelled features")
    sp.add_argument("--features", required=True, type=Path)
    sp.add_argument("--model", required=True, type=Path)
    sp.add_argument("--out-dir", required=True, type=Path)
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("cv", help="stratified k-fold cross-validation")
    sp.add_argument("--features", required=True, type=Path)
    sp.add_argument("--out-dir", required=True, type=Path)
    sp.add_argument("--folds", type=int, default=5)
    _add_classifier_options(sp)
    _add_feature_flags(sp)
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_cv)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, DuplicateFrameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ContractViolation, DimensionError, StratificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
