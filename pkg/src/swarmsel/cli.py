"""Command-line surface: synth | extract | select | train-eval | pipeline.

Exit codes: 0 success, 2 usage/config errors (bad flags, unreadable inputs,
out-of-range parameters), 1 unexpected runtime failure. Machine-readable
output goes to files only; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import classifiers, dataset, evaluation, imaging, lpq, selectors
from .config import ConfigError, RunConfig, load_config, write_effective_config
from .parallel import parallel_map


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _ensure_out_dir(path: str | None) -> str:
    if not path:
        raise ConfigError("an output directory is required (--out DIR)")
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".write_probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"output directory {path!r} is not writable: {exc}") from exc
    return path


def _load_run_config(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None), seed=getattr(args, "seed", None),
                      folds=getattr(args, "folds", None), out=getattr(args, "out", None))
    return cfg


def _extract_features(entries: list[tuple[str, int]], ids: list[str],
                      cfg: RunConfig) -> tuple[dataset.FeatureMatrix, np.ndarray]:
    def one(entry: tuple[str, int]) -> np.ndarray:
        path, _ = entry
        img = imaging.load_image(path)
        img = imaging.preprocess(img, cfg.preprocess)
        return lpq.extract(img, cfg.lpq)

    rows = parallel_map(one, entries)
    labels = np.array([label for _, label in entries], dtype=np.int64)
    return dataset.FeatureMatrix(np.vstack(rows), ids), dataset.validate_labels(labels)


def _features_from_arrays(images: np.ndarray, labels: np.ndarray,
                          cfg: RunConfig) -> dataset.FeatureMatrix:
    def one(img: np.ndarray) -> np.ndarray:
        return lpq.extract(imaging.preprocess(img, cfg.preprocess), cfg.lpq)

    rows = parallel_map(one, list(images))
    ids = [f"synth_{i:05d}" for i in range(len(labels))]
    return dataset.FeatureMatrix(np.vstack(rows), ids)


def _reducer_spec(cfg: RunConfig, method: str, nf: int) -> selectors.ReducerSpec:
    return selectors.ReducerSpec(
        method=method, nf=nf, seed=cfg.seed,
        w=cfg.fitness["w"], holdout_fraction=cfg.fitness["holdout_fraction"],
        ridge_lambda=cfg.fitness["ridge_lambda"], lasso_lambda=cfg.lasso_lambda,
        bees=cfg.bees, pso=cfg.pso,
    )


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Commands


def cmd_synth(args) -> int:
    cfg = _load_run_config(args)
    out = _ensure_out_dir(cfg.output_dir)
    image_dir = os.path.join(out, "images")
    os.makedirs(image_dir, exist_ok=True)
    images, labels = dataset.synth_generate(cfg.synth)
    rows = []
    for i, img in enumerate(images):
        rel = os.path.join("images", f"img_{i:05d}.pgm")
        imaging.write_pgm(img, os.path.join(out, rel))
        rows.append(f"{rel},{int(labels[i])}")
    manifest = os.path.join(out, "manifest.csv")
    with open(manifest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("path,label\n" + "\n".join(rows) + "\n")
    write_effective_config(cfg, os.path.join(out, "effective_config.json"))
    _say(f"wrote {len(images)} images and {manifest}")
    return 0


def cmd_extract(args) -> int:
    cfg = _load_run_config(args)
    out = _ensure_out_dir(cfg.output_dir)
    entries = dataset.load_manifest(args.manifest)
    base = os.path.dirname(os.path.abspath(args.manifest))
    ids = [os.path.relpath(path, base) for path, _ in entries]
    matrix, labels = _extract_features(entries, ids, cfg)
    features_path = os.path.join(out, "features.csv")
    dataset.features_write(matrix, labels, features_path)
    write_effective_config(cfg, os.path.join(out, "effective_config.json"))
    _say(f"wrote {features_path} ({matrix.values.shape[0]} rows, "
         f"{matrix.values.shape[1]} features)")
    return 0


def cmd_select(args) -> int:
    cfg = _load_run_config(args)
    out = _ensure_out_dir(cfg.output_dir)
    matrix, labels = dataset.features_read(args.features)
    d = matrix.values.shape[1]
    nf = args.nf
    if nf is None:
        raise ConfigError("select requires --nf")
    if not 2 <= nf <= d - 1:
        raise ConfigError(f"nf must lie in [2, {d - 1}]")
    spec = _reducer_spec(cfg, args.method, nf)
    reducer, history = spec.fit(matrix.values, labels)
    doc = selectors.reducer_document(spec, reducer, history)
    path = os.path.join(out, "reducer.json")
    _write_json(doc, path)
    write_effective_config(cfg, os.path.join(out, "effective_config.json"))
    _say(f"wrote {path}")
    return 0


def _reducer_spec_from_file(path: str, n_features: int) -> selectors.ReducerSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read reducer {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"reducer {path} is not valid JSON: {exc}") from exc
    indices = doc.get("indices")
    if indices is not None and indices and max(indices) >= n_features:
        raise ConfigError(f"reducer indices exceed feature dimension {n_features}")
    components = doc.get("components")
    if components is not None and components and len(components[0]) != n_features:
        raise ConfigError(f"reducer projection dimension does not match {n_features} features")
    nf = doc.get("nf")
    if nf is not None and not 1 <= int(nf) <= n_features:
        raise ConfigError(f"reducer nf {nf} out of range for {n_features} features")
    try:
        return selectors.reducer_spec_from_document(doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid reducer document {path}: {exc}") from exc


def cmd_train_eval(args) -> int:
    cfg = _load_run_config(args)
    out = _ensure_out_dir(cfg.output_dir)
    matrix, labels = dataset.features_read(args.features)
    if args.classifier not in classifiers.KINDS:
        raise ConfigError(f"classifier must be one of {classifiers.KINDS}")
    clf = next((c for c in cfg.classifiers if c.kind == args.classifier),
               classifiers.ClassifierSpec(kind=args.classifier, seed=cfg.seed))
    rspec = None
    if args.reducer != "none":
        rspec = _reducer_spec_from_file(args.reducer, matrix.values.shape[1])
    report = evaluation.cross_validate(clf, rspec, matrix.values, labels,
                                       cfg.cv_folds, cfg.seed)
    _write_json(report.to_dict(), os.path.join(out, "report.json"))
    evaluation.write_confusion_csv(report.confusion, os.path.join(out, "confusion.csv"))
    evaluation.write_roc_svgs(report, out)
    write_effective_config(cfg, os.path.join(out, "effective_config.json"))
    _say(f"accuracy {report.accuracy:.4f}; artifacts in {out}")
    return 0


def cmd_pipeline(args) -> int:
    cfg = _load_run_config(args)
    out = _ensure_out_dir(cfg.output_dir)
    if cfg.pipeline.manifest:
        entries = dataset.load_manifest(cfg.pipeline.manifest)
        base = os.path.dirname(os.path.abspath(cfg.pipeline.manifest))
        ids = [os.path.relpath(path, base) for path, _ in entries]
        matrix, labels = _extract_features(entries, ids, cfg)
    else:
        images, labels = dataset.synth_generate(cfg.synth)
        matrix = _features_from_arrays(images, labels, cfg)
    dataset.features_write(matrix, labels, os.path.join(out, "features.csv"))

    reducer_specs = [_reducer_spec(cfg, method, cfg.pipeline.nf_list[0])
                     for method in cfg.pipeline.selectors]
    grid, reports = evaluation.comparison_grid(
        matrix.values, labels, reducer_specs, cfg.pipeline.nf_list,
        cfg.classifiers, cfg.cv_folds, cfg.seed)

    payload = grid.to_dict()
    payload.update({"seed": cfg.seed, "folds": cfg.cv_folds})
    _write_json(payload, os.path.join(out, "grid.json"))
    cells_dir = os.path.join(out, "cells")
    for (kind, column), report in sorted(reports.items()):
        cell_dir = os.path.join(cells_dir, f"{kind}__{column.replace(':', '_')}")
        os.makedirs(cell_dir, exist_ok=True)
        _write_json(report.to_dict(), os.path.join(cell_dir, "report.json"))
        evaluation.write_confusion_csv(report.confusion,
                                       os.path.join(cell_dir, "confusion.csv"))
        evaluation.write_roc_svgs(report, cell_dir)
    write_effective_config(cfg, os.path.join(out, "effective_config.json"))
    _say(f"grid written to {os.path.join(out, 'grid.json')}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmsel",
                                     description="texture feature selection pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--folds", type=int, help="override cv_folds")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("synth", help="generate the synthetic dataset")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract features for a manifest")
    common(p)
    p.add_argument("--manifest", required=True, help="CSV with header path,label")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("select", help="fit a feature reducer")
    common(p)
    p.add_argument("--features", required=True, help="feature CSV from extract")
    p.add_argument("--method", required=True,
                   choices=["bees", "pso", "pca", "lasso"])
    p.add_argument("--nf", type=int, help="number of features to keep")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train-eval", help="cross-validate a classifier")
    common(p)
    p.add_argument("--features", required=True, help="feature CSV from extract")
    p.add_argument("--reducer", default="none",
                   help="reducer JSON from select, or 'none' for all features")
    p.add_argument("--classifier", required=True, help=f"one of {classifiers.KINDS}")
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("pipeline", help="full comparison grid")
    common(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        _say(f"error: {exc}")
        return 2
    except OSError as exc:
        _say(f"error: {exc}")
        return 2
    except Exception as exc:  # pragma: no cover - unexpected runtime failure
        _say(f"runtime failure: {type(exc).__name__}: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
