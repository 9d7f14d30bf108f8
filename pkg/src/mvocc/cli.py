"""Command-line front end: ``mvocc {cv,train,eval,synth}``.

Exit status 0 on success, 1 for invalid input or configuration, 2 for
runtime failures (divergence, no feasible grid point, ...).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import load_model, save_model
from .config import RunConfig, load_config
from .dataset import load_multiview_csv, stratified_folds, write_multiview_csv
from .errors import (
    AlignmentError,
    ConfigurationError,
    ContractError,
    InfeasibleError,
    MvoccError,
    OracleScaleError,
    ParameterError,
    ParseError,
    ShapeError,
    SplitError,
    StratificationError,
)
from .evaluation import (
    ReportRow,
    compute_metrics,
    confusion_from_predictions,
    cross_validate,
    cross_validate_strategies,
    render_report,
    score_grid,
    select_best,
)
from .models import fit_model, predict
from .synthetic import SynthSpec, gen_two_view

VALIDATION_ERRORS = (
    ConfigurationError, ParseError, AlignmentError, StratificationError, ParameterError,
    ShapeError, SplitError, InfeasibleError, ContractError, OracleScaleError,
)

RESULTS_FORMAT = "mvocc-results"
METHOD_NOTES = {
    "regularization_catalog": "v1 (reconstructed forms): selector 1/4 ones, 2/5 alpha on boundary SVs, 3/6 alpha; 1-3 per-view, 4-6 coupled",
    "kernelization": "rbf subspace methods run on a per-view NPT embedding; svdd/ocsvm use the kernel expansion",
    "ocsvm_nu": "nu = 1/(N*C) clamped to (0, 1]",
    "radius": "mean squared distance over unbounded support vectors",
    "pooling": "primary metrics pool confusion counts over outer test folds; macro averages also given",
}


def _out_dir(args, cfg: RunConfig | None, default: str) -> Path:
    out = Path(args.out or (cfg.out if cfg and cfg.out else default))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_cfg(args) -> RunConfig:
    cfg = load_config(args.config)
    updates = cfg.to_dict()
    if args.seed is not None:
        updates["seed"] = args.seed
    updates["jobs"] = args.jobs if args.jobs is not None else cfg.jobs
    updates["out"] = cfg.out
    for p in updates["inputs"]:
        if not Path(p).is_file():
            raise ConfigurationError(f"input file not found: {p}")
    return RunConfig.from_mapping(updates)


def _dump(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n", encoding="utf-8")


def cmd_cv(args) -> int:
    cfg = _load_cfg(args)
    ds = load_multiview_csv(cfg.inputs, cfg.label_column, cfg.target)
    if cfg.method == "ms_svdd" and ds.n_views < 2:
        raise ConfigurationError("ms_svdd requires >= 2 views")
    grid = cfg.hyperparams()
    common = dict(k_outer=cfg.k_outer, k_inner=cfg.k_inner, seed=cfg.seed,
                  standardize=cfg.standardize, jobs=cfg.jobs)
    if cfg.method == "ms_svdd" and cfg.split_strategies:
        results = list(cross_validate_strategies(ds, grid, **common).values())
    else:
        results = [cross_validate(ds, cfg.method, grid, **common)]

    title = f"{cfg.method} / target {cfg.target} / {cfg.kernel} kernel / {cfg.k_outer}-fold (inner {cfg.k_inner}), seed {cfg.seed}"
    text, report_doc = render_report(results, title)
    out = _out_dir(args, cfg, "mvocc_out")
    footer = "".join(f"# {k}: {v}\n" for k, v in METHOD_NOTES.items())
    (out / "report.txt").write_text(text + footer, encoding="utf-8")
    _dump(out / "results.json", {
        "format": RESULTS_FORMAT,
        "version": 1,
        "tool_version": __version__,
        "config": cfg.to_dict(),
        "notes": METHOD_NOTES,
        "dataset": {"n_samples": ds.n_samples, "views": [v.feature_dim for v in ds.views],
                    "class_counts": {c: int(np.sum(ds.labels == c)) for c in ds.classes}},
        "runs": [r.to_dict() for r in results],
        "table": report_doc["rows"],
    })
    plan = results[0].plan
    _dump(out / "folds.json", {**plan.to_dict(), "subject_ids": ds.subject_ids.tolist(),
                               "labels": ds.labels.tolist()})
    print(text, end="")
    print(f"wrote {out / 'report.txt'}, {out / 'results.json'}, {out / 'folds.json'}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    ds = load_multiview_csv(cfg.inputs, cfg.label_column, cfg.target)
    grid = cfg.hyperparams()
    score = None
    if len(grid) == 1:
        hp = grid[0]
    else:
        plan = stratified_folds(ds, cfg.k_inner, cfg.seed)
        scores = score_grid(ds, plan, cfg.method, grid, cfg.standardize, cfg.seed)
        best = select_best(scores, grid)
        hp, score = grid[best], float(scores[best])
    model = fit_model(cfg.method, ds, hp, standardize=cfg.standardize, seed=cfg.seed)
    out = _out_dir(args, cfg, "mvocc_out")
    save_model(model, out / "model.json", cfg.label_column)
    print(f"selected {json.dumps(hp.to_dict())}" + (f" (inner mean GM {score:.2f})" if score is not None else ""))
    print(f"wrote {out / 'model.json'}")
    return 0


def _read_predictions(path: Path, target: str):
    if not path.is_file():
        raise ConfigurationError(f"predictions file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ParseError(f"{path}: no rows")
    if "label" not in rows[0] or "prediction" not in rows[0]:
        raise ParseError(f"{path}: needs 'label' and 'prediction' columns")
    truth = np.array([r["label"].strip() == target for r in rows])
    pred = np.array([r["prediction"].strip() == target for r in rows])
    return truth, pred


def cmd_eval(args) -> int:
    if args.predictions:
        if not args.target:
            raise ConfigurationError("--predictions needs --target")
        truth, pred = _read_predictions(Path(args.predictions), args.target)
        target = args.target
    else:
        if not args.model or not args.data:
            raise ConfigurationError("eval needs --model and --data, or --predictions")
        model, doc = load_model(args.model)
        label_column = args.label_column or doc.get("label_column", "label")
        ds = load_multiview_csv(args.data, label_column, model.target_class, require_target=False)
        if ds.n_views != model.n_views:
            raise ConfigurationError(f"model ({model.method}) expects {model.n_views} views, got {ds.n_views}")
        truth, pred = ds.is_target, predict(model, ds)
        target = model.target_class
    cm = confusion_from_predictions(truth, pred, target)
    m = compute_metrics(cm)
    text, _ = render_report([ReportRow("eval", target, "-", "-", cm)])
    print(text, end="")
    print(f"confusion (rows truth, cols predicted; positive = {target}):")
    print(f"  target   : TP={cm.tp:5d}  FN={cm.fn:5d}")
    print(f"  other    : FP={cm.fp:5d}  TN={cm.tn:5d}")
    if m.flags:
        print("flags: " + ", ".join(m.flags))
    if args.out:
        out = _out_dir(args, None, args.out)
        _dump(out / "eval.json", {"confusion": cm.to_dict(), "metrics": m.to_dict()})
    return 0


def cmd_synth(args) -> int:
    dims = tuple(args.dims) if args.dims else (args.dim,) * args.views
    spec = SynthSpec(args.n_target, args.n_outlier, dims, args.separation, args.seed)
    ds = gen_two_view(spec)
    out = _out_dir(args, None, "synth")
    paths = [out / f"view{v + 1}.csv" for v in range(ds.n_views)]
    write_multiview_csv(ds, paths)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvocc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="TOML config or a previous results.json")
        p.add_argument("--seed", type=int, default=None, help="override the config seed (u64)")
        p.add_argument("--jobs", type=int, default=None, help="parallel outer folds")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("cv", help="nested stratified CV with GMean grid search")
    common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("train", help="select hyperparameters on all data and write model.json")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model or a predictions file")
    p.add_argument("--model")
    p.add_argument("--data", nargs="+", help="one CSV per view")
    p.add_argument("--label-column", default=None)
    p.add_argument("--predictions", help="CSV with 'label' and 'prediction' columns")
    p.add_argument("--target", help="positive class for --predictions")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic multi-view dataset as CSV")
    p.add_argument("--n-target", type=int, default=60)
    p.add_argument("--n-outlier", type=int, default=20)
    p.add_argument("--dim", type=int, default=6, help="features per view")
    p.add_argument("--dims", type=int, nargs="+", help="per-view feature counts (overrides --dim/--views)")
    p.add_argument("--views", type=int, default=2)
    p.add_argument("--separation", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MvoccError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
