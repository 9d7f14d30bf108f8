"""Metrics, hyperparameter grids, nested stratified CV and plain-text reports."""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import FoldPlan, MultiViewDataset, split_target_only, stratified_folds
from .errors import ConfigurationError, DegenerateKernelError, InfeasibleError, ProtocolError
from .kernels import KernelSpec
from .models import METHODS, fit_model, predict, predict_strategies
from .prng import derive_seed
from .subspace import REG_RANGE, STRATEGIES, HyperParams, RegularizationSpec

log = logging.getLogger(__name__)

METRIC_NAMES = ("sen", "spe", "pre", "f1", "acc", "gm")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int
    positive_class: str = "target"

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fn + other.fn, self.fp + other.fp,
                               self.tn + other.tn, self.positive_class)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn, "positive_class": self.positive_class}


def confusion_from_predictions(is_target: np.ndarray, predicted_target: np.ndarray,
                               positive_class: str = "target") -> ConfusionMatrix:
    y = np.asarray(is_target, dtype=bool)
    p = np.asarray(predicted_target, dtype=bool)
    if y.shape != p.shape:
        raise ValueError("truth and prediction lengths differ")
    return ConfusionMatrix(int(np.sum(y & p)), int(np.sum(y & ~p)), int(np.sum(~y & p)),
                           int(np.sum(~y & ~p)), positive_class)


@dataclass(frozen=True)
class MetricsReport:
    """Percentages. Undefined ratios are reported as 0 and named in ``flags``."""

    sen: float
    spe: float
    pre: float
    f1: float
    acc: float
    gm: float
    flags: tuple[str, ...] = ()

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, k) for k in METRIC_NAMES)

    def rounded(self, digits: int = 2) -> tuple[float, ...]:
        return tuple(round(x, digits) for x in self.as_tuple())

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in METRIC_NAMES}
        d["flags"] = list(self.flags)
        return d


def _ratio(num: float, den: float, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(f"undefined-{name}")
        return 0.0
    return num / den


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    flags: list[str] = []
    sen = _ratio(cm.tp, cm.tp + cm.fn, "sensitivity", flags)
    spe = _ratio(cm.tn, cm.tn + cm.fp, "specificity", flags)
    pre = _ratio(cm.tp, cm.tp + cm.fp, "precision", flags)
    f1 = _ratio(2.0 * pre * sen, pre + sen, "f1", flags)
    acc = _ratio(cm.tp + cm.tn, cm.total, "accuracy", flags)
    gm = math.sqrt(sen * spe)
    return MetricsReport(100 * sen, 100 * spe, 100 * pre, 100 * f1, 100 * acc, 100 * gm, tuple(flags))


def mean_metrics(reports: Sequence[MetricsReport]) -> MetricsReport:
    vals = np.mean([r.as_tuple() for r in reports], axis=0)
    flags = tuple(sorted({f for r in reports for f in r.flags}))
    return MetricsReport(*map(float, vals), flags=flags)


# --------------------------------------------------------------------------
# Grids

DEFAULT_GRIDS: dict[str, list] = {
    "eta": [1e-4, 1e-3, 1e-2, 1e-1, 1.0],
    "beta": [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3, 1e4],
    "c": [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
    "sigma": [1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3],
}
DEFAULT_D_UNIMODAL = list(range(1, 12))
DEFAULT_D_MULTIMODAL = list(range(1, 6))
AXES = ("eta", "beta", "c", "sigma", "d", "reg", "ds")


def method_axes(method: str, kernel: str) -> tuple[str, ...]:
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}; choose from {METHODS}")
    if kernel not in ("linear", "rbf"):
        raise ConfigurationError(f"unknown kernel {kernel!r}")
    axes = ["c"]
    if kernel == "rbf":
        axes.append("sigma")
    if method in ("s_svdd", "es_svdd", "ms_svdd"):
        axes += ["eta", "beta", "d", "reg"]
    if method == "ms_svdd":
        axes.append("ds")
    return tuple(a for a in AXES if a in axes)


def default_grids(method: str, kernel: str) -> dict[str, list]:
    grids = {}
    for axis in method_axes(method, kernel):
        if axis == "d":
            grids[axis] = DEFAULT_D_MULTIMODAL if method == "ms_svdd" else DEFAULT_D_UNIMODAL
        elif axis == "reg":
            grids[axis] = list(REG_RANGE["omega" if method == "ms_svdd" else "psi"])
        elif axis == "ds":
            grids[axis] = list(STRATEGIES)
        else:
            grids[axis] = DEFAULT_GRIDS[axis]
    return {k: list(v) for k, v in grids.items()}


def _validate_axis(axis: str, values: list, method: str):
    if not isinstance(values, (list, tuple)) or len(values) == 0:
        raise ConfigurationError(f"grid axis {axis!r} is empty")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigurationError(f"grid axis {axis!r}: non-numeric value {v!r}")
        ok = {
            "eta": v >= 0,
            "beta": v >= 0,
            "c": v > 0,
            "sigma": v > 0,
            "d": float(v).is_integer() and v >= 1,
            "reg": float(v).is_integer() and int(v) in REG_RANGE["omega" if method == "ms_svdd" else "psi"],
            "ds": float(v).is_integer() and int(v) in STRATEGIES,
        }[axis]
        if not ok or not math.isfinite(v):
            raise ConfigurationError(f"grid axis {axis!r}: value {v!r} outside its domain")


def resolve_grids(method: str, kernel: str, grids: Mapping[str, list] | None = None) -> dict[str, list]:
    """Default grids overridden by ``grids``; rejects axes the method does not use."""
    axes = method_axes(method, kernel)
    resolved = default_grids(method, kernel)
    for axis, values in (grids or {}).items():
        if axis not in AXES:
            raise ConfigurationError(f"unknown grid axis {axis!r}; known axes are {AXES}")
        if axis not in axes:
            raise ConfigurationError(f"grid axis {axis!r} does not apply to method {method!r} with {kernel} kernel")
        _validate_axis(axis, values, method)
        resolved[axis] = list(values)
    return resolved


def grid_expand(method: str, kernel: str = "linear", grids: Mapping[str, list] | None = None,
                max_iters: int = 100) -> list[HyperParams]:
    """Cartesian product over the method's axes, in canonical (eta, beta, C, sigma, d, r, ds) order."""
    g = resolve_grids(method, kernel, grids)
    axes = method_axes(method, kernel)
    family = "omega" if method == "ms_svdd" else "psi"
    points = []
    for combo in itertools.product(*(sorted(g[a]) for a in axes)):
        v = dict(zip(axes, combo))
        reg = None
        if "reg" in v:
            reg = RegularizationSpec(family, int(v["reg"]), float(v["beta"]))
        points.append(HyperParams(
            c=float(v["c"]),
            kernel=KernelSpec(kernel, float(v["sigma"]) if "sigma" in v else None),
            eta=float(v.get("eta", 0.0)),
            d=int(v["d"]) if "d" in v else None,
            reg=reg,
            ds=int(v["ds"]) if "ds" in v else None,
            max_iters=max_iters,
        ))
    return sorted(points, key=HyperParams.sort_key)


# --------------------------------------------------------------------------
# Cross-validation


@dataclass(frozen=True)
class FoldResult:
    fold: int
    chosen: HyperParams
    confusion: ConfusionMatrix
    inner_score: float
    n_train: int
    n_test: int

    def to_dict(self) -> dict:
        return {
            "fold": self.fold,
            "chosen": self.chosen.to_dict(),
            "confusion": self.confusion.to_dict(),
            "metrics": compute_metrics(self.confusion).to_dict(),
            "inner_mean_gm": self.inner_score,
            "n_train": self.n_train,
            "n_test": self.n_test,
        }


@dataclass(frozen=True)
class CVResult:
    method: str
    label: str
    target: str
    kernel: str
    plan: FoldPlan
    folds: tuple[FoldResult, ...]
    grid_size: int

    @property
    def pooled(self) -> ConfusionMatrix:
        total = self.folds[0].confusion
        for f in self.folds[1:]:
            total = total + f.confusion
        return total

    @property
    def pooled_metrics(self) -> MetricsReport:
        return compute_metrics(self.pooled)

    @property
    def macro_metrics(self) -> MetricsReport:
        return mean_metrics([compute_metrics(f.confusion) for f in self.folds])

    @property
    def reg_label(self) -> str:
        labels = [f.chosen.reg.label for f in self.folds if f.chosen.reg is not None]
        if not labels:
            return "-"
        counts = Counter(labels)
        best = max(counts.values())
        return sorted(l for l, c in counts.items() if c == best)[0]

    def report_row(self) -> "ReportRow":
        return ReportRow(self.label, self.target, self.kernel, self.reg_label, self.pooled)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "label": self.label,
            "target": self.target,
            "kernel": self.kernel,
            "regularization": self.reg_label,
            "grid_size": self.grid_size,
            "folds": [f.to_dict() for f in self.folds],
            "pooled_confusion": self.pooled.to_dict(),
            "pooled_metrics": self.pooled_metrics.to_dict(),
            "macro_metrics": self.macro_metrics.to_dict(),
        }


def _gm(truth, pred) -> float:
    return compute_metrics(confusion_from_predictions(truth, pred)).gm


def score_grid(
    data: MultiViewDataset,
    inner_plan: FoldPlan,
    method: str,
    grid: Sequence[HyperParams],
    standardize: bool = False,
    seed: int = 0,
) -> np.ndarray:
    """Mean inner-fold GM for each grid point; -inf marks points infeasible on some fold.

    Grid points that differ only in ds (or in beta with regularisation off)
    share one trained model per fold.
    """
    keys = [hp.training_key() for hp in grid]
    unique: dict[tuple, HyperParams] = {}
    for k, hp in zip(keys, grid):
        unique.setdefault(k, hp)
    totals = np.zeros(len(grid))
    skipped: dict[tuple, str] = {}
    for fold in range(inner_plan.k):
        train, test = split_target_only(data, inner_plan, fold)
        truth = test.is_target
        fold_scores: dict[tuple, dict | float | None] = {}
        for k, hp in unique.items():
            try:
                model = fit_model(method, train, hp, standardize=standardize, seed=seed)
            except (InfeasibleError, DegenerateKernelError) as exc:
                skipped.setdefault(k, str(exc))
                fold_scores[k] = None
                continue
            if method == "ms_svdd":
                fold_scores[k] = {s: _gm(truth, p) for s, p in predict_strategies(model, test).items()}
            else:
                fold_scores[k] = _gm(truth, predict(model, test))
        for idx, (k, hp) in enumerate(zip(keys, grid)):
            sc = fold_scores[k]
            if sc is None:
                totals[idx] = -np.inf
            elif isinstance(sc, dict):
                totals[idx] += sc[hp.ds or 1]
            else:
                totals[idx] += sc
    if skipped:
        log.warning("skipping %d infeasible grid point(s), e.g. %s", len(skipped), next(iter(skipped.values())))
    return totals / inner_plan.k


def select_best(scores: np.ndarray, grid: Sequence[HyperParams]) -> int:
    """Index of the highest score; ties go to the earliest point in canonical order."""
    order = sorted(range(len(grid)), key=lambda i: grid[i].sort_key())
    best = None
    for i in order:
        if scores[i] == -np.inf:
            continue
        if best is None or scores[i] > scores[best]:
            best = i
    if best is None:
        raise ProtocolError("no feasible grid point (e.g. every C < 1/N)")
    return best


def _outer_fold(args):
    ds, method, grid, groups, plan, fold, k_inner, seed, standardize = args
    train_all = ds.subset(plan.train_index(fold))
    test = ds.subset(plan.test_index(fold))
    train_targets = train_all.subset(np.flatnonzero(train_all.is_target))
    inner_plan = stratified_folds(train_all, k_inner, derive_seed(seed, fold))
    scores = score_grid(train_all, inner_plan, method, grid, standardize, seed)
    out = []
    for members in groups:
        sub = [grid[i] for i in members]
        best = members[select_best(scores[members], sub)]
        hp = grid[best]
        model = fit_model(method, train_targets, hp, standardize=standardize, seed=seed)
        pred = predict(model, test, hp.ds)
        cm = confusion_from_predictions(test.is_target, pred, ds.target_class)
        out.append(FoldResult(fold, hp, cm, float(scores[best]), train_targets.n_samples, test.n_samples))
    return out


def _run_cv(ds, method, grid, groups, labels, k_outer, k_inner, seed, standardize, jobs) -> list[CVResult]:
    if not grid:
        raise ConfigurationError("grid is empty")
    if method == "ms_svdd" and ds.n_views < 2:
        raise ConfigurationError("ms_svdd requires >= 2 views")
    plan = stratified_folds(ds, k_outer, seed)
    tasks = [(ds, method, grid, groups, plan, f, k_inner, seed, standardize) for f in range(k_outer)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_fold = list(pool.map(_outer_fold, tasks))
    else:
        per_fold = [_outer_fold(t) for t in tasks]
    kernel = grid[0].kernel.kind
    return [
        CVResult(method, labels[g], ds.target_class, kernel, plan,
                 tuple(pf[g] for pf in per_fold), len(groups[g]))
        for g in range(len(groups))
    ]


def cross_validate(
    ds: MultiViewDataset,
    method: str,
    grid: Sequence[HyperParams],
    k_outer: int = 5,
    k_inner: int = 10,
    seed: int = 0,
    standardize: bool = False,
    jobs: int = 1,
) -> CVResult:
    """Outer stratified k_outer-fold CV; inside each outer fold a stratified
    k_inner-fold search picks the grid point with the best mean GM, which is
    refit on all outer-train targets and scored on the outer test fold."""
    grid = sorted(grid, key=HyperParams.sort_key)
    return _run_cv(ds, method, grid, [list(range(len(grid)))], [method], k_outer, k_inner, seed, standardize, jobs)[0]


def cross_validate_strategies(
    ds: MultiViewDataset,
    grid: Sequence[HyperParams],
    k_outer: int = 5,
    k_inner: int = 10,
    seed: int = 0,
    standardize: bool = False,
    jobs: int = 1,
) -> dict[int, CVResult]:
    """MS-SVDD CV with a separate selection per decision strategy (one report row each)."""
    grid = sorted(grid, key=HyperParams.sort_key)
    strategies = sorted({hp.ds or 1 for hp in grid})
    groups = [[i for i, hp in enumerate(grid) if (hp.ds or 1) == s] for s in strategies]
    labels = [f"ms_svdd_ds{s}" for s in strategies]
    results = _run_cv(ds, "ms_svdd", grid, groups, labels, k_outer, k_inner, seed, standardize, jobs)
    return dict(zip(strategies, results))


# --------------------------------------------------------------------------
# Reporting


@dataclass(frozen=True)
class ReportRow:
    method: str
    target: str
    kernel: str
    reg: str
    confusion: ConfusionMatrix
    extra: dict = field(default_factory=dict)


HEADER = ("method", "target", "kernel", "reg", "Sen", "Spe", "Pre", "F1", "Acc", "GM")


def render_report(results: Iterable[CVResult | ReportRow], title: str | None = None) -> tuple[str, dict]:
    """Plain-text table (percentages, 2 decimals) plus a JSON-ready document."""
    rows = [r.report_row() if isinstance(r, CVResult) else r for r in results]
    widths = (18, 10, 7, 7) + (7,) * 6
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(w) if i < 4 else h.rjust(w) for i, (h, w) in enumerate(zip(HEADER, widths))))
    lines.append("-" * len(lines[-1]))
    doc_rows = []
    for row in rows:
        m = compute_metrics(row.confusion)
        cells = [row.method, row.target, row.kernel, row.reg] + [f"{x:.2f}" for x in m.as_tuple()]
        lines.append("  ".join(c.ljust(w) if i < 4 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))))
        doc_rows.append({
            "method": row.method,
            "target": row.target,
            "kernel": row.kernel,
            "regularization": row.reg,
            "confusion": row.confusion.to_dict(),
            "metrics": m.to_dict(),
            **row.extra,
        })
    return "\n".join(lines) + "\n", {"rows": doc_rows}
