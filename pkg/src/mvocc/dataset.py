"""Multi-view labelled feature data, CSV ingestion and stratified fold plans."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    AlignmentError,
    ConfigurationError,
    ParseError,
    SplitError,
    StratificationError,
)
from .prng import Xorshift64Star


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModalityView:
    """One modality: features is D_v x N, one column per sample."""

    modality_id: int
    features: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        if f.ndim != 2 or f.shape[0] < 1 or f.shape[1] < 1:
            raise ValueError(f"view {self.modality_id}: features must be a non-empty D x N matrix, got shape {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"view {self.modality_id}: non-finite feature values")
        object.__setattr__(self, "features", _frozen(f))
        names = tuple(self.feature_names) or tuple(f"f{j}" for j in range(f.shape[0]))
        if len(names) != f.shape[0]:
            raise ValueError("feature_names length must equal feature_dim")
        object.__setattr__(self, "feature_names", names)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class MultiViewDataset:
    views: tuple[ModalityView, ...]
    labels: np.ndarray
    subject_ids: np.ndarray
    target_class: str

    def __post_init__(self):
        views = tuple(self.views)
        if not views:
            raise ValueError("dataset needs at least one view")
        n = views[0].n_samples
        if any(v.n_samples != n for v in views):
            raise ValueError("all views must have the same number of samples")
        labels = np.asarray([str(x) for x in self.labels], dtype=object)
        ids = np.asarray([str(x) for x in self.subject_ids], dtype=object)
        if len(labels) != n or len(ids) != n:
            raise ValueError("labels and subject_ids must have one entry per sample")
        if len(set(ids.tolist())) != n:
            raise ValueError("subject_ids must be unique")
        classes = set(labels.tolist())
        if len(classes) > 2:
            raise ValueError(f"at most two classes supported, got {sorted(classes)}")
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "subject_ids", _frozen(ids))

    @property
    def n_samples(self) -> int:
        return self.views[0].n_samples

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.labels.tolist()))

    @property
    def is_target(self) -> np.ndarray:
        return self.labels == self.target_class

    def subset(self, index: Sequence[int] | np.ndarray) -> "MultiViewDataset":
        idx = np.asarray(index, dtype=int)
        if len(idx) == 0:
            raise SplitError("cannot build an empty dataset")
        views = tuple(ModalityView(v.modality_id, v.features[:, idx], v.feature_names) for v in self.views)
        return MultiViewDataset(views, self.labels[idx], self.subject_ids[idx], self.target_class)

    def with_target(self, target: str) -> "MultiViewDataset":
        return MultiViewDataset(self.views, self.labels, self.subject_ids, target)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "assignments", _frozen(np.asarray(self.assignments, dtype=int)))

    def test_index(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_index(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "assignments": self.assignments.tolist()}


def load_multiview_csv(
    paths: Sequence[str | Path],
    label_column: str = "label",
    target: str = "MI",
    require_target: bool = True,
) -> MultiViewDataset:
    """Read one CSV per modality and align rows on ``subject_id``.

    Row order follows the first file. Every column other than ``subject_id``
    and the label column is a numeric feature. With ``require_target`` off,
    a file holding no target-class rows is accepted (useful for scoring).
    """
    if not paths:
        raise ConfigurationError("at least one input file is required")
    tables = []
    for p in paths:
        p = Path(p)
        if not p.is_file():
            raise ConfigurationError(f"input file not found: {p}")
        with p.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ParseError(f"{p}: empty file")
        header = [h.strip() for h in rows[0]]
        if "subject_id" not in header:
            raise ParseError(f"{p}: missing required column 'subject_id'")
        body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
        if not body:
            raise ParseError(f"{p}: no data rows")
        tables.append((p, header, body))

    label_map: dict[str, str] = {}
    views = []
    ids_first: list[str] | None = None
    for vid, (p, header, body) in enumerate(tables, start=1):
        sid_col = header.index("subject_id")
        lab_col = header.index(label_column) if label_column in header else None
        feat_cols = [j for j, h in enumerate(header) if j not in (sid_col, lab_col)]
        if not feat_cols:
            raise ParseError(f"{p}: no feature columns")
        by_id: dict[str, np.ndarray] = {}
        order = []
        for r_no, row in enumerate(body, start=2):
            if len(row) != len(header):
                raise ParseError(f"{p}: row {r_no} has {len(row)} cells, header has {len(header)}")
            sid = row[sid_col].strip()
            if sid in by_id:
                raise ParseError(f"{p}: duplicate subject_id {sid!r} at row {r_no}")
            vals = np.empty(len(feat_cols))
            for k, j in enumerate(feat_cols):
                cell = row[j].strip()
                try:
                    vals[k] = float(cell)
                except ValueError:
                    raise ParseError(f"{p}: non-numeric value {cell!r} at row {r_no}, column {header[j]!r}") from None
                if not math.isfinite(vals[k]):
                    raise ParseError(f"{p}: non-finite value at row {r_no}, column {header[j]!r}")
            by_id[sid] = vals
            order.append(sid)
            if lab_col is not None:
                lab = row[lab_col].strip()
                if sid in label_map and label_map[sid] != lab:
                    raise ParseError(f"{p}: label of {sid!r} disagrees with an earlier file")
                label_map[sid] = lab
        if ids_first is None:
            ids_first = order
        else:
            missing = sorted(set(ids_first) - set(by_id))
            extra = sorted(set(by_id) - set(ids_first))
            if missing or extra:
                raise AlignmentError(
                    f"{p}: subject sets differ from first file; missing {missing[:10]}, unexpected {extra[:10]}"
                )
        feats = np.column_stack([by_id[s] for s in ids_first])
        views.append(ModalityView(vid, feats, tuple(header[j] for j in feat_cols)))

    if not label_map:
        raise ParseError(f"label column {label_column!r} not found in any input file")
    labels = [label_map[s] for s in ids_first]
    if require_target and target not in set(labels):
        raise ConfigurationError(f"unknown target class {target!r}; labels are {sorted(set(labels))}")
    return MultiViewDataset(tuple(views), np.array(labels, dtype=object), np.array(ids_first, dtype=object), target)


def write_multiview_csv(ds: MultiViewDataset, paths: Sequence[str | Path], label_column: str = "label") -> None:
    """Inverse of ``load_multiview_csv``; the label column goes into every file."""
    if len(paths) != ds.n_views:
        raise ValueError("need one path per view")
    for view, p in zip(ds.views, paths):
        with Path(p).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["subject_id", label_column, *view.feature_names])
            for i in range(ds.n_samples):
                w.writerow([ds.subject_ids[i], ds.labels[i], *(repr(float(x)) for x in view.features[:, i])])


def concatenate_views(ds: MultiViewDataset) -> MultiViewDataset:
    """Stack modality blocks row-wise into a single view, F = [F1; F2; ...]."""
    if ds.n_views == 1:
        return ds
    feats = np.vstack([v.features for v in ds.views])
    names = tuple(f"v{v.modality_id}_{n}" for v in ds.views for n in v.feature_names)
    return MultiViewDataset((ModalityView(1, feats, names),), ds.labels, ds.subject_ids, ds.target_class)


def stratified_folds(ds: MultiViewDataset, k: int, seed: int) -> FoldPlan:
    """Deterministic stratified k-fold plan.

    Each class (sorted label order) is shuffled with its own derived stream,
    then dealt round-robin with a fold pointer that carries over from one
    class to the next, so class remainders land on different folds and fold
    sizes stay within one of each other.
    """
    if k < 2:
        raise StratificationError(f"k must be >= 2, got {k}")
    classes = ds.classes
    if len(classes) != 2:
        raise StratificationError(f"stratification needs exactly two classes, got {classes}")
    assignments = np.full(ds.n_samples, -1, dtype=int)
    rng = Xorshift64Star(seed)
    pointer = 0
    for ci, cls in enumerate(classes):
        members = np.flatnonzero(ds.labels == cls).tolist()
        if len(members) < k:
            raise StratificationError(f"class {cls!r} has {len(members)} samples, fewer than k={k}")
        rng.spawn(ci).shuffle(members)
        for idx in members:
            assignments[idx] = pointer
            pointer = (pointer + 1) % k
    return FoldPlan(k, assignments, seed)


def split_target_only(ds: MultiViewDataset, plan: FoldPlan, test_fold: int) -> tuple[MultiViewDataset, MultiViewDataset]:
    """Train on target-class samples outside ``test_fold``; test on everything inside it."""
    if not 0 <= test_fold < plan.k:
        raise SplitError(f"test_fold {test_fold} outside [0, {plan.k})")
    in_test = plan.assignments == test_fold
    train_idx = np.flatnonzero(~in_test & ds.is_target)
    test_idx = np.flatnonzero(in_test)
    if len(train_idx) == 0:
        raise SplitError(f"fold {test_fold}: no target-class samples left for training")
    if len(test_idx) == 0:
        raise SplitError(f"fold {test_fold}: empty test fold")
    return ds.subset(train_idx), ds.subset(test_idx)


@dataclass(frozen=True)
class Standardizer:
    """Per-feature z-scoring fitted on training targets only (opt-in)."""

    means: tuple[np.ndarray, ...]
    scales: tuple[np.ndarray, ...] = field(default=())

    @classmethod
    def fit(cls, ds: MultiViewDataset) -> "Standardizer":
        means, scales = [], []
        for v in ds.views:
            mu = v.features.mean(axis=1)
            sd = v.features.std(axis=1)
            sd = np.where(sd > 1e-12, sd, 1.0)
            means.append(mu)
            scales.append(sd)
        return cls(tuple(means), tuple(scales))

    def transform_views(self, features: Sequence[np.ndarray]) -> list[np.ndarray]:
        return [(f - m[:, None]) / s[:, None] for f, m, s in zip(features, self.means, self.scales)]
