"""One fit/predict surface over every one-class method in the package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .dataset import MultiViewDataset, Standardizer
from .errors import ParameterError, ShapeError
from .kernels import gram_matrix
from .solvers import OcsvmModel, SvddModel, accept_mask, nu_from_c, ocsvm_decision_kernel, solve_ocsvm, solve_svdd, svdd_decision
from .subspace import (
    SUBSPACE_METHODS,
    HyperParams,
    SubspaceModel,
    combine_decisions,
    subspace_decision_values,
    train_subspace,
)

METHODS = ("svdd", "ocsvm", "s_svdd", "es_svdd", "ms_svdd")
Estimator = Union[SvddModel, OcsvmModel, SubspaceModel]


@dataclass(frozen=True)
class TrainedModel:
    method: str
    hparams: HyperParams
    target_class: str
    estimator: Estimator
    feature_dims: tuple[int, ...]
    standardizer: Standardizer | None = None

    @property
    def n_views(self) -> int:
        return len(self.feature_dims)


def _view_arrays(ds: MultiViewDataset, standardizer: Standardizer | None) -> list[np.ndarray]:
    arrays = [v.features for v in ds.views]
    return standardizer.transform_views(arrays) if standardizer is not None else arrays


def fit_model(
    method: str,
    train: MultiViewDataset,
    hp: HyperParams,
    standardize: bool = False,
    seed: int = 0,
) -> TrainedModel:
    """Train ``method`` on the target-class samples of ``train`` (others are ignored)."""
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; choose from {METHODS}")
    if method == "ms_svdd" and train.n_views < 2:
        raise ParameterError("ms_svdd requires >= 2 views")
    targets = train.subset(np.flatnonzero(train.is_target))
    scaler = Standardizer.fit(targets) if standardize else None
    arrays = _view_arrays(targets, scaler)
    dims = tuple(v.feature_dim for v in train.views)

    if method in SUBSPACE_METHODS:
        data = arrays if method == "ms_svdd" else [np.vstack(arrays)]
        est: Estimator = train_subspace(method, data, hp, seed=seed)
    else:
        X = np.vstack(arrays)
        if method == "svdd":
            est = solve_svdd(X, hp.c, kernel=hp.kernel)
        else:
            K = gram_matrix(X, X, hp.kernel)
            est = solve_ocsvm(K, nu_from_c(hp.c, X.shape[1]), train_points=X, kernel=hp.kernel)
    return TrainedModel(method, hp, train.target_class, est, dims, scaler)


def decision_values(model: TrainedModel, ds: MultiViewDataset) -> np.ndarray:
    """Signed decision values (positive = target); shape V x M for ms_svdd, 1 x M otherwise."""
    dims = tuple(v.feature_dim for v in ds.views)
    if dims != model.feature_dims:
        raise ShapeError(f"model expects view dimensions {model.feature_dims}, data has {dims}")
    arrays = _view_arrays(ds, model.standardizer)
    est = model.estimator
    if isinstance(est, SubspaceModel):
        data = arrays if model.method == "ms_svdd" else [np.vstack(arrays)]
        return subspace_decision_values(est, data)
    X = np.vstack(arrays)
    if isinstance(est, SvddModel):
        return np.atleast_2d(svdd_decision(est, X))
    return np.atleast_2d(ocsvm_decision_kernel(est, gram_matrix(est.train_points, X, est.kernel)))


def _scale(model: TrainedModel) -> float:
    est = model.estimator
    if isinstance(est, SubspaceModel):
        return est.inner.radius_sq
    return est.radius_sq if isinstance(est, SvddModel) else est.rho


def accepted(model: TrainedModel, ds: MultiViewDataset) -> np.ndarray:
    """Per-modality target flags (V x M, or 1 x M)."""
    return accept_mask(decision_values(model, ds), _scale(model))


def predict(model: TrainedModel, ds: MultiViewDataset, strategy: int | None = None) -> np.ndarray:
    """Boolean target flags; ``strategy`` overrides the model's ds for ms_svdd."""
    accept = accepted(model, ds)
    if model.method == "ms_svdd":
        return combine_decisions(accept, strategy or model.hparams.ds or 1)
    return accept[0]


def predict_strategies(model: TrainedModel, ds: MultiViewDataset, strategies=(1, 2, 3, 4)) -> dict[int, np.ndarray]:
    accept = accepted(model, ds)
    return {s: combine_decisions(accept, s) for s in strategies}
