"""Multi-modal one-class classification with subspace SVDD variants."""

from .dataset import (
    FoldPlan,
    ModalityView,
    MultiViewDataset,
    load_multiview_csv,
    split_target_only,
    stratified_folds,
    write_multiview_csv,
)
from .evaluation import (
    ConfusionMatrix,
    MetricsReport,
    compute_metrics,
    cross_validate,
    cross_validate_strategies,
    grid_expand,
)
from .kernels import KernelSpec, gram_matrix, npt_embed, npt_map
from .models import METHODS, TrainedModel, decision_values, fit_model, predict
from .solvers import solve_ocsvm, solve_svdd, svdd_decision
from .subspace import HyperParams, RegularizationSpec, train_subspace

__version__ = "0.1.0"

__all__ = [
    "ConfusionMatrix", "FoldPlan", "HyperParams", "KernelSpec", "METHODS", "MetricsReport",
    "ModalityView", "MultiViewDataset", "RegularizationSpec", "TrainedModel", "compute_metrics",
    "cross_validate", "cross_validate_strategies", "decision_values", "fit_model", "gram_matrix",
    "grid_expand", "load_multiview_csv", "npt_embed", "npt_map", "predict", "solve_ocsvm",
    "solve_svdd", "split_target_only", "stratified_folds", "svdd_decision", "train_subspace",
    "write_multiview_csv",
]
