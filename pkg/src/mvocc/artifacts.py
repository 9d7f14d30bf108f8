"""Versioned JSON documents for trained models.

Matrices are stored as ``{"shape": [...], "data": [...]}`` with row-major
data; floats go through ``repr`` so a load/save round trip is exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dataset import Standardizer
from .errors import ConfigurationError
from .kernels import KernelSpec, NptEmbedding
from .models import TrainedModel
from .solvers import OcsvmModel, SvddModel
from .subspace import HyperParams, ProjectionMatrix, SubspaceModel

FORMAT = "mvocc-model"
VERSION = 1


def _mat(a) -> dict | None:
    if a is None:
        return None
    a = np.asarray(a, dtype=float)
    return {"shape": list(a.shape), "data": a.ravel().tolist()}


def _unmat(doc) -> np.ndarray | None:
    if doc is None:
        return None
    return np.asarray(doc["data"], dtype=float).reshape(doc["shape"])


def _kernel(doc) -> KernelSpec | None:
    return None if doc is None else KernelSpec(doc["kind"], doc.get("sigma"))


def _svdd_to(m: SvddModel) -> dict:
    return {
        "alphas": _mat(m.alphas),
        "C": m.C,
        "radius_sq": m.radius_sq,
        "center": _mat(m.center_coords),
        "slacks": _mat(m.slacks),
        "center_norm_sq": m.center_norm_sq,
        "train_points": _mat(m.train_points),
        "kernel": None if m.kernel is None else m.kernel.to_dict(),
        "dual_objective": m.dual_objective,
    }


def _svdd_from(d: dict) -> SvddModel:
    alphas = _unmat(d["alphas"])
    return SvddModel(
        alphas=alphas,
        C=d["C"],
        radius_sq=d["radius_sq"],
        center_coords=_unmat(d["center"]),
        support_index=np.flatnonzero(alphas > 1e-8),
        slacks=_unmat(d["slacks"]),
        center_norm_sq=d["center_norm_sq"],
        train_points=_unmat(d["train_points"]),
        kernel=_kernel(d["kernel"]),
        dual_objective=d.get("dual_objective", 0.0),
    )


def _emb_to(e: NptEmbedding | None) -> dict | None:
    if e is None:
        return None
    return {
        "train_refs": _mat(e.train_refs),
        "eigvecs": _mat(e.eigvecs),
        "eigvals": _mat(e.eigvals),
        "row_means": _mat(e.row_means),
        "grand_mean": e.grand_mean,
    }


def _emb_from(d: dict | None) -> NptEmbedding | None:
    if d is None:
        return None
    return NptEmbedding(_unmat(d["train_refs"]), _unmat(d["eigvecs"]), _unmat(d["eigvals"]),
                        _unmat(d["row_means"]), d["grand_mean"])


def model_to_dict(model: TrainedModel, label_column: str = "label") -> dict:
    est = model.estimator
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "method": model.method,
        "target_class": model.target_class,
        "label_column": label_column,
        "feature_dims": list(model.feature_dims),
        "hparams": model.hparams.to_dict(),
        "standardizer": None if model.standardizer is None else {
            "means": [_mat(m) for m in model.standardizer.means],
            "scales": [_mat(s) for s in model.standardizer.scales],
        },
    }
    if isinstance(est, SubspaceModel):
        doc["estimator"] = {
            "kind": "subspace",
            "projections": [{"modality_id": p.modality_id, "q": _mat(p.q)} for p in est.projections],
            "inner": _svdd_to(est.inner),
            "whitener": _mat(est.whitener),
            "embeddings": [_emb_to(e) for e in est.embeddings],
            "loss_trace": list(est.loss_trace),
            "iterations": est.iterations,
        }
    elif isinstance(est, SvddModel):
        doc["estimator"] = {"kind": "svdd", **_svdd_to(est)}
    else:
        doc["estimator"] = {
            "kind": "ocsvm",
            "alphas": _mat(est.alphas),
            "rho": est.rho,
            "nu": est.nu,
            "train_points": _mat(est.train_points),
            "kernel": None if est.kernel is None else est.kernel.to_dict(),
        }
    return doc


def model_from_dict(doc: dict) -> TrainedModel:
    if doc.get("format") != FORMAT:
        raise ConfigurationError("not a model artifact (format tag missing)")
    if doc.get("version") != VERSION:
        raise ConfigurationError(f"unsupported model artifact version {doc.get('version')}")
    hp = HyperParams.from_dict(doc["hparams"])
    e = doc["estimator"]
    kind = e["kind"]
    expected = {"svdd": "svdd", "ocsvm": "ocsvm"}.get(doc["method"], "subspace")
    if kind != expected:
        raise ConfigurationError(f"artifact method {doc['method']!r} does not match estimator kind {kind!r}")
    if kind == "subspace":
        est = SubspaceModel(
            method=doc["method"],
            projections=tuple(ProjectionMatrix(_unmat(p["q"]), p["modality_id"]) for p in e["projections"]),
            inner=_svdd_from(e["inner"]),
            hparams=hp,
            whitener=_unmat(e["whitener"]),
            embeddings=tuple(_emb_from(x) for x in e["embeddings"]),
            loss_trace=tuple(e.get("loss_trace", ())),
            iterations=e.get("iterations", 0),
        )
    elif kind == "svdd":
        est = _svdd_from(e)
    else:
        est = OcsvmModel(_unmat(e["alphas"]), e["rho"], e["nu"], _unmat(e["train_points"]), _kernel(e["kernel"]))
    scaler = None
    if doc.get("standardizer"):
        s = doc["standardizer"]
        scaler = Standardizer(tuple(_unmat(m) for m in s["means"]), tuple(_unmat(x) for x in s["scales"]))
    return TrainedModel(doc["method"], hp, doc["target_class"], est, tuple(doc["feature_dims"]), scaler)


def save_model(model: TrainedModel, path: str | Path, label_column: str = "label") -> None:
    Path(path).write_text(json.dumps(model_to_dict(model, label_column), indent=1) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> tuple[TrainedModel, dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read model artifact {path}: {exc}") from None
    return model_from_dict(doc), doc
