"""Subspace SVDD family: S-SVDD, ES-SVDD and multi-modal MS-SVDD.

Each modality v has a projection Q_v (d x D_v) with orthonormal rows. The
projected training targets of all modalities are pooled into one SVDD; the
projections are then moved down the gradient of that SVDD's Lagrangian,

    L = sum_{v,i} a_vi |z_vi|^2 - |sum_{v,i} a_vi z_vi|^2 + beta * reg,
    z_vi = W_v Q_v f_vi,

with the dual weights a held fixed, and re-orthonormalised. W_v is the
identity except for ES-SVDD, where it whitens the projected training data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dataset import MultiViewDataset, concatenate_views
from .errors import ContractError, DivergenceError, InfeasibleError, ParameterError, ShapeError
from .kernels import KernelSpec, NptEmbedding, gram_matrix, npt_embed, npt_map
from .prng import Xorshift64Star
from .solvers import ALPHA_TOL, SvddModel, accept_mask, solve_svdd

SUBSPACE_METHODS = ("s_svdd", "es_svdd", "ms_svdd")
STRATEGIES = (1, 2, 3, 4)
STRATEGY_NAMES = {1: "AND", 2: "OR", 3: "view 1 only", 4: "view 2 only"}
REG_RANGE = {"psi": range(0, 4), "omega": range(0, 7)}
WHITEN_RIDGE = 1e-12
MAX_HALVINGS = 5


@dataclass(frozen=True)
class RegularizationSpec:
    """psi0-psi3 (uni-modal) or omega0-omega6 (multi-modal); index 0 disables the term.

    Selector per sample: 1/4 -> all ones, 2/5 -> alpha on boundary support
    vectors (0 < alpha < C), 3/6 -> alpha.  Indices 1-3 sum the per-modality
    terms |Z_v lam_v|^2; 4-6 couple modalities as |sum_v Z_v lam_v|^2.
    """

    family: str = "psi"
    index: int = 0
    beta: float = 0.0

    def __post_init__(self):
        if self.family not in REG_RANGE:
            raise ParameterError(f"unknown regularization family {self.family!r}")
        if self.index not in REG_RANGE[self.family]:
            raise ParameterError(f"{self.family}{self.index} out of range")
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ParameterError(f"beta must be finite and >= 0, got {self.beta}")

    @property
    def label(self) -> str:
        return f"{self.family}{self.index}"

    @property
    def selector(self) -> str | None:
        if self.index == 0:
            return None
        return ("ones", "boundary_alpha", "alpha")[(self.index - 1) % 3]

    @property
    def coupled(self) -> bool:
        return self.index >= 4


@dataclass(frozen=True)
class HyperParams:
    """One grid point. Fields irrelevant to a method are left at their defaults."""

    c: float
    kernel: KernelSpec = field(default_factory=KernelSpec)
    eta: float = 0.0
    d: int | None = None
    reg: RegularizationSpec | None = None
    ds: int | None = None
    max_iters: int = 100

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ParameterError(f"C must be positive, got {self.c}")
        if self.eta < 0:
            raise ParameterError(f"eta must be >= 0, got {self.eta}")
        if self.d is not None and self.d < 1:
            raise ParameterError(f"d must be >= 1, got {self.d}")
        if self.ds is not None and self.ds not in STRATEGIES:
            raise ParameterError(f"decision strategy must be one of {STRATEGIES}, got {self.ds}")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")

    @property
    def beta(self) -> float:
        return self.reg.beta if self.reg is not None else 0.0

    @property
    def sigma(self) -> float | None:
        return self.kernel.sigma

    def sort_key(self) -> tuple:
        """Canonical order (eta, beta, C, sigma, d, r, ds)."""
        return (
            self.eta,
            self.beta,
            self.c,
            self.kernel.sigma or 0.0,
            self.d or 0,
            self.reg.index if self.reg else 0,
            self.ds or 0,
        )

    def training_key(self) -> tuple:
        """Hyperparameters that change the trained model (ds and a disabled beta do not)."""
        reg = None
        if self.reg is not None:
            reg = (self.reg.family, self.reg.index, self.reg.beta if self.reg.index else 0.0)
        return (self.c, self.kernel.kind, self.kernel.sigma, self.eta, self.d, reg, self.max_iters)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "kernel": self.kernel.kind,
            "sigma": self.kernel.sigma,
            "eta": self.eta,
            "beta": self.beta,
            "d": self.d,
            "reg": self.reg.label if self.reg else None,
            "ds": self.ds,
            "max_iters": self.max_iters,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HyperParams":
        reg = None
        if doc.get("reg"):
            label = doc["reg"]
            fam = "omega" if label.startswith("omega") else "psi"
            reg = RegularizationSpec(fam, int(label[len(fam):]), float(doc.get("beta") or 0.0))
        return cls(
            c=float(doc["c"]),
            kernel=KernelSpec(doc.get("kernel", "linear"), doc.get("sigma")),
            eta=float(doc.get("eta") or 0.0),
            d=doc.get("d"),
            reg=reg,
            ds=doc.get("ds"),
            max_iters=int(doc.get("max_iters", 100)),
        )


@dataclass(frozen=True)
class ProjectionMatrix:
    q: np.ndarray
    modality_id: int

    @property
    def d(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class SubspaceModel:
    method: str
    projections: tuple[ProjectionMatrix, ...]
    inner: SvddModel
    hparams: HyperParams
    whitener: np.ndarray | None = None
    embeddings: tuple[NptEmbedding | None, ...] = ()
    loss_trace: tuple[float, ...] = ()
    iterations: int = 0

    @property
    def decision_strategy(self) -> int | None:
        return self.hparams.ds if self.method == "ms_svdd" else None


# --------------------------------------------------------------------------
# Lagrangian and regularisation


def _split(alphas: np.ndarray, sizes: Sequence[int]) -> list[np.ndarray]:
    return np.split(np.asarray(alphas, dtype=float), np.cumsum(sizes)[:-1])


def _check_simplex(alphas_v: Sequence[np.ndarray]):
    total = sum(float(a.sum()) for a in alphas_v)
    if abs(total - 1.0) > 1e-6 or any(np.any(a < -1e-12) for a in alphas_v):
        raise ContractError(f"dual weights must lie on the simplex (sum={total:.6g})")


def selectors(alphas_v: Sequence[np.ndarray], spec: RegularizationSpec, C: float = np.inf) -> list[np.ndarray]:
    kind = spec.selector
    if kind == "ones":
        return [np.ones_like(a) for a in alphas_v]
    if kind == "alpha":
        return [np.asarray(a, dtype=float) for a in alphas_v]
    if kind == "boundary_alpha":
        return [np.where((a > ALPHA_TOL) & (a < C - ALPHA_TOL), a, 0.0) for a in alphas_v]
    return [np.zeros_like(a) for a in alphas_v]


def _effective(Qs, whiteners):
    if whiteners is None:
        return list(Qs)
    return [Q if W is None else W @ Q for Q, W in zip(Qs, whiteners)]


def reg_term(
    Qs: Sequence[np.ndarray],
    Fs: Sequence[np.ndarray],
    alphas_v: Sequence[np.ndarray],
    spec: RegularizationSpec | None,
    C: float = np.inf,
    whiteners: Sequence[np.ndarray | None] | None = None,
) -> tuple[float, list[np.ndarray]]:
    """Unweighted regulariser value and its gradients w.r.t. each Q_v (beta not applied)."""
    zeros = [np.zeros_like(Q, dtype=float) for Q in Qs]
    if spec is None or spec.index == 0:
        return 0.0, zeros
    lams = selectors(alphas_v, spec, C)
    Ps = _effective(Qs, whiteners)
    Flam = [F @ lam for F, lam in zip(Fs, lams)]
    s_v = [P @ fl for P, fl in zip(Ps, Flam)]
    if spec.coupled:
        s = np.sum(s_v, axis=0)
        value = float(s @ s)
        gP = [2.0 * np.outer(s, fl) for fl in Flam]
    else:
        value = float(sum(x @ x for x in s_v))
        gP = [2.0 * np.outer(x, fl) for x, fl in zip(s_v, Flam)]
    return value, _pull_back(gP, whiteners)


def _pull_back(gP, whiteners):
    if whiteners is None:
        return gP
    return [g if W is None else W.T @ g for g, W in zip(gP, whiteners)]


def lagrangian_value(Qs, Fs, alphas_v, reg=None, C=np.inf, whiteners=None) -> float:
    Ps = _effective(Qs, whiteners)
    Zs = [P @ F for P, F in zip(Ps, Fs)]
    data = sum(float(np.einsum("ij,ij->j", Z, Z) @ a) for Z, a in zip(Zs, alphas_v))
    center = np.sum([Z @ a for Z, a in zip(Zs, alphas_v)], axis=0)
    value = data - float(center @ center)
    if reg is not None and reg.index:
        value += reg.beta * reg_term(Qs, Fs, alphas_v, reg, C, whiteners)[0]
    return value


def lagrangian_gradient(Qs, Fs, alphas_v, reg=None, C=np.inf, whiteners=None) -> list[np.ndarray]:
    """dL/dQ_v for every modality, dual weights (and whiteners) held fixed."""
    if len(Qs) != len(Fs) or len(Fs) != len(alphas_v):
        raise ShapeError("Qs, Fs and alphas must have one entry per modality")
    _check_simplex(alphas_v)
    Ps = _effective(Qs, whiteners)
    Zs = [P @ F for P, F in zip(Ps, Fs)]
    center = np.sum([Z @ a for Z, a in zip(Zs, alphas_v)], axis=0)
    gP = [
        2.0 * (Z * a) @ F.T - 2.0 * np.outer(center, F @ a)
        for Z, F, a in zip(Zs, Fs, alphas_v)
    ]
    grads = _pull_back(gP, whiteners)
    if reg is not None and reg.index and reg.beta:
        _, rg = reg_term(Qs, Fs, alphas_v, reg, C, whiteners)
        grads = [g + reg.beta * r for g, r in zip(grads, rg)]
    return grads


# --------------------------------------------------------------------------
# Projection helpers


def orthonormalize_rows(Q: np.ndarray) -> np.ndarray:
    """QR of Q^T with signs fixed so diag(R) > 0; returns rows spanning the same space."""
    U, R = np.linalg.qr(Q.T)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return (U * signs).T


def init_projection(F: np.ndarray, d: int, seed: int = 0) -> np.ndarray:
    """Top-d principal directions of the columns of F as rows.

    Directions with (numerically) zero variance are replaced by random
    Gaussian rows orthogonalised against the rest.
    """
    D = F.shape[0]
    if d > D:
        raise InfeasibleError(f"subspace dimension d={d} exceeds feature dimension {D}")
    Fc = F - F.mean(axis=1, keepdims=True)
    lam, V = np.linalg.eigh(Fc @ Fc.T / max(F.shape[1], 1))
    order = np.argsort(lam)[::-1]
    lam, V = lam[order], V[:, order]
    rank = int(np.sum(lam > 1e-10 * max(lam[0], 1e-300)))
    if rank >= d:
        return V[:, :d].T.copy()
    rng = Xorshift64Star(seed)
    extra = rng.normal((d - rank, D))
    return orthonormalize_rows(np.vstack([V[:, :rank].T, extra]))


def whitener_for(Y: np.ndarray) -> np.ndarray:
    """(Cov(Y) + eps I)^(-1/2) for the columns of Y."""
    d = Y.shape[0]
    Yc = Y - Y.mean(axis=1, keepdims=True)
    cov = Yc @ Yc.T / Y.shape[1]
    eps = WHITEN_RIDGE * max(float(np.trace(cov)) / d, 1e-12)
    lam, V = np.linalg.eigh(cov + eps * np.eye(d))
    return (V / np.sqrt(lam)) @ V.T


def projected_covariance(Y: np.ndarray) -> np.ndarray:
    Yc = Y - Y.mean(axis=1, keepdims=True)
    return Yc @ Yc.T / Y.shape[1]


# --------------------------------------------------------------------------
# Training


@dataclass
class _State:
    Qs: list[np.ndarray]
    whitener: np.ndarray | None
    inner: SvddModel
    loss: float


def _fit_inner(method, Qs, Fs, hp, alpha0=None) -> _State:
    Ys = [Q @ F for Q, F in zip(Qs, Fs)]
    W = None
    if method == "es_svdd":
        W = whitener_for(Ys[0])
        Ys = [W @ Ys[0]]
    Z = np.hstack(Ys)
    if not np.all(np.isfinite(Z)):
        raise DivergenceError("non-finite projected data")
    inner = solve_svdd(Z, hp.c, alpha0=alpha0)
    loss = inner.primal_objective
    if hp.reg is not None and hp.reg.index and hp.reg.beta:
        alphas_v = _split(inner.alphas, [F.shape[1] for F in Fs])
        ws = None if W is None else [W]
        loss += hp.reg.beta * reg_term(Qs, Fs, alphas_v, hp.reg, hp.c, ws)[0]
    return _State(list(Qs), W, inner, float(loss))


def _fit_arrays(method: str, Fs: list[np.ndarray], hp: HyperParams, seed: int):
    if method not in SUBSPACE_METHODS:
        raise ParameterError(f"unknown subspace method {method!r}")
    if method != "ms_svdd" and len(Fs) != 1:
        raise ShapeError(f"{method} expects a single (concatenated) view")
    d = hp.d
    if d is None:
        raise ParameterError("subspace methods need d")
    n_total = sum(F.shape[1] for F in Fs)
    if hp.c * n_total < 1.0 - 1e-12:
        raise InfeasibleError(f"C={hp.c:g} < 1/N={1.0 / n_total:g}")
    for F in Fs:
        if d > F.shape[0]:
            raise InfeasibleError(f"d={d} exceeds available dimension {F.shape[0]}")

    Qs = [init_projection(F, d, seed=seed + v) for v, F in enumerate(Fs)]
    state = _fit_inner(method, Qs, Fs, hp)
    trace = [state.loss]
    sizes = [F.shape[1] for F in Fs]
    iters = 0
    if hp.eta > 0:
        for it in range(1, hp.max_iters + 1):
            alphas_v = _split(state.inner.alphas, sizes)
            ws = None if state.whitener is None else [state.whitener]
            grads = lagrangian_gradient(state.Qs, Fs, alphas_v, hp.reg, hp.c, ws)
            eta = hp.eta
            accepted = None
            for _ in range(MAX_HALVINGS + 1):
                with np.errstate(over="ignore", invalid="ignore"):
                    cand = [Q - eta * G for Q, G in zip(state.Qs, grads)]
                if not all(np.all(np.isfinite(Q)) for Q in cand):
                    raise DivergenceError(f"non-finite projection at iteration {it} (eta={eta:g})")
                cand = [orthonormalize_rows(Q) for Q in cand]
                try:
                    new = _fit_inner(method, cand, Fs, hp, alpha0=state.inner.alphas)
                except DivergenceError as exc:
                    raise DivergenceError(f"iteration {it} (eta={eta:g}): {exc}") from None
                if new.loss <= state.loss:
                    accepted = new
                    break
                eta *= 0.5
            if accepted is None:
                break
            iters = it
            state = accepted
            trace.append(state.loss)
            if trace[-2] - trace[-1] <= 1e-12 * max(1.0, abs(trace[-2])):
                break
    return state, trace, iters


def _training_arrays(method: str, ds_train: MultiViewDataset | Sequence[np.ndarray]) -> list[np.ndarray]:
    if isinstance(ds_train, MultiViewDataset):
        if method == "ms_svdd":
            if ds_train.n_views < 2:
                raise ParameterError("ms_svdd requires >= 2 views")
            return [v.features for v in ds_train.views]
        return [concatenate_views(ds_train).views[0].features]
    return [np.asarray(F, dtype=float) for F in ds_train]


def train_subspace(
    method: str,
    ds_train: MultiViewDataset | Sequence[np.ndarray],
    hp: HyperParams,
    seed: int = 0,
) -> SubspaceModel:
    """Fit S-SVDD / ES-SVDD / MS-SVDD on target-only training data.

    ``ds_train`` is a dataset (uni-modal methods concatenate its views) or a
    list of D_v x N arrays. With an RBF kernel every modality is first mapped
    through its own NPT embedding.
    """
    raw = _training_arrays(method, ds_train)
    if hp.kernel.kind == "rbf":
        embeddings = tuple(npt_embed(gram_matrix(F, F, hp.kernel), train_refs=F) for F in raw)
        Fs = [e.phi for e in embeddings]
    else:
        embeddings = tuple(None for _ in raw)
        Fs = raw
    state, trace, iters = _fit_arrays(method, Fs, hp, seed)
    projections = tuple(ProjectionMatrix(Q, v + 1) for v, Q in enumerate(state.Qs))
    return SubspaceModel(method, projections, state.inner, hp, state.whitener, embeddings, tuple(trace), iters)


def project(model: SubspaceModel, views: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Map raw per-modality columns into the learnt d-dimensional space."""
    if len(views) != len(model.projections):
        raise ShapeError(f"expected {len(model.projections)} modalities, got {len(views)}")
    out = []
    for F, P, emb in zip(views, model.projections, model.embeddings or [None] * len(views)):
        F = np.asarray(F, dtype=float)
        if F.ndim == 1:
            F = F[:, None]
        if emb is not None:
            if F.shape[0] != emb.train_refs.shape[0]:
                raise ShapeError(f"modality {P.modality_id}: expected {emb.train_refs.shape[0]} features, got {F.shape[0]}")
            F = npt_map(emb, gram_matrix(emb.train_refs, F, model.hparams.kernel))
        elif F.shape[0] != P.q.shape[1]:
            raise ShapeError(f"modality {P.modality_id}: expected {P.q.shape[1]} features, got {F.shape[0]}")
        Y = P.q @ F
        if model.whitener is not None:
            Y = model.whitener @ Y
        out.append(Y)
    return out


def subspace_decision_values(model: SubspaceModel, views: Sequence[np.ndarray]) -> np.ndarray:
    """R^2 - |z - a|^2 per modality: shape V x M (V = 1 for uni-modal methods)."""
    a = model.inner.center_coords
    rows = []
    for Z in project(model, views):
        diff = Z - a[:, None]
        rows.append(model.inner.radius_sq - np.einsum("ij,ij->j", diff, diff))
    return np.vstack(rows)


def combine_decisions(accept: np.ndarray, ds: int) -> np.ndarray:
    """Merge per-modality accept flags (V x M booleans) with strategy ds."""
    accept = np.asarray(accept, dtype=bool)
    if accept.ndim == 1:
        accept = accept[:, None]
    if ds == 1:
        return accept.all(axis=0)
    if ds == 2:
        return accept.any(axis=0)
    if ds == 3:
        return accept[0]
    if ds == 4:
        if accept.shape[0] < 2:
            raise ParameterError("strategy 4 needs a second modality")
        return accept[1]
    raise ParameterError(f"unknown decision strategy {ds}")


def ms_svdd_decide(model: SubspaceModel, sample: Sequence[np.ndarray], ds: int | None = None):
    """Target (True) / outlier (False) for one sample or a batch of columns."""
    if model.method != "ms_svdd":
        raise ParameterError("ms_svdd_decide needs an ms_svdd model")
    if len(sample) != len(model.projections) or any(s is None for s in sample):
        raise ShapeError(f"sample must provide all {len(model.projections)} modalities")
    single = np.asarray(sample[0]).ndim == 1
    accept = accept_mask(subspace_decision_values(model, sample), model.inner.radius_sq)
    out = combine_decisions(accept, ds or model.hparams.ds or 1)
    return bool(out[0]) if single else out


def with_strategy(model: SubspaceModel, ds: int) -> SubspaceModel:
    return replace(model, hparams=replace(model.hparams, ds=ds))
