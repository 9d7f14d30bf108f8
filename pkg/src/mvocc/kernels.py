"""Gram matrices and the nonlinear projection trick (NPT).

NPT turns a kernel into an explicit, centred, whitened-by-eigenbasis
embedding so the linear subspace learners can run unchanged in kernel space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateKernelError, ParameterError, ShapeError

KERNEL_KINDS = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf":
            if self.sigma is None or not np.isfinite(self.sigma) or self.sigma <= 0:
                raise ParameterError(f"rbf kernel needs sigma > 0, got {self.sigma}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma}


def sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances between columns, clipped at 0."""
    aa = np.einsum("ij,ij->j", A, A)
    bb = np.einsum("ij,ij->j", B, B)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (A.T @ B)
    return np.maximum(d2, 0.0)


def gram_matrix(A: np.ndarray, B: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """K[i, j] = k(A[:, i], B[:, j]) for column-sample matrices A (D x N), B (D x M)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2 or A.shape[0] != B.shape[0]:
        raise ShapeError(f"gram_matrix needs D x N and D x M inputs, got {A.shape} and {B.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise ParameterError("non-finite entries in kernel input")
    if spec.kind == "linear":
        return A.T @ B
    K = np.exp(-sq_distances(A, B) / (2.0 * spec.sigma**2))
    if A is B:
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
    return K


def center_gram(K: np.ndarray) -> np.ndarray:
    """(I - J/N) K (I - J/N)."""
    row = K.mean(axis=0)
    return K - row[None, :] - row[:, None] + K.mean()


@dataclass(frozen=True)
class NptEmbedding:
    train_refs: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray
    row_means: np.ndarray
    grand_mean: float

    @property
    def rank(self) -> int:
        return len(self.eigvals)

    @property
    def n_train(self) -> int:
        return self.eigvecs.shape[0]

    @property
    def phi(self) -> np.ndarray:
        """Training embedding, m x N."""
        return np.sqrt(self.eigvals)[:, None] * self.eigvecs.T


def npt_embed(K_train: np.ndarray, rank_tol: float = 1e-9, train_refs: np.ndarray | None = None) -> NptEmbedding:
    K = np.asarray(K_train, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"training gram must be square, got {K.shape}")
    K = 0.5 * (K + K.T)
    row = K.mean(axis=0)
    grand = float(K.mean())
    Kc = K - row[None, :] - row[:, None] + grand
    lam, V = np.linalg.eigh(Kc)
    lam = np.maximum(lam, 0.0)
    lam_max = float(lam.max()) if lam.size else 0.0
    if lam_max <= 1e-12 * max(1.0, float(np.abs(np.diag(K)).max())):
        raise DegenerateKernelError("centred kernel has no eigenvalue above tolerance (zero-variance data)")
    keep = lam > rank_tol * lam_max
    order = np.argsort(lam[keep])[::-1]
    refs = np.empty((0, K.shape[0])) if train_refs is None else np.asarray(train_refs, dtype=float)
    return NptEmbedding(refs, V[:, keep][:, order], lam[keep][order], row, grand)


def npt_map(emb: NptEmbedding, k_test: np.ndarray) -> np.ndarray:
    """Embed test columns given their kernel values against the training set (N x M)."""
    k = np.asarray(k_test, dtype=float)
    if k.ndim != 2 or k.shape[0] != emb.n_train:
        raise ShapeError(f"k_test must be {emb.n_train} x M, got {k.shape}")
    if k.shape[1] == 0:
        return np.zeros((emb.rank, 0))
    kc = k - k.mean(axis=0)[None, :] - emb.row_means[:, None] + emb.grand_mean
    return (emb.eigvecs.T @ kc) / np.sqrt(emb.eigvals)[:, None]
