"""Deterministic synthetic multi-view data and brute-force dual oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import ModalityView, MultiViewDataset
from .errors import OracleScaleError
from .kernels import KernelSpec, gram_matrix
from .prng import Xorshift64Star

TARGET_LABEL = "target"
OUTLIER_LABEL = "outlier"


@dataclass(frozen=True)
class SynthSpec:
    n_target: int = 60
    n_outlier: int = 20
    dims: tuple[int, ...] = (6, 6)
    separation: float = 6.0
    seed: int = 0

    def __post_init__(self):
        if self.n_target < 1 or self.n_outlier < 1:
            raise ValueError("n_target and n_outlier must be >= 1")
        if not self.separation > 0:
            raise ValueError("separation must be > 0")
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError("dims must be positive")

    @property
    def view_count(self) -> int:
        return len(self.dims)


def displacement_pattern(n_outlier: int, n_views: int) -> np.ndarray:
    """Boolean V x n_outlier mask: which views each outlier is displaced in.

    With two or more views a quarter of the outliers (at least one) is shifted
    in a single view only, per view; the rest move in every view. Every
    outlier is shifted somewhere, so the views jointly separate all of them.
    """
    mask = np.ones((n_views, n_outlier), dtype=bool)
    if n_views < 2:
        return mask
    per_view = max(1, n_outlier // 4)
    if per_view * n_views > n_outlier:
        per_view = n_outlier // n_views
    j = 0
    for v in range(n_views):
        for _ in range(per_view):
            mask[:, j] = False
            mask[v, j] = True
            j += 1
    return mask


def gen_two_view(spec: SynthSpec) -> MultiViewDataset:
    """Unit-Gaussian targets; outliers shifted by ``separation`` along per-outlier random directions.

    Works for any view count; ``SynthSpec`` defaults to two views.
    """
    rng = Xorshift64Star(spec.seed)
    n = spec.n_target + spec.n_outlier
    mask = displacement_pattern(spec.n_outlier, spec.view_count)
    views = []
    for v, dim in enumerate(spec.dims):
        vr = rng.spawn(v)
        F = vr.normal((n, dim)).T.copy()
        for j in range(spec.n_outlier):
            if mask[v, j]:
                F[:, spec.n_target + j] += spec.separation * vr.unit_vector(dim)
        views.append(ModalityView(v + 1, F))
    labels = [TARGET_LABEL] * spec.n_target + [OUTLIER_LABEL] * spec.n_outlier
    width = max(3, len(str(n - 1)))
    ids = [f"s{i:0{width}d}" for i in range(n)]
    return MultiViewDataset(tuple(views), np.array(labels, dtype=object), np.array(ids, dtype=object), TARGET_LABEL)


def default_grid_step(n: int) -> float:
    return 1e-3 if n <= 3 else 1e-2


def _grid_rows(value_lists: list[np.ndarray], total: float = 1.0) -> np.ndarray:
    """All value vectors (one entry per list) whose sum is <= total."""
    rows = np.zeros((1, 0))
    for values in value_lists:
        sums = rows.sum(axis=1)
        counts = np.searchsorted(values, total - sums + 1e-12, side="right")
        rep = np.repeat(rows, counts, axis=0)
        picked = np.concatenate([values[:c] for c in counts])
        rows = np.column_stack([rep, picked])
    return rows


def _axis_values(lo: float, hi: float, step: float, cap: float) -> np.ndarray:
    lo, hi = max(0.0, lo), min(cap, hi)
    vals = np.arange(lo, hi + 1e-12, step)
    extra = [v for v in (0.0, cap) if lo - 1e-12 <= v <= hi + 1e-12]
    return np.unique(np.clip(np.concatenate([vals, extra]), 0.0, cap))


def _scan(Q, p, upper, U_all, chunk):
    n = len(p)
    i1, i2 = n - 2, n - 1
    Quu = Q[:i1, :i1]
    q1, q2 = Q[:i1, i1], Q[:i1, i2]
    curv = Q[i1, i1] + Q[i2, i2] - 2.0 * Q[i1, i2]
    best_val, best = np.inf, None
    for start in range(0, len(U_all), chunk):
        U = U_all[start:start + chunk]
        r = 1.0 - U.sum(axis=1)
        lo = np.maximum(0.0, r - upper)
        hi = np.minimum(upper, r)
        ok = lo <= hi + 1e-12
        if not np.any(ok):
            continue
        U, r, lo, hi = U[ok], r[ok], lo[ok], hi[ok]
        uq1, uq2 = U @ q1, U @ q2
        const = 0.5 * np.einsum("ij,ij->i", U @ Quu, U) + U @ p[:i1] + r * uq2 + 0.5 * r**2 * Q[i2, i2] + r * p[i2]
        lin = uq1 - uq2 - r * Q[i2, i2] + r * Q[i1, i2] + p[i1] - p[i2]
        if curv > 1e-15:
            t = np.clip(-lin / curv, lo, hi)
        else:
            t = np.where(lin > 0, lo, hi)
        vals = const + lin * t + 0.5 * curv * t**2
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best = np.concatenate([U[k], [t[k], r[k] - t[k]]])
    return best, best_val


def simplex_box_bruteforce(
    Q: np.ndarray, p: np.ndarray, upper: float, grid_step: float, refine: int = 2, chunk: int = 400_000
) -> tuple[np.ndarray, float]:
    """Minimise 0.5 a'Qa + p'a over {sum a = 1, 0 <= a <= upper} by grid scan.

    The first N-2 coordinates run over the grid {0, h, 2h, ...} plus the box
    bound itself; the last two share the remaining mass and that
    one-dimensional quadratic is minimised in closed form, so the scan is
    exact for N <= 2. Each of the ``refine`` extra rounds rescans a grid ten
    times finer in a +-h window around the incumbent.
    """
    Q = np.asarray(Q, dtype=float)
    p = np.asarray(p, dtype=float)
    n = len(p)
    if n > 6:
        raise OracleScaleError(f"brute-force oracle supports N <= 6, got {n}")
    if upper * n < 1.0 - 1e-12:
        raise ValueError("infeasible box")
    if n == 1:
        return np.ones(1), float(0.5 * Q[0, 0] + p[0])

    cap = min(1.0, upper)
    step = grid_step
    best, best_val = _scan(Q, p, upper, _grid_rows([_axis_values(0.0, cap, step, cap)] * (n - 2)), chunk)
    for _ in range(refine if n > 2 else 0):
        axes = [_axis_values(b - step, b + step, step / 10, cap) for b in best[: n - 2]]
        step /= 10
        cand, val = _scan(Q, p, upper, _grid_rows(axes), chunk)
        if val < best_val:
            best, best_val = cand, val
    return best, best_val


def svdd_bruteforce(Z: np.ndarray | None, C: float, grid_step: float | None = None, *,
                    kernel: KernelSpec | None = None, gram: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Grid-scan maximiser of the SVDD dual sum a_i K_ii - a'Ka; returns (alphas, objective)."""
    if gram is None:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        gram = gram_matrix(Z, Z, kernel or KernelSpec("linear"))
    K = np.asarray(gram, dtype=float)
    step = grid_step or default_grid_step(K.shape[0])
    a, val = simplex_box_bruteforce(2.0 * K, -np.diag(K), C, step)
    return a, -val


def ocsvm_bruteforce(K: np.ndarray, nu: float, grid_step: float | None = None) -> tuple[np.ndarray, float]:
    """Grid-scan minimiser of 0.5 a'Ka under the nu-box; returns (alphas, objective)."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    step = grid_step or default_grid_step(n)
    return simplex_box_bruteforce(K, np.zeros(n), 1.0 / (nu * n), step)
