"""Exact dual solvers for SVDD and the nu-parameterised one-class SVM.

Both duals share the shape

    minimise 0.5 a'Qa + p'a   s.t.  sum(a) = 1,  0 <= a_i <= U

and are solved by SMO-style pairwise coordinate steps on the maximal KKT
violating pair.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, NumericError, ParameterError, ShapeError
from .kernels import KernelSpec, gram_matrix

ALPHA_TOL = 1e-8
ACCEPT_TOL = 1e-9
SMO_TOL = 1e-7
SMO_MAX_ITER = 100_000


POLISH_EVERY = 20


def _violation(g: np.ndarray, alpha: np.ndarray, upper: float) -> float:
    up = g[alpha < upper]
    down = g[alpha > 0.0]
    if not up.size or not down.size:
        return 0.0
    return float(down.max() - up.min())


def _ratio_step(a: np.ndarray, d: np.ndarray, upper: float, t_max: float) -> tuple[float, np.ndarray]:
    """Largest t <= t_max keeping a + t d inside [0, upper]; also the blocking mask."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t_low = np.where(d < 0, a / -d, np.inf)
        t_high = np.where(d > 0, (upper - a) / d, np.inf)
    t_each = np.minimum(t_low, t_high)
    t = min(t_max, float(t_each.min()))
    return t, t_each <= t * (1 + 1e-12) + 1e-300


def _polish(Q, p, upper, alpha, rounds=12):
    """Active-set refinement on the current free set.

    Each round either jumps to the minimiser of the equality-constrained
    problem over the free variables, or (when the reduced system is
    singular and inconsistent) descends along a zero-curvature direction.
    A variable blocking the move is pinned to its bound.
    """
    alpha = alpha.copy()
    free = (alpha > 0.0) & (alpha < upper)
    for _ in range(rounds):
        F = np.flatnonzero(free)
        if F.size == 0:
            return None
        fixed = np.flatnonzero(~free)
        k = F.size
        A = np.zeros((k + 1, k + 1))
        A[:k, :k] = Q[np.ix_(F, F)]
        A[:k, k] = 1.0
        A[k, :k] = 1.0
        b = np.empty(k + 1)
        b[:k] = -p[F] - Q[np.ix_(F, fixed)] @ alpha[fixed]
        b[k] = 1.0 - alpha[fixed].sum()
        x = np.linalg.lstsq(A, b, rcond=None)[0]
        resid = np.linalg.norm(A @ x - b)
        if resid <= 1e-9 * max(1.0, np.linalg.norm(b)):
            direction = x[:k] - alpha[F]
            t_max = 1.0
        else:
            M = np.vstack([Q[np.ix_(F, F)], np.ones((1, k))])
            _, sv, Vt = np.linalg.svd(M)
            tol = max(M.shape) * np.finfo(float).eps * (sv[0] if sv.size else 1.0)
            rank = int(np.sum(sv > tol))
            N = Vt[rank:]
            if N.shape[0] == 0:
                return None
            gF = Q[F] @ alpha + p[F]
            direction = -(N.T @ (N @ gF))
            if np.linalg.norm(direction) <= 1e-15:
                return None
            t_max = np.inf
        t, blocking = _ratio_step(alpha[F], direction, upper, t_max)
        if not np.isfinite(t):
            return None
        alpha[F] = np.clip(alpha[F] + t * direction, 0.0, upper)
        if t >= t_max:
            return alpha
        hit = F[blocking]
        alpha[hit] = np.where(alpha[hit] > 0.5 * upper, upper, 0.0)
        free[hit] = False
    return alpha


def _objective(Q, p, a):
    return 0.5 * a @ Q @ a + p @ a


@dataclass(frozen=True)
class SmoResult:
    alphas: np.ndarray
    grad: np.ndarray
    iterations: int
    converged: bool
    max_violation: float


def smo_simplex_box(
    Q: np.ndarray,
    p: np.ndarray,
    upper: float,
    alpha0: np.ndarray | None = None,
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> SmoResult:
    n = len(p)
    if upper * n < 1.0 - 1e-12:
        raise InfeasibleError(f"box upper bound {upper:g} with N={n} cannot reach sum(alpha)=1")
    if alpha0 is not None:
        alpha = np.clip(np.asarray(alpha0, dtype=float), 0.0, upper)
        s = alpha.sum()
        if s <= 0 or abs(s - 1.0) > 1e-6 or np.any(alpha > upper):
            alpha = np.full(n, 1.0 / n)
        else:
            alpha = np.minimum(alpha / s, upper)
    else:
        alpha = np.full(n, 1.0 / n)

    diag = np.diag(Q).copy()
    g = Q @ alpha + p
    viol = 0.0
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        can_up = alpha < upper
        can_down = alpha > 0.0
        gi = np.where(can_up, g, np.inf)
        gj = np.where(can_down, g, -np.inf)
        i = int(np.argmin(gi))
        viol = float(gj.max() - gi[i])
        if viol < tol:
            converged = True
            break
        # second-order choice of j: largest guaranteed decrease among violators
        diff = gj - gi[i]
        curvs = np.maximum(Q[i, i] + diag - 2.0 * Q[i], 1e-12)
        gain = np.where(diff > 0, diff * diff / curvs, -np.inf)
        j = int(np.argmax(gain))
        curv = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
        t = (g[j] - g[i]) / curv if curv > 1e-15 else np.inf
        room_i = upper - alpha[i]
        room_j = alpha[j]
        if t >= room_i or t >= room_j:
            if room_i <= room_j:
                t = room_i
                alpha[i] = upper
                alpha[j] -= t
            else:
                t = room_j
                alpha[i] += t
                alpha[j] = 0.0
        else:
            alpha[i] += t
            alpha[j] -= t
        g += t * (Q[:, i] - Q[:, j])
        if it % POLISH_EVERY == 0:
            g = Q @ alpha + p
            cand = _polish(Q, p, upper, alpha)
            if cand is not None and abs(cand.sum() - 1.0) < 1e-9 and _objective(Q, p, cand) <= _objective(Q, p, alpha):
                alpha, g = cand, Q @ cand + p
    # fold accumulated rounding back onto the simplex
    drift = 1.0 - alpha.sum()
    if drift != 0.0:
        free = np.flatnonzero((alpha > 0.0) & (alpha < upper))
        if len(free):
            alpha[free] += drift / len(free)
    return SmoResult(alpha, Q @ alpha + p, it, converged, viol)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericError("non-finite input to solver")


@dataclass(frozen=True)
class SvddModel:
    """Trained hypersphere. ``decision > 0`` inside, ``< 0`` outside."""

    alphas: np.ndarray
    C: float
    radius_sq: float
    center_coords: np.ndarray | None
    support_index: np.ndarray
    slacks: np.ndarray
    center_norm_sq: float
    train_points: np.ndarray | None = None
    kernel: KernelSpec | None = None
    iterations: int = 0
    converged: bool = True
    kkt_violation: float = 0.0
    dual_objective: float = 0.0

    @property
    def primal_objective(self) -> float:
        """R^2 + C * sum(xi)."""
        return float(self.radius_sq + self.C * self.slacks.sum())

    @property
    def unbounded_index(self) -> np.ndarray:
        a = self.alphas
        return np.flatnonzero((a > ALPHA_TOL) & (a < self.C - ALPHA_TOL))


def accept_mask(decision: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Target flags: decision >= 0, allowing round-off of ACCEPT_TOL relative to ``scale``.

    Points on the boundary (unbounded support vectors) are targets; without
    the tolerance they would flip on the last bit of the distance.
    """
    return np.asarray(decision) >= -ACCEPT_TOL * max(1.0, abs(scale))


def svdd_dual_objective(K: np.ndarray, alphas: np.ndarray) -> float:
    """sum_i a_i K_ii - a'Ka (to be maximised)."""
    return float(np.diag(K) @ alphas - alphas @ K @ alphas)


def _radius_from_distances(dist: np.ndarray, alphas: np.ndarray, upper: float) -> float:
    unbounded = (alphas > ALPHA_TOL) & (alphas < upper - ALPHA_TOL)
    if np.any(unbounded):
        return float(dist[unbounded].mean())
    inner = dist[alphas <= ALPHA_TOL]
    outer = dist[alphas >= upper - ALPHA_TOL]
    lo = float(inner.max()) if inner.size else None
    hi = float(outer.min()) if outer.size else None
    if lo is None:
        return hi
    if hi is None:
        return lo
    return 0.5 * (lo + hi)


def _kkt_violation(dec: np.ndarray, alphas: np.ndarray, upper: float) -> float:
    zero = alphas <= ALPHA_TOL
    bound = alphas >= upper - ALPHA_TOL
    free = ~zero & ~bound
    v = 0.0
    if np.any(zero):
        v = max(v, float(np.max(-dec[zero])))
    if np.any(bound):
        v = max(v, float(np.max(dec[bound])))
    if np.any(free):
        v = max(v, float(np.max(np.abs(dec[free]))))
    return max(v, 0.0)


def solve_svdd(
    Z: np.ndarray | None,
    C: float,
    *,
    kernel: KernelSpec | None = None,
    gram: np.ndarray | None = None,
    alpha0: np.ndarray | None = None,
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> SvddModel:
    """Minimum enclosing hypersphere with slack penalty C.

    Pass explicit coordinates ``Z`` (d x N, linear kernel unless ``kernel`` is
    given) or a precomputed ``gram``.  With explicit linear coordinates the
    centre is stored as a d-vector; otherwise decisions use the kernel
    expansion.
    """
    if gram is not None:
        K = np.asarray(gram, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ShapeError(f"gram must be square, got {K.shape}")
        pts = None if Z is None else np.asarray(Z, dtype=float)
    else:
        if Z is None:
            raise ShapeError("solve_svdd needs Z or gram")
        pts = np.asarray(Z, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        _check_finite(pts)
        K = gram_matrix(pts, pts, kernel or KernelSpec("linear"))
    _check_finite(K)
    n = K.shape[0]
    if n < 1:
        raise ShapeError("need at least one training sample")
    if not np.isfinite(C) or C * n < 1.0 - 1e-12:
        raise InfeasibleError(f"C={C:g} < 1/N={1.0 / n:g}: sum(alpha)=1 is infeasible")

    K = 0.5 * (K + K.T)
    diag = np.diag(K).copy()
    res = smo_simplex_box(2.0 * K, -diag, C, alpha0=alpha0, tol=tol, max_iter=max_iter)
    if not res.converged:
        warnings.warn(f"SVDD SMO stopped after {res.iterations} iterations, KKT violation {res.max_violation:.2e}")
    a = res.alphas
    Ka = K @ a
    aKa = float(a @ Ka)
    dist = np.maximum(diag - 2.0 * Ka + aKa, 0.0)
    r2 = max(_radius_from_distances(dist, a, C), 0.0)
    slacks = np.maximum(dist - r2, 0.0)

    linear = kernel is None or kernel.kind == "linear"
    center = pts @ a if (pts is not None and linear) else None
    return SvddModel(
        alphas=a,
        C=float(C),
        radius_sq=r2,
        center_coords=center,
        support_index=np.flatnonzero(a > ALPHA_TOL),
        slacks=slacks,
        center_norm_sq=aKa,
        train_points=pts,
        kernel=kernel if kernel is not None else (KernelSpec("linear") if gram is None else None),
        iterations=res.iterations,
        converged=res.converged,
        kkt_violation=_kkt_violation(r2 - dist, a, C),
        dual_objective=float(diag @ a - aKa),
    )


def svdd_decision(model: SvddModel, Z: np.ndarray) -> np.ndarray | float:
    """R^2 - ||z - a||^2 for one vector or the columns of a matrix."""
    Z = np.asarray(Z, dtype=float)
    single = Z.ndim == 1
    if single:
        Z = Z[:, None]
    if model.center_coords is not None:
        if Z.shape[0] != model.center_coords.shape[0]:
            raise ShapeError(f"expected {model.center_coords.shape[0]}-dim samples, got {Z.shape[0]}")
        diff = Z - model.center_coords[:, None]
        out = model.radius_sq - np.einsum("ij,ij->j", diff, diff)
    elif model.train_points is not None and model.kernel is not None:
        if Z.shape[0] != model.train_points.shape[0]:
            raise ShapeError(f"expected {model.train_points.shape[0]}-dim samples, got {Z.shape[0]}")
        k_cross = gram_matrix(model.train_points, Z, model.kernel)
        k_self = np.ones(Z.shape[1]) if model.kernel.kind == "rbf" else np.einsum("ij,ij->j", Z, Z)
        out = svdd_decision_kernel(model, k_cross, k_self)
    else:
        raise ShapeError("model trained on a precomputed gram; use svdd_decision_kernel")
    return float(out[0]) if single else out


def svdd_decision_kernel(model: SvddModel, k_cross: np.ndarray, k_self: np.ndarray) -> np.ndarray:
    """Kernel-expansion decision: k_cross is N_train x M, k_self the M diagonal values."""
    k_cross = np.asarray(k_cross, dtype=float)
    if k_cross.ndim == 1:
        k_cross = k_cross[:, None]
    if k_cross.shape[0] != len(model.alphas):
        raise ShapeError(f"kernel block needs {len(model.alphas)} rows, got {k_cross.shape[0]}")
    dist = np.asarray(k_self, dtype=float) - 2.0 * (model.alphas @ k_cross) + model.center_norm_sq
    return model.radius_sq - np.maximum(dist, 0.0)


@dataclass(frozen=True)
class OcsvmModel:
    alphas: np.ndarray
    rho: float
    nu: float
    train_points: np.ndarray | None = None
    kernel: KernelSpec | None = None
    iterations: int = 0
    converged: bool = True
    kkt_violation: float = 0.0

    @property
    def upper(self) -> float:
        return 1.0 / (self.nu * len(self.alphas))


def solve_ocsvm(
    K: np.ndarray,
    nu: float,
    *,
    train_points: np.ndarray | None = None,
    kernel: KernelSpec | None = None,
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> OcsvmModel:
    """nu-OC-SVM: min 0.5 a'Ka s.t. 0 <= a_i <= 1/(nu N), sum(a) = 1."""
    if not (0.0 < nu <= 1.0):
        raise ParameterError(f"nu must lie in (0, 1], got {nu}")
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"gram must be square, got {K.shape}")
    _check_finite(K)
    K = 0.5 * (K + K.T)
    n = K.shape[0]
    upper = 1.0 / (nu * n)
    res = smo_simplex_box(K, np.zeros(n), upper, tol=tol, max_iter=max_iter)
    if not res.converged:
        warnings.warn(f"OC-SVM SMO stopped after {res.iterations} iterations, KKT violation {res.max_violation:.2e}")
    a = res.alphas
    Ka = K @ a
    free = (a > ALPHA_TOL) & (a < upper - ALPHA_TOL)
    if np.any(free):
        rho = float(Ka[free].mean())
    else:
        lo = Ka[a >= upper - ALPHA_TOL]
        hi = Ka[a <= ALPHA_TOL]
        bounds = [float(lo.max())] if lo.size else []
        bounds += [float(hi.min())] if hi.size else []
        rho = float(np.mean(bounds))
    dec = Ka - rho
    # decision > 0 inside; KKT signs mirror SVDD
    return OcsvmModel(
        alphas=a,
        rho=rho,
        nu=float(nu),
        train_points=None if train_points is None else np.asarray(train_points, dtype=float),
        kernel=kernel,
        iterations=res.iterations,
        converged=res.converged,
        kkt_violation=_kkt_violation(dec, a, upper),
    )


def ocsvm_decision_kernel(model: OcsvmModel, k_cross: np.ndarray) -> np.ndarray:
    k_cross = np.asarray(k_cross, dtype=float)
    if k_cross.ndim == 1:
        k_cross = k_cross[:, None]
    if k_cross.shape[0] != len(model.alphas):
        raise ShapeError(f"kernel block needs {len(model.alphas)} rows, got {k_cross.shape[0]}")
    return model.alphas @ k_cross - model.rho


def ocsvm_decision(model: OcsvmModel, Z: np.ndarray) -> np.ndarray | float:
    if model.train_points is None or model.kernel is None:
        raise ShapeError("model has no stored training points; use ocsvm_decision_kernel")
    Z = np.asarray(Z, dtype=float)
    single = Z.ndim == 1
    if single:
        Z = Z[:, None]
    out = ocsvm_decision_kernel(model, gram_matrix(model.train_points, Z, model.kernel))
    return float(out[0]) if single else out


def ocsvm_dual_objective(K: np.ndarray, alphas: np.ndarray) -> float:
    return float(0.5 * alphas @ K @ alphas)


def nu_from_c(c: float, n: int) -> float:
    """Map an SVDD-style C to OC-SVM nu = 1/(N C), clamped into (0, 1]."""
    return float(min(1.0, max(1.0 / (n * c), 1e-12)))
