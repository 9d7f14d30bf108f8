"""Distribution of SMO-vs-grid-oracle dual gaps and KKT residuals on random small problems."""

from __future__ import annotations

import argparse

import numpy as np

from mvocc.kernels import KernelSpec, gram_matrix
from mvocc.solvers import solve_svdd
from mvocc.synthetic import svdd_bruteforce


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    for i in range(args.instances):
        n = int(rng.integers(2, args.max_n + 1))
        X = rng.normal(size=(int(rng.integers(1, 4)), n))
        C = float(rng.uniform(1.0 / n, 1.0))
        spec = KernelSpec("linear") if i % 2 == 0 else KernelSpec("rbf", float(rng.uniform(0.3, 3.0)))
        K = gram_matrix(X, X, spec)
        model = solve_svdd(None, C, gram=K)
        _, ref = svdd_bruteforce(None, C, gram=K)
        rows.append((spec.kind, n, model.dual_objective - ref, model.kkt_violation, model.iterations))

    gaps = np.array([r[2] for r in rows])
    kkt = np.array([r[3] for r in rows])
    print(f"instances          {len(rows)}")
    print(f"gap (smo - oracle) min {gaps.min():.2e}  median {np.median(gaps):.2e}  max {gaps.max():.2e}")
    print(f"KKT residual       median {np.median(kkt):.2e}  max {kkt.max():.2e}")
    print(f"SMO iterations     max {max(r[4] for r in rows)}")
    for kind in ("linear", "rbf"):
        g = np.array([r[2] for r in rows if r[0] == kind])
        print(f"  {kind:6s} max |gap| {np.abs(g).max():.2e}")


if __name__ == "__main__":
    main()
