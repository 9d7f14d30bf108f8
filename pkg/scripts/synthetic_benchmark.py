"""Nested-CV benchmark of every method on the two-view synthetic data.

Grids are deliberately small so the full sweep finishes in a few minutes;
pass --full-grid to use the default grids (slow for the subspace methods).
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from mvocc.evaluation import cross_validate, cross_validate_strategies, grid_expand, render_report
from mvocc.models import METHODS
from mvocc.synthetic import SynthSpec, gen_two_view

SMALL_GRIDS = {
    "svdd": {},
    "ocsvm": {},
    "s_svdd": {"eta": [0.01], "beta": [0.1], "c": [0.1, 0.3, 0.6], "d": [4, 8], "reg": [0, 3]},
    "es_svdd": {"eta": [0.01], "beta": [0.1], "c": [0.1, 0.3, 0.6], "d": [4, 8], "reg": [0, 3]},
    "ms_svdd": {"eta": [0.01], "beta": [0.1], "c": [0.1, 0.3, 0.6], "d": [5], "reg": [0, 4]},
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--methods", nargs="+", default=list(METHODS), choices=METHODS)
    ap.add_argument("--kernel", default="linear", choices=["linear", "rbf"])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--separation", type=float, default=6.0)
    ap.add_argument("--k-inner", type=int, default=10)
    ap.add_argument("--full-grid", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=None, help="write the report and a JSON summary here")
    args = ap.parse_args()

    ds = gen_two_view(SynthSpec(separation=args.separation, seed=args.seed))
    results = []
    timings = {}
    for method in args.methods:
        grids = None if args.full_grid else dict(SMALL_GRIDS[method])
        if grids is not None and args.kernel == "rbf":
            grids["sigma"] = [1.0, 10.0]
        grid = grid_expand(method, args.kernel, grids)
        t0 = time.perf_counter()
        common = dict(k_inner=args.k_inner, seed=args.seed, jobs=args.jobs)
        if method == "ms_svdd":
            results += list(cross_validate_strategies(ds, grid, **common).values())
        else:
            results.append(cross_validate(ds, method, grid, **common))
        timings[method] = time.perf_counter() - t0
        print(f"{method}: {len(grid)} grid points, {timings[method]:.1f}s", flush=True)

    text, doc = render_report(results, f"synthetic two-view data, separation {args.separation}, seed {args.seed}")
    print(text)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.txt").write_text(text)
        (args.out / "summary.json").write_text(json.dumps({**doc, "seconds": timings}, indent=1))


if __name__ == "__main__":
    main()
