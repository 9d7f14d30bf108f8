"""Pooled GM of linear SVDD and each MS-SVDD decision strategy as outliers move closer."""

from __future__ import annotations

import argparse

from mvocc.evaluation import cross_validate, cross_validate_strategies, grid_expand
from mvocc.synthetic import SynthSpec, gen_two_view


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--separations", type=float, nargs="+", default=[1.0, 2.0, 4.0, 6.0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--k-inner", type=int, default=5)
    args = ap.parse_args()

    svdd_grid = grid_expand("svdd", "linear")
    ms_grid = grid_expand("ms_svdd", "linear", {"eta": [0.01], "beta": [1.0], "c": [0.1, 0.3, 0.6], "d": [5], "reg": [0]})
    print(f"{'sep':>5}  {'svdd':>7}  {'ds1':>7}  {'ds2':>7}  {'ds3':>7}  {'ds4':>7}")
    for sep in args.separations:
        ds = gen_two_view(SynthSpec(separation=sep, seed=args.seed))
        svdd = cross_validate(ds, "svdd", svdd_grid, k_inner=args.k_inner, seed=args.seed).pooled_metrics.gm
        ms = cross_validate_strategies(ds, ms_grid, k_inner=args.k_inner, seed=args.seed)
        cells = [f"{ms[s].pooled_metrics.gm:7.2f}" for s in (1, 2, 3, 4)]
        print(f"{sep:5.1f}  {svdd:7.2f}  " + "  ".join(cells), flush=True)


if __name__ == "__main__":
    main()
