"""Render the metric table for confusion counts given on the command line.

    python scripts/reference_metrics.py 76,12,28,14 75,13,24,18
"""

from __future__ import annotations

import argparse

from mvocc.evaluation import ConfusionMatrix, ReportRow, render_report


def main() -> None:
    ap = argparse.ArgumentParser(description="metrics from tp,fn,fp,tn counts")
    ap.add_argument("counts", nargs="+", help="tp,fn,fp,tn")
    ap.add_argument("--target", default="MI")
    args = ap.parse_args()
    rows = []
    for i, c in enumerate(args.counts):
        tp, fn, fp, tn = (int(x) for x in c.split(","))
        rows.append(ReportRow(f"run{i + 1}", args.target, "-", "-", ConfusionMatrix(tp, fn, fp, tn, args.target)))
    print(render_report(rows)[0], end="")


if __name__ == "__main__":
    main()
