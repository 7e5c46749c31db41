#!/usr/bin/env python3
"""Plot the per-horizon regret comparison emitted by `assortment reproduce-fig1`.

Usage:
    python scripts/plot_fig1.py out/fig1_N100K10_eps010.csv [plot.png]

Reads the CSV (policy,horizon,t,mean_avg_regret,sd_avg_regret,trials), keeps
the end-of-horizon checkpoint of every (policy, horizon) pair, and draws one
average-regret-vs-T curve per policy.
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    src = sys.argv[1]
    dst = sys.argv[2] if len(sys.argv) > 2 else src.rsplit(".", 1)[0] + ".png"

    curves = defaultdict(dict)  # policy -> {horizon: mean at t == horizon}
    with open(src, newline="") as fh:
        for row in csv.DictReader(fh):
            horizon = int(row["horizon"])
            if int(row["t"]) == horizon:
                curves[row["policy"]][horizon] = float(row["mean_avg_regret"])

    if not curves:
        print(f"no end-of-horizon rows found in {src}", file=sys.stderr)
        return 1

    fig, ax = plt.subplots(figsize=(6, 4))
    for policy, points in sorted(curves.items()):
        horizons = sorted(points)
        ax.plot(horizons, [points[h] for h in horizons], marker="o", label=policy)
    ax.set_xlabel("time horizon T")
    ax.set_ylabel("average regret")
    ax.set_xscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(dst, dpi=150)
    print(f"wrote {dst}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
