#!/usr/bin/env python3
"""Plot accuracy-vs-speed curves from `dvs sweep` CSV files.

Not part of the test or acceptance path; purely a convenience for looking
at sweep output.

    python scripts/plot_sweep.py sweep_confidence.csv sweep_fixed.csv -o curves.png
"""

import argparse
import csv
import sys


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise SystemExit(f"{path}: empty sweep file")
    label = rows[0]["policy"]
    xs = [float(r["simulated_speedup"]) for r in rows]
    ys = [float(r["miou"]) for r in rows]
    params = [float(r["parameter"]) for r in rows]
    return label, xs, ys, params


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", nargs="+", help="sweep CSV files, one curve each")
    parser.add_argument("-o", "--out", default="sweep.png")
    args = parser.parse_args(argv)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for path in args.csv:
        label, xs, ys, params = load(path)
        order = sorted(range(len(xs)), key=lambda i: xs[i])
        ax.plot(
            [xs[i] for i in order],
            [ys[i] for i in order],
            marker="o",
            label=label,
        )
        for i in order:
            ax.annotate(
                f"{params[i]:g}",
                (xs[i], ys[i]),
                textcoords="offset points",
                xytext=(4, 4),
                fontsize=7,
            )
    ax.set_xlabel("simulated speedup (x all-seg baseline)")
    ax.set_ylabel("mIoU")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
