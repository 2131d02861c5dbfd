#!/usr/bin/env python3
"""Plot one or more P_ct(b) curves produced by `tcdirac sweep` (pct.dat files).

Usage: plot_pct.py out/axial/pct.dat [more.dat ...] [-o pct.png]
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_pct(path):
    xs, ys = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            x, y = line.split()[:2]
            xs.append(float(x))
            ys.append(float(y))
    return xs, ys


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("files", nargs="+", help="pct.dat files")
    ap.add_argument("-o", "--out", default="pct.png")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for path in args.files:
        xs, ys = read_pct(path)
        ax.plot(xs, ys, "o-", label=path)
    ax.set_xlabel("impact parameter b (fm)")
    ax.set_ylabel(r"$P_{\mathrm{ct}}$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
