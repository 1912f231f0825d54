#!/usr/bin/env python3
"""Plot survival or ensemble CSVs written by qwalk-trap on log-log axes.

    python3 scripts/plot_survival.py out/fig1_m1_*.csv -o fig1.png
"""
import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def load(path):
    frame = pd.read_csv(path, comment="#", skipinitialspace=True)
    return frame.iloc[:, 0], frame.iloc[:, 1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", nargs="+", type=pathlib.Path)
    ap.add_argument("-o", "--output", default="survival.png")
    ap.add_argument("--linear-y", action="store_true")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for path in args.csv:
        t, y = load(path)
        style = "--" if "reference" in path.stem else "-"
        ax.plot(t, y, style, label=path.stem)
    ax.set_xscale("log")
    if not args.linear_y:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("survival")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
