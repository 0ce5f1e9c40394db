#!/usr/bin/env python3
"""Plot the outputs of `busyburst simulate` and `busyburst analyze`.

usage: plot_campaign.py SIMULATE_DIR [ANALYZE_DIR] [-o figure.png]

Needs matplotlib. Not part of the library; the CSV files are the contract.
"""
import argparse
import csv
import math
import os

import matplotlib.pyplot as plt


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def series(rows, key, label_key, label):
    pts = [r for r in rows if r[label_key] == label]
    return [float(r[key]) for r in pts], [float(r["value"]) for r in pts]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("simulate_dir")
    ap.add_argument("analyze_dir", nargs="?")
    ap.add_argument("-o", "--output", default="campaign.png")
    args = ap.parse_args()

    tail = read_rows(os.path.join(args.simulate_dir, "tail.csv"))
    extremes = read_rows(os.path.join(args.simulate_dir, "extremes.csv"))

    ncols = 3 if args.analyze_dir else 2
    fig, ax = plt.subplots(1, ncols, figsize=(5 * ncols, 4))

    for which, style in (("max_area", "-"), ("predicted_area", "--"), ("max_height", "-"), ("predicted_height", "--")):
        t, v = series(extremes, "i", "which", which)
        ax[0].plot(t, v, style, label=which)
    ax[0].set_xlabel("i")
    ax[0].set_ylabel("S_i")
    ax[0].legend()

    b = [float(r["b"]) for r in tail]
    ax[1].plot(b, [float(r["log_p_emp"]) / math.log(10) for r in tail], "o", ms=3, label="empirical")
    ax[1].plot(b, [float(r["log_p_pred"]) / math.log(10) for r in tail], label="-K sqrt(b)")
    shifted = [(x, float(r["log_p_pred_shifted"])) for x, r in zip(b, tail) if r["log_p_pred_shifted"]]
    if shifted:
        ax[1].plot([x for x, _ in shifted], [y / math.log(10) for _, y in shifted], label="-K sqrt(b) + kappa")
    ax[1].set_xlabel("b")
    ax[1].set_ylabel("log10 P(B >= b)")
    ax[1].legend()

    if args.analyze_dir:
        paths = read_rows(os.path.join(args.analyze_dir, "paths.csv"))
        for label in ("psi_star", "scgf"):
            t, v = series(paths, "t", "label", label)
            ax[2].plot(t, v, label=label)
        ax[2].axhline(0, color="grey", lw=0.5)
        ax[2].legend()

    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
