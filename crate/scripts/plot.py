#!/usr/bin/env python3
"""Plot su3g result tables.

    python3 scripts/plot.py results/chain4_oracle.csv results/chain4_approach2-mc.csv -o fig.png
    python3 scripts/plot.py --p0 results/p0_*.csv -o p0.png
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

OBSERVABLES = [
    ("kinetic", r"$\langle K\rangle$"),
    ("interaction_energy", r"$U\langle D\rangle$"),
    ("energy", r"$\langle H\rangle$"),
    ("triple_per_site", r"$\langle P_3\rangle$/site"),
]


def load(path):
    return pd.read_csv(path, comment="#")


def plot_observables(paths, ax):
    for path in paths:
        df = load(path)
        stochastic = df["kinetic_err"].fillna(0).gt(0).any()
        for color, (col, label) in zip(["C0", "C1", "C2", "C3"], OBSERVABLES):
            y = df[col] if col != "triple_per_site" else 10 * df[col]
            if col == "triple_per_site":
                label += r" $\times 10$"
            if stochastic:
                err = df[col + "_err"] * (10 if col == "triple_per_site" else 1)
                ax.errorbar(df["g"], y, yerr=err, fmt="o", ms=3, color=color, label=f"{label} ({Path(path).stem})")
            else:
                ax.plot(df["g"], y, "-", color=color, label=f"{label} ({Path(path).stem})")
    ax.set_xlabel("g")
    ax.legend(fontsize=7)


def plot_p0(paths, ax):
    for path in paths:
        df = load(path)
        ax.semilogy(df["g"], df["p0"], label=Path(path).stem)
    ax.set_xlabel("g")
    ax.set_ylabel("$p_0$")
    ax.legend(fontsize=8)


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("tables", nargs="+")
    parser.add_argument("--p0", action="store_true", help="plot p0 against g instead of the observables")
    parser.add_argument("-o", "--output", default="plot.png")
    args = parser.parse_args()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    (plot_p0 if args.p0 else plot_observables)(args.tables, ax)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
