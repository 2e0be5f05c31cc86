#!/usr/bin/env python3
"""Stacked momentum distributions from one or more simulate output dirs.

    qwalk simulate --config configs/coherent_k145.json --out runs/rho0
    qwalk simulate --config ... --out runs/rho035
    python3 tools/plot_distributions.py runs/rho0 runs/rho035 -o distributions.png
"""

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def load(run_dir):
    table = pd.read_csv(run_dir / "distributions.csv")
    manifest = json.loads((run_dir / "manifest.json").read_text())
    return table, manifest


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("runs", nargs="+", type=Path)
    ap.add_argument("--step", type=int, help="step to plot (default: last)")
    ap.add_argument("--window", type=int, default=15, help="plot n in [-window, window]")
    ap.add_argument("-o", "--output", type=Path, default=Path("distributions.png"))
    args = ap.parse_args()

    fig, axes = plt.subplots(len(args.runs), 1, sharex=True, squeeze=False,
                             figsize=(6, 1.8 * len(args.runs) + 0.6))
    for ax, run in zip(axes[:, 0], args.runs):
        table, manifest = load(run)
        step = args.step if args.step is not None else table["step"].max()
        block = table[(table["step"] == step) & (table["n"].abs() <= args.window)]
        mean_n = (block["n"] * block["P"]).sum()
        ax.bar(block["n"], block["P"], width=0.8, color="tab:blue")
        ax.axvline(mean_n, color="tab:red", lw=1)
        rho = manifest["se"]["rho"]
        k = manifest["walk"]["k"]
        ax.set_ylabel("P(n)")
        ax.text(0.02, 0.85, f"k={k:g}  rho={rho:g}  step {step}  <n>={mean_n:.2f}",
                transform=ax.transAxes, fontsize=8)
    axes[-1, 0].set_xlabel("momentum n  [hbar G]")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
