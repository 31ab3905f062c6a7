#!/usr/bin/env python3
"""Lattice snapshot with the domain wall overlaid (gradient-snapshot).

    scripts/plot_snapshot.py out/fig1c [-o fig1c.png]
"""
import argparse
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd
from matplotlib.colors import ListedColormap

from simplot import read_pgm

ap = argparse.ArgumentParser()
ap.add_argument("run", type=Path)
ap.add_argument("-o", "--output", type=Path)
args = ap.parse_args()

grid = read_pgm(args.run / "snapshot.pgm")
fig, ax = plt.subplots(figsize=(4, 4))
ax.imshow(grid, cmap=ListedColormap(["black", "tab:green", "tab:red"]), vmin=0, vmax=2,
          interpolation="nearest")
front = args.run / "interface.csv"
if front.exists():
    band = pd.read_csv(front)
    ax.scatter(band.col, band.row, s=2, c="white", label="interface")
    ax.legend(loc="lower left", frameon=False, labelcolor="white")
ax.set_xlabel("column (density increases to the right)")
ax.set_ylabel("row")
fig.tight_layout()
fig.savefig(args.output or args.run / "snapshot.png", dpi=200)
