#!/usr/bin/env python3
"""Two-domain difference map T+ - T- over (Delta_c, f_R2)
(multistability-map).

    scripts/plot_map.py out/fig3a [-o fig3a.png]
"""
import argparse
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

ap = argparse.ArgumentParser()
ap.add_argument("run", type=Path)
ap.add_argument("-o", "--output", type=Path)
args = ap.parse_args()

diff = np.loadtxt(args.run / "map_matrix.txt", ndmin=2)
f2 = np.loadtxt(args.run / "map_f_R2.txt", ndmin=1)
dc = np.loadtxt(args.run / "map_delta_c.txt", ndmin=1)

fig, ax = plt.subplots(figsize=(5, 3.5))
lim = np.abs(diff).max() or 1.0
mesh = ax.pcolormesh(dc, f2, diff, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="nearest")
fig.colorbar(mesh, ax=ax, label=r"$T_+ - T_-$")
ax.set_xlabel(r"$\Delta_c / 2\pi$ (MHz)")
ax.set_ylabel(r"$f_{R2}$")
fig.tight_layout()
fig.savefig(args.output or args.run / "map.png", dpi=200)
