#!/usr/bin/env python3
"""f_S, f_I, f_D against iteration (sir-run, gradient-snapshot); overlays
the Gaussian fit when the run directory has one.

    scripts/plot_timeseries.py out/fig2c [-o fig2c.png]
"""
import argparse
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

from simplot import fit_curve, read_block

ap = argparse.ArgumentParser()
ap.add_argument("run", type=Path)
ap.add_argument("-o", "--output", type=Path)
args = ap.parse_args()

ts = pd.read_csv(args.run / "timeseries.csv")
fig, ax = plt.subplots(figsize=(4.5, 3.2))
for col, colour in (("f_S", "tab:green"), ("f_I", "tab:red"), ("f_D", "black")):
    ax.plot(ts.iteration, ts[col], color=colour, label=col)
fit = args.run / "fit.txt"
if fit.exists() and read_block(fit).get("model") == "gaussian":
    f = fit_curve(read_block(fit))
    ax.plot(ts.iteration, [f(t) for t in ts.iteration], "--", color="tab:red", label="Gaussian fit")
ax.set_xlabel("iteration")
ax.set_ylabel("fraction of cells")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(args.output or args.run / "timeseries.png", dpi=200)
