#!/usr/bin/env python3
"""Transmission against coupling detuning for both sweep directions
(hysteresis).

    scripts/plot_hysteresis.py out/fig3c [-o fig3c.png]
"""
import argparse
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

ap = argparse.ArgumentParser()
ap.add_argument("run", type=Path)
ap.add_argument("-o", "--output", type=Path)
args = ap.parse_args()

curve = pd.read_csv(args.run / "curve.csv")
fig, ax = plt.subplots(figsize=(4.5, 3.2))
for direction, style in (("+", "-"), ("-", "--")):
    part = curve[curve.direction == direction].sort_values("Delta_c")
    ax.plot(part.Delta_c, part["T"], style, label=f"scan {direction}")
ax.set_xlabel(r"$\Delta_c / 2\pi$ (MHz)")
ax.set_ylabel("T")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(args.output or args.run / "hysteresis.png", dpi=200)
