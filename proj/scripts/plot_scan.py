#!/usr/bin/env python3
"""Threshold curve with its fit (sis-scan, multi-domain-scan).

    scripts/plot_scan.py out/fig2a [-o fig2a.png]
"""
import argparse
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from simplot import fit_curve, read_block

ap = argparse.ArgumentParser()
ap.add_argument("run", type=Path)
ap.add_argument("-o", "--output", type=Path)
args = ap.parse_args()

scan = pd.read_csv(args.run / "scan.csv")
f = fit_curve(read_block(args.run / "fit.txt"))
x = np.linspace(scan.f_R.min(), scan.f_R.max(), 800)

fig, ax = plt.subplots(figsize=(4.5, 3.2))
ax.errorbar(scan.f_R, scan.mean_f_I, yerr=scan.stddev, fmt="o", ms=3, capsize=2, label="simulation")
ax.plot(x, [f(v) for v in x], "-", label="fit")
ax.set_xlabel(r"$f_R$")
ax.set_ylabel(r"final $f_I$")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(args.output or args.run / "scan.png", dpi=200)
