"""Shared helpers for the plotting recipes."""
import math
from pathlib import Path


def read_block(path):
    """key = value lines (fit.txt, manifest sections) as a dict of strings."""
    out = {}
    for line in Path(path).read_text().splitlines():
        if " = " in line and not line.startswith("#"):
            k, v = line.split(" = ", 1)
            out.setdefault(k.strip(), v.strip())
    return out


def fit_curve(block):
    """Callable for a fit.txt block (tanh, multi_tanh or gaussian)."""
    p = {k: float(v) for k, v in block.items() if k[0] in "ABCo" and not k.startswith("var")
         and k not in ("converged",)}
    model = block["model"]
    if model == "tanh":
        return lambda x: p["A"] + p["B"] * math.tanh((x - p["C"]) / p["omega"])
    if model == "gaussian":
        return lambda x: p["B"] * math.exp(-p["omega"] * (x - p["C"]) ** 2)
    k = sum(1 for key in p if key.startswith("C"))
    comps = [(p[f"B{i}"], p[f"C{i}"], p[f"omega{i}"]) for i in range(1, k + 1)]
    return lambda x: p["A"] + sum(b * math.tanh((x - c) / w) for b, c, w in comps)


def read_pgm(path):
    """P2 snapshot as a list of rows (0 depleted, 1 susceptible, 2 infected)."""
    tokens = [t for line in Path(path).read_text().splitlines()
              if not line.startswith("#") for t in line.split()]
    assert tokens[0] == "P2"
    w, h = int(tokens[1]), int(tokens[2])
    vals = list(map(int, tokens[4:4 + w * h]))
    return [vals[r * w:(r + 1) * w] for r in range(h)]
