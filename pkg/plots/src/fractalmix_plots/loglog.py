"""Log-log scatter + fitted-slope figure for the exponent-experiment CSVs.

Input schemas and their fits (identical code paths to the experiments):
  resistance.csv (x, y, d_xy, reff)   -> slope of log reff vs log d
  exitscale.csv  (r, mean_exit, stderr) -> slope vs log (r + 1) (exit distance)
  heatdiag.csv   (t, p_tt)            -> slope of log p_tt vs log t
  volume.csv     (center, r, volume)  -> mean per-center annulus slope
"""

from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from fractalmix.fitting import fit_loglog, volume_slope

from .common import SchemaError, load_table, write_outputs

SCHEMAS = {
    "resistance": ["x", "y", "d_xy", "reff"],
    "exitscale": ["r", "mean_exit", "stderr"],
    "heatdiag": ["t", "p_tt"],
    "volume": ["center", "r", "volume"],
}


def detect_kind(path) -> str:
    name = Path(path).name
    for kind in SCHEMAS:
        if name.startswith(kind):
            return kind
    raise SchemaError(f"{path}: cannot infer schema from file name "
                      f"(expected one of {sorted(SCHEMAS)}*)")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", required=True)
    ap.add_argument("--kind", choices=sorted(SCHEMAS), default=None)
    args = ap.parse_args(argv)

    kind = args.kind or detect_kind(args.csv)
    meta, data = load_table(args.csv, SCHEMAS[kind])
    fits = {"input": args.csv, "kind": kind}

    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    if kind == "volume":
        table = [(int(c), float(r), float(v)) for c, r, v in data]
        slope = volume_slope(table)
        fits["slope"] = slope
        rs = data[:, 1]
        ax.loglog(rs, data[:, 2], ".", ms=3, alpha=0.5)
        xs = np.array([rs.min(), rs.max()])
        ref = data[:, 2].mean() / (rs.mean() ** slope)
        ax.loglog(xs, ref * xs ** slope, "-", lw=1.5,
                  label=f"mean annulus slope = {slope:.4f}")
        ax.set_xlabel("r")
        ax.set_ylabel("V(x, r)")
    else:
        if kind == "resistance":
            xs, ys = data[:, 2], data[:, 3]
            xlabel, ylabel = "d(x, y)", "R_eff(x, y)"
        elif kind == "exitscale":
            xs, ys = data[:, 0] + 1.0, data[:, 1]
            xlabel, ylabel = "exit distance r + 1", "mean exit time"
        else:
            xs, ys = data[:, 0], data[:, 1]
            xlabel, ylabel = "t", "p_t(x, x)"
        slope, intercept, r2 = fit_loglog(xs, ys)
        fits.update({"slope": slope, "intercept": intercept, "r2": r2})
        ax.loglog(xs, ys, ".", ms=3, alpha=0.6)
        grid = np.geomspace(xs.min(), xs.max(), 50)
        ax.loglog(grid, np.exp(intercept) * grid ** slope, "-", lw=1.5,
                  label=f"slope = {slope:.4f} (R^2 = {r2:.4f})")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
    ax.legend(frameon=False)
    fig.tight_layout()
    write_outputs(fig, args.output, fits)
    print(f"{kind} slope: {fits.get('slope'):.6f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
