"""Total-variation profile figure: exact TV and/or certified envelopes
against time, with optional markers at T_N, half the mean cover time, and
the mean cover time (the cutoff threshold diagnostics)."""

from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from .common import SchemaError, load_table, write_outputs

COLUMNS = ["t", "tv_exact", "tv_lower", "tv_upper"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", nargs="+",
                    help="tvprofile.csv files (t, tv_exact, tv_lower, tv_upper)")
    ap.add_argument("-o", "--output", required=True)
    ap.add_argument("--scale", type=float, nargs="*", default=None,
                    help="per-input time normalizations (e.g. T_cov values)")
    ap.add_argument("--t-n", type=float, default=None)
    ap.add_argument("--half-cover", type=float, default=None)
    ap.add_argument("--cover-mean", type=float, default=None)
    ap.add_argument("--logx", action="store_true")
    args = ap.parse_args(argv)

    scales = args.scale or [1.0] * len(args.csv)
    if len(scales) != len(args.csv):
        raise SchemaError("--scale must match the number of inputs")

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    fits = {"kind": "tvprofile", "inputs": list(args.csv)}
    for path, scale in zip(args.csv, scales):
        meta, data = load_table(path, COLUMNS)
        ts = data[:, 0] / scale
        label = Path(path).stem
        exact, lower, upper = data[:, 1], data[:, 2], data[:, 3]
        if np.isfinite(exact).any():
            ax.plot(ts[np.isfinite(exact)], exact[np.isfinite(exact)],
                    "-", lw=1.6, label=f"{label} exact")
        band = np.isfinite(lower) & np.isfinite(upper)
        if band.any() and not np.isfinite(exact).all():
            ax.fill_between(ts[band], lower[band], upper[band], alpha=0.25,
                            label=f"{label} bounds")
            ax.plot(ts[band], lower[band], lw=0.8)
            ax.plot(ts[band], upper[band], lw=0.8)
    for value, name in ((args.t_n, "T_N"), (args.half_cover, "T_cov/2"),
                        (args.cover_mean, "T_cov")):
        if value is not None:
            ax.axvline(value, ls="--", lw=1.0, color="gray")
            ax.text(value, 1.0, name, rotation=90, va="top", fontsize=8)
            fits[name] = value
    if args.logx:
        ax.set_xscale("log")
    ax.set_ylim(-0.02, 1.05)
    ax.set_xlabel("t" + (" (scaled)" if args.scale else ""))
    ax.set_ylabel("total variation distance")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    write_outputs(fig, args.output, fits)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
