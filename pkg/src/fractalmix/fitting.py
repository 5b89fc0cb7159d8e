"""Least-squares helpers shared by the exponent estimators and the figure
scripts, so a fitted slope printed in a figure is bit-identical to the one
the experiment reported."""

from __future__ import annotations

import numpy as np


def fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Ordinary least squares y ~ a + b x; returns (slope, intercept, r2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate fit: all abscissae equal")
    xm = x.mean()
    ym = y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    syy = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if syy == 0.0 else 1.0 - float(np.sum(resid ** 2)) / syy
    return slope, intercept, r2


def fit_loglog(x, y) -> tuple[float, float, float]:
    """OLS of log y against log x; returns (slope, log-intercept, r2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    return fit_line(np.log(x), np.log(y))


def volume_slope(table) -> float:
    """Volume-growth exponent from (center, r, V(center, r)) rows.

    Per center, the cumulative volumes are differenced into annulus masses
    A(r) = V(r) - V(r/2) before the log-log least squares; the differencing
    cancels the additive lattice-scale transient that otherwise biases the
    slope low at small radii.  The estimate is the mean of per-center slopes.
    """
    by_center: dict[int, list[tuple[float, float]]] = {}
    for center, r, v in table:
        by_center.setdefault(int(center), []).append((float(r), float(v)))
    slopes = []
    for rows in by_center.values():
        rows.sort()
        rs = np.array([r for r, _ in rows])
        vs = np.array([v for _, v in rows])
        ann = np.diff(vs)
        keep = ann > 0
        if keep.sum() < 2:
            continue
        slope, _, _ = fit_loglog(rs[1:][keep], ann[keep])
        slopes.append(slope)
    if not slopes:
        raise ValueError("no center had enough positive annulus masses")
    return float(np.mean(slopes))
