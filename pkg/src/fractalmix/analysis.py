"""Cross-cutting experiment drivers: lamplighter mixing profiles with
certified envelopes, the cover-time concentration comparison, range-covers-
resistance-ball checks, transience diagnostics, and the dichotomy report.

Every driver is a deterministic function of (graph spec, seed, budgets); the
report verdicts are pure functions of the collected statistics so they can
be recomputed from stored artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lamplighter as ll
from .errors import CapacityError, SpecError
from .generators import GasketSpec, TorusSpec, build_from_spec, classify_regime
from .graph import (WeightedGraph, ball, bfs_distances, boundary_witnesses,
                    diameter)
from .resistance import (laplacian_system, resistance_summary, spectral_cache,
                         truncated_green, uniform_mixing_time, UNIFORM_MIX_CAP,
                         ResistanceSummary, resistance_ball)
from .rng import experiment_key, stream
from .walks import WalkKernel, cover_time_distribution
from . import _kernels


DEFAULT_EPS_GRID = (0.02, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9)


# ---------------------------------------------------------------------------
# Exact cover tails on tiny graphs (oracle-grade input to the upper bound)


def exact_cover_tail(kernel: WalkKernel, start: int, horizon: int) -> np.ndarray:
    """P(tau_cov > t) for t = 0..horizon by powering the (position, visited-
    set) chain; tractable for ~12 vertices."""
    g = kernel.graph
    n = g.vertex_count
    if n > 14:
        raise CapacityError("exact cover tail is for tiny graphs")
    import scipy.sparse as sp
    size = n * (1 << n)
    p = kernel.transition_matrix().tocoo()
    rows, cols, vals = [], [], []
    for x, y, w in zip(p.row, p.col, p.data):
        for mask in range(1 << n):
            if not (mask >> x) & 1:
                continue
            rows.append(x * (1 << n) + mask)
            cols.append(y * (1 << n) + (mask | (1 << y)))
            vals.append(w)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    full = (1 << n) - 1
    covered = np.zeros(size, dtype=bool)
    for x in range(n):
        covered[x * (1 << n) + full] = True
    v = np.zeros(size)
    v[start * (1 << n) + (1 << start)] = 1.0
    tail = np.zeros(horizon + 1)
    tail[0] = 1.0 - v[covered].sum()
    for t in range(1, horizon + 1):
        v = mat.T @ v
        tail[t] = max(0.0, 1.0 - v[covered].sum())
    return tail


def exact_expected_cover(kernel: WalkKernel, start: int,
                         tol: float = 1e-12) -> float:
    """E[tau_cov] = sum_t P(tau_cov > t), truncated at tolerance."""
    horizon = 64
    total = 0.0
    while True:
        tail = exact_cover_tail(kernel, start, horizon)
        total = float(tail.sum())
        if tail[-1] < tol:
            return total
        if horizon > 1 << 22:
            raise CapacityError("cover expectation did not truncate")
        horizon *= 4


# ---------------------------------------------------------------------------
# Tracked-ball selection for the dark-ball discriminator


def avoidance_radii(g: WeightedGraph, ref_cap: float = 5e-3,
                    max_radii: int = 3) -> list[int]:
    """Ball radii for the dark-ball discriminator: the smallest radii whose
    union-bound stationary mass sum_y 2^(-|B(y,r)|) is below ref_cap."""
    r_n = diameter(g).value
    chosen = []
    for r in range(1, max(2, r_n // 2)):
        sizes = np.array([ball(g, y, r).size for y in range(g.vertex_count)],
                         dtype=np.float64)
        if np.exp2(-sizes).sum() <= ref_cap:
            chosen.append(r)
        if len(chosen) >= max_radii:
            break
    return chosen


# ---------------------------------------------------------------------------
# Lamplighter mixing profile for one graph level


def default_time_grid(t_n: float, top_factor: float = 120.0,
                      points: int = 72) -> np.ndarray:
    """Geometric grid from T_N/8 to top_factor*T_N (deduplicated ints)."""
    lo = max(1.0, t_n / 8.0)
    hi = max(lo * 2.0, top_factor * t_n)
    grid = np.unique(np.round(np.geomspace(lo, hi, points)).astype(np.int64))
    return grid[grid >= 1]


def mixing_profile_bounds(g: WeightedGraph, t_n: float, s_n: float,
                          samples: int, seed: int,
                          radii: list[int] | None = None,
                          grid: np.ndarray | None = None,
                          eps_grid=DEFAULT_EPS_GRID,
                          extra_starts: int = 2,
                          confidence: float = 0.99,
                          threads: int | None = None) -> tuple:
    """Certified lamplighter TV envelopes on one graph.

    Lower bounds per grid time: the best of the zero-lamp-count statistic
    and the unvisited-ball (dark-ball) statistics over the chosen radii,
    Bonferroni-corrected across every simultaneous use at the given
    confidence.  Upper bounds: a cover-tail family (the plain tail with a
    DKW band, maxed over spread starts, and the sharper conditional-lamp
    term E[1 - 2^(-U_t)]) plus min(sqrt(S_N)/(2 sqrt t), spectral walk-TV
    bound).  Returns (TvProfile, cover_sample, t_mix dict, details).
    """
    kernel = WalkKernel(g, lazy=True)
    if grid is None:
        grid = default_time_grid(t_n)
    if radii is None:
        radii = avoidance_radii(g)
    start = int(boundary_witnesses(g)[0])

    comparisons = (3 + len(radii)) * grid.size
    cover = cover_time_distribution(kernel, start, samples, seed, grid=grid,
                                    avoid_radii=radii, threads=threads)

    lower = np.zeros(grid.size)
    for j, t in enumerate(grid):
        best = ll.tv_lower_bound_statistic(cover.uncovered[:, j],
                                           g.vertex_count,
                                           seed=seed + 17 * j + 1,
                                           confidence=confidence,
                                           comparisons=comparisons).certified
        for k in range(len(radii)):
            db = ll.tv_lower_bound_unvisited_ball(
                cover.avoid_times[:, k], float(cover.ball_refs[k]), int(t),
                confidence=confidence, comparisons=comparisons)
            best = max(best, db.certified)
        lower[j] = best

    # upper envelope: worst over a few spread starts
    tails = [cover]
    wits = boundary_witnesses(g)
    others = [w for w in wits[1:] if w != start][:extra_starts]
    for i, alt in enumerate(others):
        tails.append(cover_time_distribution(
            kernel, int(alt), max(samples // 2, 1000), seed + 1000 + i,
            grid=grid, threads=threads))
    spect = None
    if g.vertex_count <= UNIFORM_MIX_CAP:
        spect = spectral_cache(kernel)
    upper = np.zeros(grid.size)
    for j, t in enumerate(grid):
        band = max(c.dkw_band(confidence=confidence, comparisons=comparisons)
                   for c in tails)
        lamp_term = max(
            min(min(1.0, float(c.survival(int(t))[0]) + band),
                ll.conditional_lamp_term(c.uncovered[:, j], band))
            for c in tails)
        walk_term = math.sqrt(s_n) / (2.0 * math.sqrt(t))
        if spect is not None:
            walk_term = min(walk_term, spect.walk_tv_bound(int(t)))
        upper[j] = min(1.0, lamp_term + walk_term)

    profile = ll.TvProfile(ts=grid, lower=lower, upper=upper)
    t_mix = {}
    for eps in eps_grid:
        t_mix[eps] = {"lower": profile.t_mix_lower(eps),
                      "upper": profile.t_mix_upper(eps)}
    details = {
        "avoid_radii": [int(r) for r in radii],
        "ball_refs": [float(r) for r in cover.ball_refs],
        "starts": [start] + [int(a) for a in others],
        "confidence": confidence,
        "comparisons": comparisons,
        "samples": samples,
    }
    return profile, cover, t_mix, details


def mixing_profile_exact(g: WeightedGraph, t_max: int, s_n: float,
                         eps_grid=DEFAULT_EPS_GRID,
                         seed: int = 0, samples: int = 4000,
                         threads: int | None = None) -> tuple:
    """Exact TV profile plus the certified bounds, for tiny graphs."""
    kernel = WalkKernel(g, lazy=True)
    wreath = ll.WreathKernel(kernel)
    n = g.vertex_count
    start = ll.LamplighterState(np.zeros(n, dtype=np.bool_), 0)
    prof = ll.exact_tv_profile(wreath, start, t_max)
    ts = prof.ts
    tail = exact_cover_tail(kernel, 0, t_max)
    upper = np.ones(t_max + 1)
    for t in range(1, t_max + 1):
        upper[t] = ll.tv_upper_bound(lambda s: tail[s], s_n, t).basic
    grid = ts[1:]
    cover = cover_time_distribution(kernel, 0, samples, seed, grid=grid,
                                    threads=threads)
    lower = np.zeros(t_max + 1)
    comparisons = grid.size
    for j, t in enumerate(grid):
        zc = ll.tv_lower_bound_statistic(cover.uncovered[:, j], n,
                                         seed=seed + 31 * j,
                                         comparisons=comparisons)
        lower[int(t)] = zc.certified
    prof.lower = lower
    prof.upper = upper
    t_mix = {}
    for eps in eps_grid:
        t_mix[eps] = {"lower": prof.t_mix_lower(eps),
                      "upper": prof.t_mix_upper(eps),
                      "exact": prof.t_mix_exact(eps)}
    return prof, cover, t_mix


# ---------------------------------------------------------------------------
# Concentration experiment


@dataclass(frozen=True)
class ConcentrationRow:
    label: str
    n: int
    samples: int
    mean: float
    sd: float
    cv: float
    cv_lo: float
    cv_hi: float


def _bootstrap_cv(times: np.ndarray, seed: int, reps: int = 1000,
                  level: float = 0.95) -> tuple:
    rng = stream(seed, experiment_key("bootstrap"))
    m = times.size
    idx = rng.integers(0, m, size=(reps, m))
    draws = times[idx]
    means = draws.mean(axis=1)
    sds = draws.std(axis=1, ddof=1)
    cvs = sds / means
    alpha = (1.0 - level) / 2.0
    return float(np.quantile(cvs, alpha)), float(np.quantile(cvs, 1.0 - alpha))


def concentration_experiment(specs, samples: int, seed: int, lazy: bool = False,
                             threads: int | None = None) -> list[ConcentrationRow]:
    """Coefficient of variation of tau_cov per graph, with bootstrap CIs."""
    if samples < 1000:
        raise SpecError("concentration experiment needs >= 10^3 samples")
    rows = []
    for i, spec in enumerate(specs):
        g = build_from_spec(spec)
        kernel = WalkKernel(g, lazy=lazy)
        start = int(boundary_witnesses(g)[0])
        cover = cover_time_distribution(kernel, start, samples, seed + i,
                                        threads=threads)
        lo, hi = _bootstrap_cv(cover.times.astype(np.float64), seed + i)
        rows.append(ConcentrationRow(
            label=spec.describe(), n=g.vertex_count, samples=samples,
            mean=cover.mean(), sd=cover.sd(), cv=cover.cv(), cv_lo=lo, cv_hi=hi))
    return rows


# ---------------------------------------------------------------------------
# Range covers resistance balls


@dataclass(frozen=True)
class RangeCoverResult:
    kappa: float
    t: int
    s_n: float
    envelope: float
    worst_probability: float
    worst_stderr: float
    rows: list


def range_covers_resistance_ball(g: WeightedGraph, summary: ResistanceSummary,
                                 kappa: float, t: int, samples: int, seed: int,
                                 anchors: int = 6, starts: int = 2,
                                 threads: int | None = None) -> RangeCoverResult:
    """P(Range_t does not contain B_R(x, kappa)) for worst sampled (x, z),
    against the 2^(1 - t/(4 S_N)) envelope (non-lazy walk)."""
    kernel = WalkKernel(g, lazy=False)
    n = g.vertex_count
    rng = stream(seed, experiment_key("rangecover"))
    xs = rng.choice(n, size=min(anchors, n), replace=False)
    zs = rng.choice(n, size=min(starts, n), replace=False)
    rows = []
    worst = (0.0, 0.0)
    from .walks import _state, _run_chunks
    for x in xs:
        target_ids = resistance_ball(summary, int(x), kappa)
        target = np.zeros(n, dtype=np.bool_)
        target[target_ids] = True
        for z in zs:
            tag = experiment_key(f"rangecover:{x}:{z}")

            def one(i: int) -> int:
                rs = stream(seed, tag, i)
                visited = np.zeros(n, dtype=np.bool_)
                visited[z] = True
                state = _state()
                state[_kernels.POS] = int(z)
                state[_kernels.UNCOV] = int(target.sum() - (1 if target[z] else 0))
                if state[_kernels.UNCOV] == 0:
                    return 0

                def step(u):
                    return _kernels.cover_target(
                        g.indptr, g.indices, kernel.cum, kernel.unit,
                        kernel.lazy, u, target, t, visited, state)

                _run_chunks(step, rs, state, max_steps=t)
                return 0 if state[_kernels.UNCOV] == 0 else 1

            from .parallel import map_indexed
            miss = np.array(map_indexed(one, samples, threads), dtype=np.float64)
            p = float(miss.mean())
            se = float(miss.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
            rows.append((int(x), int(z), int(target.sum()), p, se))
            if p > worst[0]:
                worst = (p, se)
    envelope = min(1.0, 2.0 ** (1.0 - t / (4.0 * summary.s_n)))
    return RangeCoverResult(kappa=kappa, t=t, s_n=summary.s_n, envelope=envelope,
                            worst_probability=worst[0], worst_stderr=worst[1],
                            rows=rows)


# ---------------------------------------------------------------------------
# Transience diagnostics (uniform local transience, weight regularity)


def _complete_cover_moments(n: int) -> tuple[float, float]:
    """Exact mean and CV of the lazy cover time on K_n (independent
    geometric discovery stages)."""
    vs = np.arange(1, n, dtype=np.float64)
    p = (n - vs) / (2.0 * (n - 1.0))
    mean = float((1.0 / p).sum())
    var = float(((1.0 - p) / p ** 2).sum())
    return mean, math.sqrt(var) / mean


def dichotomy_report(family: str, levels, samples: int, seed: int,
                     eps_grid=DEFAULT_EPS_GRID, thresholds: dict | None = None,
                     threads: int | None = None) -> dict:
    """Run the dichotomy experiment for one graph family.

    family: "gasket" (strongly recurrent), "complete" (exchangeable exact
    cutoff baseline), "torus:d=D" (transient for D >= 3, critical for D = 2,
    indirect evidence), or "carpet:L=..,b=..,d=.." (regime from the hole
    criterion; indirect evidence).
    """
    from .walks import tail_fit as fit_tail
    config = {"config-version": 1, "family": family,
              "levels": [int(x) for x in levels], "samples": samples,
              "seed": seed, "eps_grid": [float(e) for e in eps_grid]}
    rows: list[dict] = []
    profiles: dict[str, ll.TvProfile] = {}
    covers: dict[str, object] = {}

    if family == "complete":
        regime = "transient"
        for n in levels:
            tmix, curve = ll.exchangeable_mixing_times(
                int(n), [e for e in eps_grid if 0.1 <= e <= 0.9])
            mean, cv = _complete_cover_moments(int(n))
            half = 0.5 * mean
            rows.append({
                "spec": f"complete:n={n}", "level": int(n), "n": int(n),
                "r_n": 1, "t_n": float(n), "s_n": None,
                "cover": {"mean": mean, "cv": cv, "exact": True},
                "half_cover": half,
                "t_mix": {str(e): {"exact": t} for e, t in tmix.items()},
            })
            profiles[f"complete:n={n}"] = ll.TvProfile(
                ts=np.array([c[0] for c in curve]),
                exact=np.array([c[1] for c in curve]))
    elif family == "gasket":
        regime = "strongly_recurrent"
        for level in levels:
            spec = GasketSpec(level=int(level))
            g = build_from_spec(spec)
            r_n = diameter(g).value
            t_n = float(r_n) ** spec.d_w
            summ = resistance_summary(laplacian_system(g))
            prof, cover, tmix, details = mixing_profile_bounds(
                g, t_n, summ.s_n, samples=samples, seed=seed + int(level),
                eps_grid=eps_grid, threads=threads)
            tf = None
            if cover.samples >= 1000:
                try:
                    fitted = fit_tail(cover, t_n)
                    tf = {"c_0": fitted.c_0, "r2": fitted.r2,
                          "points": fitted.points}
                except SpecError:
                    tf = None
            rows.append({
                "spec": spec.describe(), "level": int(level),
                "n": g.vertex_count, "r_n": r_n, "t_n": t_n, "s_n": summ.s_n,
                "cover": cover.summary(), "tail_fit": tf,
                "half_cover": 0.5 * cover.mean(),
                "t_mix": {str(e): dict(v) for e, v in tmix.items()},
                "details": details,
            })
            profiles[spec.describe()] = prof
            covers[spec.describe()] = cover
    elif family.startswith("torus") or family.startswith("carpet"):
        if family.startswith("torus"):
            dim = int(family.split("d=")[1]) if "d=" in family else 3
            specs = [TorusSpec(dim=dim, side=int(s)) for s in levels]
        else:
            from .generators import parse_spec
            params = family.split(":", 1)[1]
            specs = [parse_spec(f"carpet:{params},level={lv}") for lv in levels]
        regime = classify_regime(specs[0]).kind
        kernel_rows = concentration_experiment(specs, max(samples, 1000),
                                               seed, threads=threads)
        for spec, crow in zip(specs, kernel_rows):
            rows.append({
                "spec": spec.describe(), "level": None, "n": crow.n,
                "cover": {"mean": crow.mean, "cv": crow.cv,
                          "cv_lo": crow.cv_lo, "cv_hi": crow.cv_hi},
            })
        checks = {"cv": [r["cover"]["cv"] for r in rows],
                  "regime": regime}
        decreasing = all(checks["cv"][i + 1] < checks["cv"][i]
                         for i in range(len(checks["cv"]) - 1))
        checks["ok_cv_decreasing"] = decreasing
        if regime == "critical":
            verdict = "inconclusive/critical"
        elif regime == "transient" and decreasing:
            verdict = "cutoff evidence (indirect)"
        else:
            verdict = "inconclusive"
        return {"config": config, "family": family, "regime": regime,
                "levels": rows, "verdict": verdict, "checks": checks,
                "profiles": profiles}
    else:
        raise SpecError(f"unknown dichotomy family {family!r}")

    verdict, checks = dichotomy_verdict(regime, rows, thresholds)
    return {"config": config, "family": family, "regime": regime,
            "levels": rows, "verdict": verdict, "checks": checks,
            "profiles": profiles, "covers": covers}


DEFAULT_THRESHOLDS = {
    # no-cutoff evidence (strongly recurrent families)
    "bracket_ratio_min": 1.2,        # t_lower(eps_low) / t_upper(0.5) per level
    "lower_growth_min": 2.0,         # t_lower(eps_low) / t_lower(0.5) per level
    "upper_spread_max": 3.0,         # max/min of t_upper(0.5)/T_N across levels
    "eps_low": 0.02,
    # cutoff evidence (transient / exchangeable families)
    "window_tolerance": 0.30,        # |t_mix(0.5)/(T_cov/2) - 1| at top level
}


def dichotomy_verdict(regime: str, level_stats: list[dict],
                      thresholds: dict | None = None) -> tuple[str, dict]:
    """Deterministic verdict from collected per-level statistics.

    Pure function of its inputs, so verdicts can be recomputed bit-exactly
    from a stored report.
    """
    thr = dict(DEFAULT_THRESHOLDS)
    if thresholds:
        thr.update(thresholds)
    checks: dict = {"thresholds": thr, "regime": regime}
    if regime == "critical":
        checks["reason"] = "outside the dichotomy hypotheses (d_s = 2)"
        return "inconclusive/critical", checks
    if regime == "strongly_recurrent":
        eps_low = thr["eps_low"]
        ratios, growths, uppers = [], [], []
        for row in level_stats:
            tm = row["t_mix"]
            lo = tm[str(eps_low)]["lower"]
            up = tm["0.5"]["upper"]
            lo5 = tm["0.5"]["lower"]
            if lo is None or up is None or lo5 is None or lo5 == 0:
                checks["reason"] = "missing brackets"
                return "inconclusive", checks
            ratios.append(lo / up)
            growths.append(lo / lo5)
            uppers.append(up / row["t_n"])
        checks["bracket_ratios"] = ratios
        checks["lower_growths"] = growths
        checks["upper_over_tn"] = uppers
        ok_ratio = all(r >= thr["bracket_ratio_min"] for r in ratios)
        ok_growth = all(v >= thr["lower_growth_min"] for v in growths)
        ok_spread = max(uppers) / min(uppers) <= thr["upper_spread_max"]
        checks.update({"ok_ratio": ok_ratio, "ok_growth": ok_growth,
                       "ok_spread": ok_spread})
        if ok_ratio and ok_growth and ok_spread:
            return "no-cutoff evidence", checks
        return "inconclusive", checks
    # transient-side evidence: shrinking relative window around half cover
    windows, centers = [], []
    for row in level_stats:
        tm = row["t_mix"]
        t25 = tm["0.25"].get("exact") or tm["0.25"].get("upper")
        t75 = tm["0.75"].get("exact") or tm["0.75"].get("lower")
        t50 = tm["0.5"].get("exact") or tm["0.5"].get("upper")
        half = row.get("half_cover")
        if None in (t25, t75, t50) or not half:
            checks["reason"] = "missing exact windows"
            return "inconclusive", checks
        windows.append(t25 / t75)
        centers.append(t50 / half)
    checks["window_ratios"] = windows
    checks["centers_over_half_cover"] = centers
    ok_shrink = all(windows[i + 1] < windows[i] for i in range(len(windows) - 1))
    ok_center = abs(centers[-1] - 1.0) <= thr["window_tolerance"]
    ok_toward = all(centers[i + 1] >= centers[i] for i in range(len(centers) - 1)) \
        if centers[-1] < 1.0 else True
    checks.update({"ok_shrink": ok_shrink, "ok_center": ok_center,
                   "ok_toward": ok_toward})
    if ok_shrink and ok_center and ok_toward:
        return "cutoff evidence", checks
    return "inconclusive", checks


@dataclass(frozen=True)
class TransienceDiagnostics:
    mu_total: float
    delta_ratio: float
    max_log_ball: float
    t_mix_uniform: int | None
    t_mix_proxy: float | None
    green_decay: list          # (distance, g(x, A)) rows
    green_monotone: bool


def mp12_diagnostics(g: WeightedGraph, t_n: float, seed: int = 0,
                     set_radius: int = 1, eps: float = 0.25,
                     proxy_factor: float | None = None) -> TransienceDiagnostics:
    """Numeric checks of the transient-case hypotheses: total weight growth,
    weight regularity Delta(G), local volume vs global mass, uniform mixing
    time (or a c*T_N proxy above the cap), and decay of g(x, A) in d(x, A).
    """
    kernel = WalkKernel(g, lazy=True)
    n = g.vertex_count
    mu_total = g.total_weight
    delta = float(g.vertex_weight.max() / g.vertex_weight.min())
    r_small = 2
    sizes = []
    rng = stream(seed, experiment_key("mp12"))
    for x in rng.choice(n, size=min(64, n), replace=False):
        sizes.append(ball(g, int(x), r_small).size)
    max_log_ball = float(np.log(max(sizes)))
    tmu = None
    proxy = None
    if n <= UNIFORM_MIX_CAP:
        tmu = uniform_mixing_time(kernel, eps)
        horizon = tmu
    else:
        if proxy_factor is None:
            raise SpecError("above the uniform-mixing cap a proxy factor "
                            "calibrated at smaller levels is required")
        proxy = proxy_factor * t_n
        horizon = int(math.ceil(proxy))
    # g(x, A) for a fixed small set A and anchors x at growing distances
    a_center = int(boundary_witnesses(g)[0])
    a_set = ball(g, a_center, set_radius)
    dist = bfs_distances(g, a_center)
    dmax = int(dist.max())
    targets = []
    for d in np.unique(np.geomspace(2, max(3, dmax - set_radius - 1), 6)
                       .astype(np.int64)):
        cand = np.flatnonzero(dist == d)
        if cand.size:
            targets.append(int(cand[0]))
    rows = []
    for x in targets:
        green_row = truncated_green(kernel, x, horizon)
        val = float(green_row[a_set].sum())
        rows.append((int(dist[x]) - set_radius, val))
    vals = [v for _, v in rows]
    monotone = all(vals[i + 1] <= vals[i] + 1e-12 for i in range(len(vals) - 1))
    return TransienceDiagnostics(
        mu_total=mu_total, delta_ratio=delta, max_log_ball=max_log_ball,
        t_mix_uniform=tmu, t_mix_proxy=proxy, green_decay=rows,
        green_monotone=monotone)
