"""Random-walk kernels and Monte-Carlo experiments: trajectory simulation,
cover times and their tails, heat-kernel rows, confinement, exit-time and
heat-diagonal exponent fits, local-time fields, and the local-time
modulus-of-continuity statistic.

Transition rule: P(x,y) = mu_xy / mu_x; the lazy kernel holds with
probability 1/2 and otherwise moves by P.  Sampling is chunked through
per-sample Philox streams (see rng.stream) so every statistic is
reproducible at any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import CapacityError, SpecError
from .fitting import fit_line, fit_loglog
from .graph import (WeightedGraph, bfs_distances, boundary_witnesses, diameter,
                    dyadic_radii)
from .parallel import map_indexed
from .rng import experiment_key, stream

_CHUNK_MIN = 1 << 10
_CHUNK_MAX = 1 << 17

HEAT_BUDGET = 2 ** 27          # vertex_count * t_max cap for materialized rows
DIAG_WORK_BUDGET = 2 ** 33     # matvec-work cap for diagonal-only powering
CONFINE_EXACT_CAP = 50_000     # ball size cap for absorbing-kernel powering
EXIT_EXACT_CAP = 20_000        # ball size cap for exact mean exit solves


@dataclass(frozen=True)
class WalkKernel:
    """A walk on a weighted graph, optionally lazy.

    `cum` holds per-row inclusive cumulative conductances for neighbor
    sampling; rows of the transition matrix sum to one by construction.
    """

    graph: WeightedGraph
    lazy: bool = False
    cum: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.cum is None:
            cum = np.empty_like(self.graph.weights)
            indptr = self.graph.indptr
            for x in range(self.graph.vertex_count):
                lo, hi = indptr[x], indptr[x + 1]
                cum[lo:hi] = np.cumsum(self.graph.weights[lo:hi])
            cum.setflags(write=False)
            object.__setattr__(self, "cum", cum)

    @property
    def unit(self) -> bool:
        return self.graph.unit

    def transition_matrix(self) -> sp.csr_matrix:
        """P (or the lazy P~) as a sparse row-stochastic matrix."""
        g = self.graph
        n = g.vertex_count
        rows = np.repeat(np.arange(n), np.diff(g.indptr))
        probs = g.weights / g.vertex_weight[rows]
        p = sp.csr_matrix((probs, g.indices, g.indptr), shape=(n, n))
        if self.lazy:
            p = 0.5 * p + 0.5 * sp.identity(n, format="csr")
        return p


def _state() -> np.ndarray:
    return np.zeros(6, dtype=np.int64)


def _run_chunks(step_fn, rng, state, max_steps=None):
    """Feed uniform chunks to a stepping closure until it stops consuming.

    Chunks grow geometrically so short walks stay cheap while long ones
    amortize the draw overhead.
    """
    total = 0
    chunk = _CHUNK_MIN
    while True:
        size = chunk if max_steps is None else min(chunk, max_steps - total)
        if size <= 0:
            break
        u = rng.random(size)
        used = step_fn(u)
        total += used
        if state[_kernels.DONE] == 1 or used < size:
            break
        chunk = min(chunk * 4, _CHUNK_MAX)
    return total


# ---------------------------------------------------------------------------
# Trajectories


@dataclass
class Trajectory:
    """One sampled path with its incremental accumulators."""

    start: int
    steps: int
    position: int
    visited: np.ndarray
    uncovered: int
    cover_time: int | None
    visit_counts: np.ndarray | None = None

    @property
    def range_size(self) -> int:
        return int(self.visited.sum())


def simulate(kernel: WalkKernel, start: int, horizon: int, seed: int,
             sample: int = 0, track_visits: bool = True,
             stop_at_cover: bool = False) -> Trajectory:
    """Sample one path of `horizon` steps (fewer if stop_at_cover hits).

    Reproducible: (graph, kernel laziness, start, seed, sample) fixes the
    path bit-exactly.
    """
    if horizon < 0:
        raise SpecError("horizon must be >= 0")
    g = kernel.graph
    n = g.vertex_count
    visited = np.zeros(n, dtype=np.bool_)
    visited[start] = True
    counts = np.zeros(n, dtype=np.int64)
    counts[start] = 1
    state = _state()
    state[_kernels.POS] = start
    state[_kernels.UNCOV] = n - 1
    if n == 1:
        state[_kernels.DONE], state[_kernels.TAU] = 1, 0
    rng = stream(seed, experiment_key("simulate"), sample)

    def step(u):
        return _kernels.walk_fixed(g.indptr, g.indices, kernel.cum, kernel.unit,
                                   kernel.lazy, u, horizon, stop_at_cover,
                                   visited, counts, state)

    _run_chunks(step, rng, state, max_steps=horizon)
    tau = int(state[_kernels.TAU]) if state[_kernels.DONE] else None
    return Trajectory(
        start=start,
        steps=int(state[_kernels.T]),
        position=int(state[_kernels.POS]),
        visited=visited,
        uncovered=int(state[_kernels.UNCOV]),
        cover_time=tau,
        visit_counts=counts if track_visits else None,
    )


# ---------------------------------------------------------------------------
# Cover times


@dataclass(frozen=True)
class CoverSample:
    """Sorted cover-time samples from one start, with per-sample statistics
    derived from first-visit times.

    uncovered[i, j] is the number of unvisited vertices of sample i at grid
    time j; avoid_times[i, k] is the last time some ball of radius
    avoid_radii[k] was still entirely unvisited (the r-ball avoidance time,
    with avoidance of radius 0 equal to tau_cov).
    """

    times: np.ndarray            # sorted tau_cov
    lazy: bool
    start: int
    grid: np.ndarray             # recording times
    uncovered: np.ndarray        # (samples, grid) uncovered counts
    avoid_radii: np.ndarray      # tracked ball radii
    avoid_times: np.ndarray      # (samples, radii)
    ball_refs: np.ndarray        # per radius: sum_y 2^(-|B(y, r)|)
    ball_min_sizes: np.ndarray   # per radius: min_y |B(y, r)|

    @property
    def samples(self) -> int:
        return self.times.shape[0]

    def mean(self) -> float:
        return float(self.times.mean())

    def sd(self) -> float:
        return float(self.times.std(ddof=1)) if self.samples > 1 else 0.0

    def cv(self) -> float:
        m = self.mean()
        return self.sd() / m if m > 0 else 0.0

    def quantile(self, q) -> float:
        return float(np.quantile(self.times, q))

    def survival(self, t) -> np.ndarray:
        """Empirical P(tau_cov > t)."""
        t = np.atleast_1d(t)
        idx = np.searchsorted(self.times, t, side="right")
        return 1.0 - idx / self.samples

    def dkw_band(self, confidence: float = 0.99, comparisons: int = 1) -> float:
        """Uniform DKW half-width at the given confidence (Bonferroni over
        `comparisons` simultaneous uses)."""
        delta = (1.0 - confidence) / comparisons
        return math.sqrt(math.log(2.0 / delta) / (2.0 * self.samples))

    def summary(self) -> dict:
        return {
            "samples": self.samples,
            "lazy": self.lazy,
            "mean": self.mean(),
            "sd": self.sd(),
            "cv": self.cv(),
            "q10": self.quantile(0.10),
            "q50": self.quantile(0.50),
            "q90": self.quantile(0.90),
            "max": float(self.times[-1]),
        }


def _ball_structure(g: WeightedGraph, radii) -> tuple:
    """Concatenated ball membership lists per radius, for reduceat mins."""
    from .graph import ball
    idx_list, ptr_list, refs, min_sizes = [], [], [], []
    for r in radii:
        members = [ball(g, y, int(r)) for y in range(g.vertex_count)]
        sizes = np.array([m.size for m in members], dtype=np.int64)
        idx_list.append(np.concatenate(members))
        ptr_list.append(np.concatenate(([0], np.cumsum(sizes)))[:-1])
        refs.append(float(np.exp2(-sizes.astype(np.float64)).sum()))
        min_sizes.append(int(sizes.min()))
    return idx_list, ptr_list, np.array(refs), np.array(min_sizes, dtype=np.int64)


def cover_time_distribution(kernel: WalkKernel, start: int, samples: int,
                            seed: int, grid: np.ndarray | None = None,
                            avoid_radii=None,
                            threads: int | None = None) -> CoverSample:
    """Sample tau_cov repeatedly from first-visit times, also recording
    uncovered counts at grid times and r-ball avoidance times."""
    if samples < 1:
        raise SpecError("samples must be >= 1")
    g = kernel.graph
    n = g.vertex_count
    grid = np.array([], dtype=np.int64) if grid is None else np.asarray(grid, dtype=np.int64)
    if grid.size and np.any(np.diff(grid) <= 0):
        raise SpecError("grid times must be strictly increasing")
    radii = np.array([] if avoid_radii is None else avoid_radii, dtype=np.int64)
    if radii.size:
        idx_list, ptr_list, refs, min_sizes = _ball_structure(g, radii)
    else:
        idx_list, ptr_list, refs, min_sizes = [], [], np.zeros(0), np.zeros(0, np.int64)
    tag = experiment_key("cover" + ("~" if kernel.lazy else ""))

    def one(i: int):
        rng = stream(seed, tag, i)
        first = np.full(n, -1, dtype=np.int64)
        first[start] = 0
        state = _state()
        state[_kernels.POS] = start
        state[_kernels.UNCOV] = n - 1
        if n == 1:
            state[_kernels.DONE] = 1

        def step(u):
            return _kernels.cover_first_visits(g.indptr, g.indices, kernel.cum,
                                               kernel.unit, kernel.lazy, u,
                                               first, state)

        _run_chunks(step, rng, state)
        u_grid = ((first[None, :] > grid[:, None]).sum(axis=1).astype(np.int64)
                  if grid.size else np.zeros(0, dtype=np.int64))
        v_r = np.zeros(radii.size, dtype=np.int64)
        for k in range(radii.size):
            v_r[k] = np.minimum.reduceat(first[idx_list[k]], ptr_list[k]).max()
        return int(state[_kernels.TAU]), u_grid, v_r

    results = map_indexed(one, samples, threads)
    times = np.sort(np.array([r[0] for r in results], dtype=np.int64))
    uncovered = (np.stack([r[1] for r in results]) if grid.size
                 else np.zeros((samples, 0), np.int64))
    avoid = (np.stack([r[2] for r in results]) if radii.size
             else np.zeros((samples, 0), np.int64))
    return CoverSample(times=times, lazy=kernel.lazy, start=start, grid=grid,
                       uncovered=uncovered, avoid_radii=radii,
                       avoid_times=avoid, ball_refs=refs,
                       ball_min_sizes=min_sizes)


@dataclass(frozen=True)
class TailFit:
    c_0: float
    r2: float
    points: int
    window: tuple


def tail_fit_times(times, t_n: float,
                   survival_window: tuple = (1e-3, 1e-1)) -> TailFit:
    """Fit log P(tau_cov > t) ~ -t/(c_0 T_N) over the upper tail of sorted
    cover-time samples; returns the slope-implied c_0 and the fit R^2."""
    times = np.sort(np.asarray(times, dtype=np.float64))
    m = times.size
    if m < 1000:
        raise SpecError("tail fit needs at least 10^3 samples")
    lo, hi = survival_window
    js = np.arange(1, m)
    surv = 1.0 - js / m
    keep = (surv >= lo) & (surv <= hi)
    ts = times[js[keep] - 1]
    sv = surv[keep]
    if np.unique(ts).size < 3:
        raise SpecError("degenerate tail: not enough distinct cover times in window")
    slope, _, r2 = fit_line(ts / t_n, np.log(sv))
    if slope >= 0:
        raise SpecError("degenerate tail: survival not decreasing")
    return TailFit(c_0=-1.0 / slope, r2=r2, points=int(keep.sum()),
                   window=(float(lo), float(hi)))


def tail_fit(cover: CoverSample, t_n: float,
             survival_window: tuple = (1e-3, 1e-1)) -> TailFit:
    """Tail fit of a CoverSample (see tail_fit_times)."""
    return tail_fit_times(cover.times, t_n, survival_window)


# ---------------------------------------------------------------------------
# Heat kernel rows


def heat_kernel_row(kernel: WalkKernel, x: int, t_max: int) -> np.ndarray:
    """Rows P_t(x, .) for t = 0..t_max as a (t_max+1, n) array.

    p_t(x, y) is recovered as row / mu_y.  Budgeted: n * t_max entries.
    """
    g = kernel.graph
    n = g.vertex_count
    if (t_max + 1) * n > HEAT_BUDGET:
        raise CapacityError("heat-kernel row budget exceeded")
    pt = kernel.transition_matrix().T.tocsr()
    rows = np.zeros((t_max + 1, n))
    v = np.zeros(n)
    v[x] = 1.0
    rows[0] = v
    for t in range(1, t_max + 1):
        v = pt @ v
        rows[t] = v
    return rows


def heat_diagonal(kernel: WalkKernel, x: int, ts: np.ndarray) -> np.ndarray:
    """p~_t(x,x) = P_t(x,x)/mu_x at the requested times (sorted)."""
    g = kernel.graph
    pt = kernel.transition_matrix().T.tocsr()
    v = np.zeros(g.vertex_count)
    v[x] = 1.0
    out = np.zeros(len(ts))
    t_cur = 0
    for i, t in enumerate(ts):
        while t_cur < t:
            v = pt @ v
            t_cur += 1
        out[i] = v[x] / g.vertex_weight[x]
    return out


@dataclass(frozen=True)
class ExponentFit:
    value: float
    r2: float
    table: list


def diagonal_decay_fit(kernel: WalkKernel, x: int,
                       t_n: float | None = None) -> ExponentFit:
    """d_s/2 estimate: minus the slope of log p~_t(x,x) vs log t.

    Requires the lazy kernel (parity); times are dyadic in [8, T_N/4] to stay
    clear of both the lattice transient and saturation.
    """
    if not kernel.lazy:
        raise SpecError("diagonal decay needs the lazy kernel (parity)")
    g = kernel.graph
    if t_n is None:
        t_n = float(diameter(g).value) ** 2
    top = int(t_n / 4)
    ts = [2 ** k for k in range(3, 64) if 2 ** k <= top]
    if len(ts) < 3:
        raise SpecError("insufficient time range for diagonal decay")
    if ts[-1] * g.vertex_count > DIAG_WORK_BUDGET:
        raise CapacityError("diagonal decay budget exceeded")
    ts = np.array(ts, dtype=np.int64)
    diag = heat_diagonal(kernel, x, ts)
    slope, _, r2 = fit_loglog(ts, diag)
    return ExponentFit(value=-slope, r2=r2,
                       table=[(int(t), float(d)) for t, d in zip(ts, diag)])


# ---------------------------------------------------------------------------
# Confinement


def confinement_probability(kernel: WalkKernel, x: int, r: int, t: int,
                            samples: int = 0, seed: int = 0,
                            threads: int | None = None) -> tuple[float, float]:
    """P_x(max_{j<=t} d(x, X_j) <= r), with standard error.

    Exact absorbing-kernel powering when the ball holds <= CONFINE_EXACT_CAP
    vertices (stderr 0); Monte Carlo otherwise.
    """
    if r < 0:
        raise SpecError("radius must be >= 0")
    g = kernel.graph
    if t == 0:
        return 1.0, 0.0
    dist = bfs_distances(g, x)
    if r >= dist.max():
        return 1.0, 0.0
    members = np.flatnonzero(dist <= r)
    if members.size <= CONFINE_EXACT_CAP:
        p = kernel.transition_matrix()
        q = p[members][:, members].T.tocsr()
        v = np.zeros(members.size)
        v[np.searchsorted(members, x)] = 1.0
        for _ in range(t):
            v = q @ v
        return float(v.sum()), 0.0
    if samples < 1:
        raise SpecError("MC confinement needs samples >= 1")
    tag = experiment_key("confine")

    def one(i: int) -> int:
        rng = stream(seed, tag, i)
        state = _state()
        state[_kernels.POS] = x

        def step(u):
            return _kernels.confined(g.indptr, g.indices, kernel.cum, kernel.unit,
                                     kernel.lazy, u, dist, r, t, state)

        _run_chunks(step, rng, state, max_steps=t)
        return 0 if state[_kernels.DONE] else 1

    hits = np.array(map_indexed(one, samples, threads))
    phat = float(hits.mean())
    return phat, math.sqrt(max(phat * (1 - phat), 1e-12) / samples)


# ---------------------------------------------------------------------------
# Exit times and the walk exponent


def mean_exit_time(kernel: WalkKernel, x: int, r: int, samples: int = 0,
                   seed: int = 0, threads: int | None = None) -> tuple[float, float]:
    """E_x[first time the walk leaves B(x, r)], with standard error.

    Exact linear solve (I - Q) h = 1 on the ball when it has at most
    EXIT_EXACT_CAP vertices, else Monte Carlo.
    """
    g = kernel.graph
    dist = bfs_distances(g, x)
    members = np.flatnonzero(dist <= r)
    if members.size == g.vertex_count:
        raise SpecError("ball covers the whole graph; exit undefined")
    if members.size <= EXIT_EXACT_CAP:
        p = kernel.transition_matrix()
        q = p[members][:, members].tocsc()
        eye = sp.identity(members.size, format="csc")
        h = sp.linalg.spsolve(eye - q, np.ones(members.size))
        return float(h[np.searchsorted(members, x)]), 0.0
    if samples < 1:
        raise SpecError("MC exit needs samples >= 1")
    in_ball = dist <= r
    tag = experiment_key("exit")

    def one(i: int) -> int:
        rng = stream(seed, tag, i)
        state = _state()
        state[_kernels.POS] = x

        def step(u):
            return _kernels.exit_time(g.indptr, g.indices, kernel.cum, kernel.unit,
                                      kernel.lazy, u, in_ball, state)

        _run_chunks(step, rng, state)
        return int(state[_kernels.TAU])

    taus = np.array(map_indexed(one, samples, threads), dtype=np.float64)
    return float(taus.mean()), float(taus.std(ddof=1) / math.sqrt(samples))


def exit_time_scaling(kernel: WalkKernel, centers: int = 12, seed: int = 0,
                      samples: int = 10_000,
                      threads: int | None = None) -> ExponentFit:
    """d_w estimate over dyadic radii <= R_N/4 from sampled interior centers.

    Fits log E[tau_exit(B(x, r))] against the log exit distance r + 1 (the
    walk leaves the ball on first reaching distance r + 1, and the fit is
    exact for diffusive chains with that abscissa).
    """
    g = kernel.graph
    r_n = diameter(g).value
    radii = dyadic_radii(r_n)
    rng = stream(seed, experiment_key("exitscale"))
    eligible = np.ones(g.vertex_count, dtype=bool)
    for w in boundary_witnesses(g):
        eligible &= bfs_distances(g, w) > int(radii[-1])
    pool = np.flatnonzero(eligible)
    if pool.size == 0:
        pool = np.arange(g.vertex_count)
    xs = (pool if centers >= pool.size
          else np.sort(rng.choice(pool, size=centers, replace=False)))
    table = []
    means = []
    for r in radii:
        vals = []
        for x in xs:
            m, se = mean_exit_time(kernel, int(x), int(r), samples=samples,
                                   seed=seed + int(x), threads=threads)
            vals.append(m)
            table.append((int(r), float(m), float(se)))
        means.append(np.mean(vals))
    slope, _, r2 = fit_loglog(radii + 1, np.array(means))
    return ExponentFit(value=slope, r2=r2, table=table)


# ---------------------------------------------------------------------------
# Local times


@dataclass(frozen=True)
class LocalTimeField:
    values: np.ndarray           # Lhat_t(x)
    norm: float                  # r(G)
    t: int


def local_time_field(traj: Trajectory, g: WeightedGraph,
                     resistance_diameter: float) -> LocalTimeField:
    """Normalized local times Lhat_t(x) = visits_{<t}(x) / (r(G) mu_x).

    Counts visits among X_0..X_{t-1} (the final state is excluded), so
    sum_x Lhat_t(x) r(G) mu_x = t holds exactly.
    """
    if traj.visit_counts is None:
        raise SpecError("trajectory lacks visit counts")
    counts = traj.visit_counts.astype(np.float64).copy()
    counts[traj.position] -= 1.0
    values = counts / (resistance_diameter * g.vertex_weight)
    return LocalTimeField(values=values, norm=resistance_diameter, t=traj.steps)


# ---------------------------------------------------------------------------
# Modulus of continuity of local times


@dataclass(frozen=True)
class ModulusCurve:
    lambdas: np.ndarray
    probability: np.ndarray
    kappa: float
    phi: float
    pairs: int


def modulus_of_continuity_stat(kernel: WalkKernel, norm_resistance: np.ndarray,
                               resistance_diameter: float, kappa: float,
                               horizon: int, samples: int, seed: int,
                               lambdas=None,
                               threads: int | None = None) -> ModulusCurve:
    """Empirical curve: lambda -> P(max_{t<=horizon} osc(Lhat_t) >= lambda phi(kappa)).

    osc is the maximum of |Lhat_t(x) - Lhat_t(y)| over pairs with normalized
    resistance <= kappa; phi(kappa) = sqrt(kappa (1 + |log kappa|)).
    norm_resistance is the pairwise R_eff/r(G) matrix, resistance_diameter
    the r(G) used in the local-time normalization.
    """
    if not (0 < kappa <= 1):
        raise SpecError("kappa must lie in (0, 1]")
    g = kernel.graph
    n = g.vertex_count
    close = (norm_resistance <= kappa) & ~np.eye(n, dtype=bool)
    pair_ptr = np.zeros(n + 1, dtype=np.int64)
    pair_ptr[1:] = np.cumsum(close.sum(axis=1))
    pair_idx = np.concatenate([np.flatnonzero(close[x]) for x in range(n)]) \
        if pair_ptr[-1] else np.zeros(0, dtype=np.int64)
    inv_norm = 1.0 / (resistance_diameter * g.vertex_weight)
    phi = math.sqrt(kappa * (1.0 + abs(math.log(kappa))))
    if lambdas is None:
        lambdas = np.linspace(0.0, 4.0, 33)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    tag = experiment_key("modulus")

    def one(i: int) -> float:
        rng = stream(seed, tag, i)
        start = int(rng.integers(n))
        counts = np.zeros(n, dtype=np.int64)
        lhat = np.zeros(n, dtype=np.float64)
        state = _state()
        state[_kernels.POS] = start
        best = 0.0
        total = 0
        while total < horizon:
            u = rng.random(min(_CHUNK_MAX, horizon - total))
            used, b = _kernels.local_time_oscillation(
                g.indptr, g.indices, kernel.cum, kernel.unit, kernel.lazy, u,
                horizon, inv_norm, pair_ptr, pair_idx, counts, lhat, state)
            best = max(best, b)
            total += used
            if used < u.shape[0]:
                break
        return best

    maxima = np.array(map_indexed(one, samples, threads))
    probs = np.array([(maxima >= lam * phi).mean() for lam in lambdas])
    return ModulusCurve(lambdas=lambdas, probability=probs, kappa=kappa,
                        phi=phi, pairs=int(pair_ptr[-1] // 2))
