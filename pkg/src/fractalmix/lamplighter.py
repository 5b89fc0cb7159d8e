"""The switch-walk-switch lamplighter chain on Z_2 wr G.

A move first re-randomizes the lamp at the current vertex, then performs one
lazy-walk step, then re-randomizes the lamp at the landing vertex, so

    P*((f,x),(g,y)) = 1/4            if x = y and g = f off x,
                    = 1/8 P(x,y)     if y ~ x and g = f off {x, y},

with invariant law pi*(f,x) = 2^{-n} pi(x).  Exact total-variation profiles
power a dense distribution over the 2^n * n states; large graphs go through
the collapsed representation (visited set, position): conditionally on the
driving walk, lamps on the visited set are i.i.d. uniform and lamps off it
keep their initial values.  Convention: the visited set at time t includes
X_0..X_t; at t = 0 this intentionally treats the start lamp as randomized,
which differs from the exact chain only at t = 0.

TV bounds: the upper bound is the cover-tail + lazy-walk-TV decomposition
(with sqrt(S_N)/(2 sqrt(t)) as the distribution-free walk term); certified
lower bounds come from statistics of the collapsed state (zero-lamp count
against Binomial(n, 1/2), and the dark-ball family generalizing the
all-lamps-off-ball event).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import binom

from .errors import CapacityError, SpecError
from .graph import WeightedGraph, ball, diameter
from .parallel import map_indexed
from .rng import experiment_key, stream
from .walks import CoverSample, WalkKernel, simulate

EXACT_STATE_CAP = 2 ** 20 * 20
EXCHANGEABLE_CAP = 10_000
ZEROBALL_FULL_SCAN_CAP = 100_000


@dataclass
class LamplighterState:
    lamps: np.ndarray          # bool, length n
    position: int

    def copy(self) -> "LamplighterState":
        return LamplighterState(self.lamps.copy(), self.position)


@dataclass(frozen=True)
class WreathKernel:
    """Lamplighter chain driven by a lazy walk kernel."""

    base: WalkKernel

    def __post_init__(self):
        if not self.base.lazy:
            raise SpecError("the lamplighter chain is driven by the lazy walk")

    @property
    def graph(self) -> WeightedGraph:
        return self.base.graph

    @property
    def lamp_states(self) -> int:
        return 2 ** self.graph.vertex_count


def sws_step(kernel: WreathKernel, state: LamplighterState,
             rng: np.random.Generator) -> LamplighterState:
    """One switch-walk-switch move (direct simulation)."""
    g = kernel.graph
    out = state.copy()
    x = out.position
    out.lamps[x] = rng.random() < 0.5
    u = rng.random()
    if u >= 0.5:
        lo, hi = g.indptr[x], g.indptr[x + 1]
        w = (2.0 * (u - 0.5)) * g.vertex_weight[x]
        cum = np.cumsum(g.weights[lo:hi])
        x = int(g.indices[lo + int(np.searchsorted(cum, w, side="right"))])
        out.position = x
    out.lamps[x] = rng.random() < 0.5
    return out


# ---------------------------------------------------------------------------
# Exact dense evolution


def _check_state_cap(n: int) -> None:
    if 2 ** n * n > EXACT_STATE_CAP:
        raise CapacityError(f"wreath state space 2^{n}*{n} exceeds the exact cap")


def wreath_stationary(kernel: WreathKernel) -> np.ndarray:
    """pi* as a (2^n, n) array."""
    g = kernel.graph
    n = g.vertex_count
    _check_state_cap(n)
    pi = g.vertex_weight / g.total_weight
    return np.tile(pi, (2 ** n, 1)) / 2 ** n


def wreath_apply(kernel: WreathKernel, dist: np.ndarray) -> np.ndarray:
    """One exact step of the wreath chain on a dense (2^n, n) distribution."""
    g = kernel.graph
    n = g.vertex_count
    nf = dist.shape[0]
    flips = [np.arange(nf) ^ (1 << x) for x in range(n)]
    sym = np.empty_like(dist)
    for x in range(n):
        sym[:, x] = dist[:, x] + dist[flips[x], x]
    out = 0.25 * sym
    for x in range(n):
        acc = np.zeros(nf)
        for e in range(g.indptr[x], g.indptr[x + 1]):
            y = int(g.indices[e])
            p_yx = g.weights[e] / g.vertex_weight[y]    # P(y, x), symmetric weights
            acc += p_yx * (sym[:, y] + sym[flips[x], y])
        out[:, x] += 0.125 * acc
    return out


def wreath_matrix(kernel: WreathKernel) -> np.ndarray:
    """Explicit dense P* for small graphs (state id = f * n + x)."""
    g = kernel.graph
    n = g.vertex_count
    if n > 12:
        raise CapacityError("explicit wreath matrix is for small graphs")
    size = 2 ** n * n
    mat = np.zeros((size, size))
    for f in range(2 ** n):
        for x in range(n):
            s = f * n + x
            for g_cfg in (f & ~(1 << x), f | (1 << x)):
                mat[s, g_cfg * n + x] += 0.25
            for e in range(g.indptr[x], g.indptr[x + 1]):
                y = int(g.indices[e])
                p_xy = g.weights[e] / g.vertex_weight[x]
                for bit_x in (0, 1):
                    for bit_y in (0, 1):
                        cfg = (f & ~(1 << x)) | (bit_x << x)
                        cfg = (cfg & ~(1 << y)) | (bit_y << y)
                        mat[s, cfg * n + y] += 0.125 * p_xy
    return mat


@dataclass
class TvProfile:
    """Per-time-step TV record: exact values and/or bound envelopes."""

    ts: np.ndarray
    exact: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def lower_envelope(self) -> np.ndarray | None:
        # TV is non-increasing, so a bound at a later time lower-bounds
        # earlier times as well: running max from the right.
        if self.lower is None:
            return None
        return np.maximum.accumulate(self.lower[::-1])[::-1]

    def upper_envelope(self) -> np.ndarray | None:
        if self.upper is None:
            return None
        return np.minimum.accumulate(self.upper)

    def t_mix_upper(self, eps: float) -> int | None:
        env = self.upper_envelope()
        if env is None:
            return None
        hit = np.flatnonzero(env <= eps)
        return int(self.ts[hit[0]]) if hit.size else None

    def t_mix_lower(self, eps: float) -> int | None:
        env = self.lower_envelope()
        if env is None:
            return None
        hit = np.flatnonzero(env > eps)
        return int(self.ts[hit[-1]]) if hit.size else None

    def t_mix_exact(self, eps: float) -> int | None:
        if self.exact is None:
            return None
        hit = np.flatnonzero(self.exact <= eps)
        return int(self.ts[hit[0]]) if hit.size else None


def exact_tv_profile(kernel: WreathKernel, start: LamplighterState,
                     t_max: int) -> TvProfile:
    """TV(t) = ||P*_t(start, .) - pi*||_TV for t = 0..t_max, exactly."""
    g = kernel.graph
    n = g.vertex_count
    _check_state_cap(n)
    f0 = int(sum(1 << i for i in range(n) if start.lamps[i]))
    dist = np.zeros((2 ** n, n))
    dist[f0, start.position] = 1.0
    target = wreath_stationary(kernel)
    tvs = np.zeros(t_max + 1)
    tvs[0] = 0.5 * np.abs(dist - target).sum()
    for t in range(1, t_max + 1):
        dist = wreath_apply(kernel, dist)
        tvs[t] = 0.5 * np.abs(dist - target).sum()
    return TvProfile(ts=np.arange(t_max + 1), exact=tvs)


# ---------------------------------------------------------------------------
# Collapsed representation


@dataclass
class CollapsedState:
    """(visited set, position, initial lamps): sufficient statistic for the
    lamplighter law given the driving walk."""

    visited: np.ndarray
    position: int
    initial_lamps: np.ndarray

    def draw_lamps(self, rng: np.random.Generator) -> np.ndarray:
        lamps = self.initial_lamps.copy()
        k = int(self.visited.sum())
        lamps[self.visited] = rng.random(k) < 0.5
        return lamps

    def draw_state(self, rng: np.random.Generator) -> LamplighterState:
        return LamplighterState(self.draw_lamps(rng), self.position)


def collapsed_sample(kernel: WreathKernel, start: LamplighterState, t: int,
                     seed: int, sample: int = 0) -> CollapsedState:
    """Simulate only the driving walk and return the collapsed state."""
    traj = simulate(kernel.base, start.position, t, seed, sample=sample,
                    track_visits=False)
    return CollapsedState(visited=traj.visited, position=traj.position,
                          initial_lamps=start.lamps.copy())


# ---------------------------------------------------------------------------
# Upper bound (cover tail + walk term)


@dataclass(frozen=True)
class TvUpperBound:
    basic: float               # tail + sqrt(S_N)/(2 sqrt(t))
    sharp: float | None        # tail + walk TV term, when available
    tail: float
    walk_term: float

    @property
    def best(self) -> float:
        return self.basic if self.sharp is None else min(self.basic, self.sharp)


def tv_upper_bound(cover_tail, s_n: float, t: int,
                   walk_tv: float | None = None) -> TvUpperBound:
    """Cover-tail decomposition of the lamplighter TV at time t.

    `cover_tail` maps t to (an upper confidence bound on) P(tau~_cov > t)
    for the lazy driving walk; the distribution-free walk term is
    min(1, sqrt(S_N)/(2 sqrt(t))).
    """
    if t < 1:
        raise SpecError("the upper bound needs t >= 1")
    tail = float(cover_tail(t))
    term = min(1.0, math.sqrt(s_n) / (2.0 * math.sqrt(t)))
    basic = min(1.0, tail + term)
    sharp = None if walk_tv is None else min(1.0, tail + float(walk_tv))
    return TvUpperBound(basic=basic, sharp=sharp, tail=tail, walk_term=term)


def empirical_cover_tail(cover: CoverSample, confidence: float = 0.99,
                         comparisons: int = 1):
    """Upper-confidence survival function from cover-time samples (DKW)."""
    band = cover.dkw_band(confidence=confidence, comparisons=comparisons)

    def tail(t):
        return min(1.0, float(cover.survival(t)[0]) + band)

    return tail


def conditional_lamp_term(uncovered: np.ndarray, band: float = 0.0) -> float:
    """Upper-confidence estimate of E[1 - 2^(-U_t)] from uncovered counts.

    Conditionally on the driving walk, the lamp configuration differs from
    the invariant product law in total variation by exactly 1 - 2^(-U_t)
    (the unvisited lamps are deterministic), so by convexity
    TV(t) <= E[1 - 2^(-U_t)] + walk term.  Sharper than the cover tail,
    which replaces 1 - 2^(-U) by 1{U > 0}.
    """
    u = np.asarray(uncovered, dtype=np.float64)
    return min(1.0, float((1.0 - np.exp2(-u)).mean()) + band)


# ---------------------------------------------------------------------------
# Lower bounds


@dataclass(frozen=True)
class TvLowerBound:
    certified: float
    raw: float
    correction: float
    stderr: float
    full_scan: bool = True


def _hoeffding(m: int, confidence: float, comparisons: int, two_sided: bool) -> float:
    delta = (1.0 - confidence) / comparisons
    num = math.log((2.0 if two_sided else 1.0) / delta)
    return math.sqrt(num / (2.0 * m))


def tv_lower_bound_statistic(uncovered: np.ndarray, n: int, seed: int = 0,
                             confidence: float = 0.99,
                             comparisons: int = 1) -> TvLowerBound:
    """Certified TV lower bound from the zero-lamp count.

    Started from all lamps off, the zero count is Z = U + Binomial(n-U, 1/2)
    with U the uncovered count; under pi* it is Binomial(n, 1/2).  The bound
    is sup_a |Phat(Z >= a) - P_Bin(Z >= a)| minus a DKW deviation at the
    requested confidence (Bonferroni over `comparisons` simultaneous uses).
    """
    u = np.asarray(uncovered, dtype=np.int64)
    m = u.size
    if m < 1:
        raise SpecError("need at least one sample")
    rng = stream(seed, experiment_key("zerocount"))
    z = u + rng.binomial(n - u, 0.5)
    counts = np.bincount(z, minlength=n + 1)
    emp_tail = np.cumsum(counts[::-1])[::-1] / m          # P^(Z >= a)
    ref_tail = binom.sf(np.arange(n + 1) - 1, n, 0.5)     # P(Bin >= a)
    raw = float(np.abs(emp_tail - ref_tail).max())
    eps = _hoeffding(m, confidence, comparisons, two_sided=True)
    se = float(np.sqrt(np.maximum(emp_tail * (1 - emp_tail), 1e-12).max() / m))
    return TvLowerBound(certified=max(0.0, raw - eps), raw=raw,
                        correction=eps, stderr=se)


def tv_lower_bound_unvisited_ball(avoid_times: np.ndarray, ref_mass: float,
                                  t: int, confidence: float = 0.99,
                                  comparisons: int = 1) -> TvLowerBound:
    """Certified TV lower bound from the all-lamps-off-ball event at a tool-
    chosen radius (the dark-ball discriminator).

    Started from all lamps off, {some radius-r ball entirely unvisited at t}
    implies {some radius-r ball has all lamps off}, whose stationary mass is
    at most ref_mass = sum_y 2^{-|B(y, r)|}.  avoid_times holds per-sample
    r-ball avoidance times; the bound is the empirical exceedance minus
    ref_mass and a one-sided Hoeffding deviation.
    """
    v = np.asarray(avoid_times, dtype=np.int64)
    m = v.size
    if m < 1:
        raise SpecError("need at least one sample")
    hits = (v > t).astype(np.float64)
    phat = float(hits.mean())
    eps = _hoeffding(m, confidence, comparisons, two_sided=False)
    se = float(hits.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return TvLowerBound(certified=max(0.0, phat - eps - ref_mass),
                        raw=max(0.0, phat - ref_mass), correction=eps, stderr=se)


def zero_ball_radius(d_f: float, c_tilde: float, c_v: float, r_n: int) -> int:
    """r_N = ceil((2 d_f c~ c_v log2 R_N)^(1/d_f))."""
    return int(math.ceil((2.0 * d_f * c_tilde * c_v * math.log2(r_n)) ** (1.0 / d_f)))


def tv_lower_bound_zeroball(g: WeightedGraph, kernel: WreathKernel,
                            d_f: float, c_tilde: float, c_v: float, t: int,
                            samples: int, seed: int,
                            confidence: float = 0.99,
                            threads: int | None = None) -> TvLowerBound:
    """TV lower bound from the all-lamps-off-ball event at radius r_N.

    Starts from all lamps off; the event holds iff some radius-r_N ball
    contains no lit lamp.  The stationary mass is bounded by the union bound
    over the scanned centers (all of them below ZEROBALL_FULL_SCAN_CAP
    vertices, a seeded sample above, flagged via full_scan).  Raises when
    r_N >= R_N/4 (construction degenerate at this graph size).
    """
    n = g.vertex_count
    r_n_graph = diameter(g).value
    radius = zero_ball_radius(d_f, c_tilde, c_v, r_n_graph)
    if radius >= r_n_graph / 4:
        raise SpecError(
            f"ball construction degenerate: r_N = {radius} >= R_N/4 = {r_n_graph / 4}")
    full_scan = n <= ZEROBALL_FULL_SCAN_CAP
    if full_scan:
        centers = np.arange(n)
    else:
        centers = np.sort(stream(seed, experiment_key("zeroball-centers"))
                          .choice(n, size=ZEROBALL_FULL_SCAN_CAP // 16,
                                  replace=False))
    import scipy.sparse as sp
    rows, cols = [], []
    sizes = np.zeros(centers.size, dtype=np.int64)
    for i, y in enumerate(centers):
        members = ball(g, int(y), radius)
        sizes[i] = members.size
        rows.extend([i] * members.size)
        cols.extend(members.tolist())
    ballmat = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)),
                            shape=(centers.size, n))
    pi_star_ub = float(np.exp2(-sizes.astype(np.float64)).sum())
    start = LamplighterState(np.zeros(n, dtype=np.bool_), 0)
    tag = experiment_key("zeroball")

    def one(i: int) -> int:
        cs = collapsed_sample(kernel, start, t, seed, sample=i)
        rng = stream(seed, tag, i, aux=1)
        lit = cs.draw_lamps(rng)
        dark_counts = ballmat @ lit.astype(np.int64)
        return int((dark_counts == 0).any())

    hits = np.array(map_indexed(one, samples, threads), dtype=np.float64)
    phat = float(hits.mean())
    eps = _hoeffding(samples, confidence, 1, two_sided=False)
    se = float(hits.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return TvLowerBound(certified=max(0.0, phat - eps - pi_star_ub),
                        raw=max(0.0, phat - pi_star_ub),
                        correction=eps, stderr=se, full_scan=full_scan)


# ---------------------------------------------------------------------------
# Exact exchangeable lamp-marginal TV


def tv_exchangeable_exact(u_law: np.ndarray, n: int) -> float:
    """Exact TV between the lamp marginal and uniform when the uncovered set
    is exchangeable (complete-graph driving walks).

    With P(U = j) given, a configuration with zero-set size k has mass
    P_k = sum_j P(U=j) C(k,j)/C(n,j) 2^{-(n-j)}, and
    TV = sum_k C(n,k) [P_k - 2^{-n}]_+ (log-domain throughout).
    """
    if n > EXCHANGEABLE_CAP:
        raise CapacityError(f"exchangeable TV capped at n = {EXCHANGEABLE_CAP}")
    u_law = np.asarray(u_law, dtype=np.float64)
    if u_law.size != n + 1 or abs(u_law.sum() - 1.0) > 1e-9 or (u_law < 0).any():
        raise SpecError("u_law must be a probability vector of length n+1")
    js = np.flatnonzero(u_law > 0)
    log_pu = np.log(u_law[js])
    lgamma = gammaln(np.arange(2 * n + 3).astype(np.float64))

    def log_c(a, b):
        return lgamma[a + 1] - lgamma[b + 1] - lgamma[a - b + 1]

    ks = np.arange(n + 1)
    log_tv_terms = np.full(n + 1, -np.inf)
    log_uniform = -n * math.log(2.0)
    block = 2048
    for lo in range(0, n + 1, block):
        kk = ks[lo:lo + block]
        valid = kk[:, None] >= js[None, :]
        body = (log_pu[None, :]
                + log_c(kk[:, None], np.where(valid, js[None, :], 0))
                - log_c(n, js)[None, :]
                - (n - js)[None, :] * math.log(2.0))
        body = np.where(valid, body, -np.inf)
        log_pk = logsumexp(body, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = (log_c(n, kk) + log_pk
                       + np.log1p(-np.exp(np.minimum(log_uniform - log_pk, 0.0))))
        mass = np.where(log_pk > log_uniform, contrib, -np.inf)
        log_tv_terms[lo:lo + block] = mass
    return float(np.exp(logsumexp(log_tv_terms)))


def complete_graph_uncovered_law(n: int, t_max: int,
                                 record) -> dict[int, np.ndarray]:
    """Law of the uncovered count U_t for the lazy walk on K_n, exactly.

    Forward recursion on the visited-count chain: a lazy step discovers a
    new vertex with probability (n - v)/(2(n - 1)) from v visited.  Returns
    {t: law of U over 0..n} for each requested t in 0..t_max.
    """
    want = set(int(t) for t in np.asarray(record, dtype=np.int64))
    out: dict[int, np.ndarray] = {}
    p = np.zeros(n + 1)
    p[1] = 1.0          # visited count starts at 1
    if 0 in want:
        out[0] = p[::-1].copy()
    vs = np.arange(n + 1, dtype=np.float64)
    stay = 0.5 + 0.5 * (vs - 1.0) / (n - 1.0)
    grow = 0.5 * (n - vs) / (n - 1.0)
    for t in range(1, t_max + 1):
        nxt = p * stay
        nxt[1:] += p[:-1] * grow[:-1]
        p = nxt
        if t in want:
            out[t] = p[::-1].copy()
    return out


def exchangeable_mixing_times(n: int, eps_list, t_hint: float | None = None):
    """Lamp-marginal mixing times on K_n via the exact exchangeable TV.

    Scans TV(t) on a coarse grid, then resolves each first crossing to the
    exact integer step.  Returns ({eps: t_mix}, curve rows (t, tv)).
    """
    if t_hint is None:
        harmonic = float(np.sum(1.0 / np.arange(1, n)))
        t_hint = 2.0 * (n - 1) * harmonic          # exact lazy mean cover time
    t_max = int(3.2 * t_hint) + 8
    coarse = np.unique(np.concatenate((
        [0], np.linspace(1, t_max, 256).astype(np.int64))))
    laws = complete_graph_uncovered_law(n, t_max, coarse)
    curve = [(int(t), tv_exchangeable_exact(laws[int(t)], n)) for t in coarse]
    eps_list = sorted(set(float(e) for e in eps_list), reverse=True)
    tmix: dict[float, int] = {}
    ts = np.array([c[0] for c in curve])
    tvs = np.array([c[1] for c in curve])
    for eps in eps_list:
        below = np.flatnonzero(tvs <= eps)
        if below.size == 0:
            raise SpecError(f"TV never reached {eps} within the scan window")
        hi = int(ts[below[0]])
        lo = int(ts[below[0] - 1]) if below[0] > 0 else 0
        window = np.arange(lo, hi + 1)
        wlaws = complete_graph_uncovered_law(n, hi, window)
        t_exact = hi
        for t in window:
            if tv_exchangeable_exact(wlaws[int(t)], n) <= eps:
                t_exact = int(t)
                break
        tmix[eps] = t_exact
    return tmix, curve
