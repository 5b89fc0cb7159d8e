"""Exact linear-algebraic quantities on weighted graphs: Dirichlet energies,
effective resistance, hitting/commute times, resistance balls, truncated
Green functions, Faber-Krahn constants, uniform mixing times, and metric
ball covers.

Solver policy: dense factorizations below DENSE_CAP vertices (oracle-grade
accuracy), diagonally preconditioned conjugate gradients above, with loud
NumericalError on non-convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CapacityError, NumericalError, SpecError
from .fitting import fit_loglog
from .graph import WeightedGraph, bfs_distances, diameter, dyadic_radii
from .rng import experiment_key, stream
from .walks import WalkKernel

DENSE_CAP = 2_000
PAIRWISE_CAP = 5_000
EIGEN_CAP = 3_000
UNIFORM_MIX_CAP = 5_000
CG_TOL = 1e-10


@dataclass(frozen=True)
class LaplacianSystem:
    """Weighted Laplacian L = D - A of a graph (sparse, symmetric PSD)."""

    graph: WeightedGraph
    laplacian: sp.csr_matrix
    conductance: sp.csr_matrix


def laplacian_system(g: WeightedGraph) -> LaplacianSystem:
    n = g.vertex_count
    a = sp.csr_matrix((g.weights, g.indices, g.indptr), shape=(n, n))
    lap = sp.diags(g.vertex_weight) - a
    return LaplacianSystem(graph=g, laplacian=lap.tocsr(), conductance=a)


def dirichlet_energy(sys: LaplacianSystem, f: np.ndarray) -> float:
    """E(f, f) = 1/2 sum (f(x) - f(y))^2 mu_xy = f^T L f."""
    return float(f @ (sys.laplacian @ f))


def _solve_spd(mat: sp.spmatrix, rhs: np.ndarray, cg_tol: float = CG_TOL,
               maxiter: int | None = None) -> np.ndarray:
    """Solve an SPD system: dense Cholesky under DENSE_CAP, else Jacobi-CG."""
    n = mat.shape[0]
    if n <= DENSE_CAP:
        return scipy.linalg.solve(mat.toarray(), rhs, assume_a="pos")
    diag = mat.diagonal()
    precon = spla.LinearOperator(mat.shape, matvec=lambda v: v / diag)
    cap = maxiter if maxiter is not None else int(20 * math.sqrt(n)) + 100
    x, info = spla.cg(mat.tocsr(), rhs, rtol=cg_tol, atol=0.0, maxiter=cap, M=precon)
    if info != 0:
        res = float(np.linalg.norm(mat @ x - rhs) / np.linalg.norm(rhs))
        raise NumericalError(
            f"CG failed to reach rtol={cg_tol} within {cap} iterations", residual=res)
    return x


def effective_resistance(sys: LaplacianSystem, a, b, cg_tol: float = CG_TOL,
                         maxiter: int | None = None) -> float:
    """R_eff(A, B) = 1 / min{E(f,f) : f = 1 on A, f = 0 on B}."""
    g = sys.graph
    n = g.vertex_count
    a = np.atleast_1d(np.asarray(a, dtype=np.int64))
    b = np.atleast_1d(np.asarray(b, dtype=np.int64))
    if a.size == 0 or b.size == 0:
        raise SpecError("A and B must be nonempty")
    if np.intersect1d(a, b).size:
        raise SpecError("A and B must be disjoint")
    f = np.zeros(n)
    f[a] = 1.0
    fixed = np.zeros(n, dtype=bool)
    fixed[a] = fixed[b] = True
    free = np.flatnonzero(~fixed)
    if free.size:
        lap = sys.laplacian
        rhs = -(lap[free][:, a].sum(axis=1)).A.ravel() if hasattr(
            lap[free][:, a], "A") else -np.asarray(lap[free][:, a].sum(axis=1)).ravel()
        sub = lap[free][:, free].tocsr()
        f[free] = _solve_spd(sub, rhs, cg_tol=cg_tol, maxiter=maxiter)
    energy = dirichlet_energy(sys, f)
    if energy <= 0:
        raise NumericalError("non-positive Dirichlet energy", residual=energy)
    return 1.0 / energy


@dataclass(frozen=True)
class ResistanceSummary:
    """r(G) = max pairwise effective resistance, S_N = mu(G) r(G)."""

    r: float
    s_n: float
    pair: tuple
    exact: bool
    matrix: np.ndarray | None = field(default=None, repr=False)

    def row(self, x: int) -> np.ndarray:
        if self.matrix is None:
            raise CapacityError("pairwise resistance matrix was not computed")
        return self.matrix[x]

    def normalized(self) -> np.ndarray:
        if self.matrix is None:
            raise CapacityError("pairwise resistance matrix was not computed")
        return self.matrix / self.r


def _grounded_inverse(sys: LaplacianSystem, ground: int = 0) -> np.ndarray:
    """Dense inverse of L with `ground` removed, re-embedded with zero
    row/column at the ground."""
    n = sys.graph.vertex_count
    keep = np.arange(n) != ground
    sub = sys.laplacian[keep][:, keep].toarray()
    inv = scipy.linalg.inv(sub)
    out = np.zeros((n, n))
    ix = np.flatnonzero(keep)
    out[np.ix_(ix, ix)] = inv
    return out


def pairwise_resistance(sys: LaplacianSystem) -> np.ndarray:
    """All-pairs R_eff via one grounded inverse:
    R(x,y) = g(x,x) - 2 g(x,y) + g(y,y)."""
    n = sys.graph.vertex_count
    if n > PAIRWISE_CAP:
        raise CapacityError(f"pairwise resistance needs n <= {PAIRWISE_CAP}")
    ginv = _grounded_inverse(sys)
    d = np.diag(ginv)
    r = d[:, None] + d[None, :] - 2.0 * ginv
    np.fill_diagonal(r, 0.0)
    return r


def resistance_summary(sys: LaplacianSystem,
                       pairwise_cap: int = PAIRWISE_CAP) -> ResistanceSummary:
    """Exact r(G) below the pairwise cap; above it, a flagged lower bound
    from extremal-vertex candidates."""
    g = sys.graph
    n = g.vertex_count
    if n <= pairwise_cap:
        mat = pairwise_resistance(sys)
        flat = int(np.argmax(mat))
        pair = (flat // n, flat % n)
        r = float(mat[pair])
        return ResistanceSummary(r=r, s_n=g.total_weight * r, pair=pair,
                                 exact=True, matrix=mat)
    # heuristic candidates: double-sweep eccentric vertices
    from .graph import boundary_witnesses
    cands = sorted(set(boundary_witnesses(g)) | {0})
    best, pair = 0.0, (0, 0)
    for i, x in enumerate(cands):
        for y in cands[i + 1:]:
            r = effective_resistance(sys, [x], [y])
            if r > best:
                best, pair = r, (x, y)
    return ResistanceSummary(r=best, s_n=g.total_weight * best, pair=pair,
                             exact=False, matrix=None)


def hitting_times(sys: LaplacianSystem, target: int) -> np.ndarray:
    """E_z[tau_target] for every start z (non-lazy walk): the solution of
    L h = mu off the target, h(target) = 0.  Lazy values are exactly 2h."""
    g = sys.graph
    n = g.vertex_count
    keep = np.arange(n) != target
    sub = sys.laplacian[keep][:, keep].tocsr()
    h = np.zeros(n)
    h[keep] = _solve_spd(sub, g.vertex_weight[keep])
    return h


def commute_time(sys: LaplacianSystem, x: int, y: int) -> float:
    """E_x[tau_y] + E_y[tau_x]; equals R_eff(x,y) mu(G)."""
    return float(hitting_times(sys, y)[x] + hitting_times(sys, x)[y])


def resistance_ball(summary: ResistanceSummary, x: int, kappa: float) -> np.ndarray:
    """{y : R_eff(x,y)/r(G) <= kappa}."""
    if not 0 <= kappa <= 1:
        raise SpecError("kappa must lie in [0, 1]")
    return np.flatnonzero(summary.row(x) / summary.r <= kappa)


def resistance_exponent_fit(sys: LaplacianSystem, samples: int = 400,
                            seed: int = 0, cg_tol: float = CG_TOL,
                            cg_maxiter: int | None = None) -> tuple:
    """Slope of log R_eff(x,y) vs log d(x,y) over sampled pairs with
    d(x,y) <= R_N/4, distance-stratified over dyadic scales.

    Returns (ExponentFit-like tuple (slope, r2), table of
    (x, y, d, reff) rows).
    """
    g = sys.graph
    r_n = diameter(g).value
    radii = dyadic_radii(r_n)
    mat = None
    if g.vertex_count <= PAIRWISE_CAP:
        mat = pairwise_resistance(sys)
    rng = stream(seed, experiment_key("reff"))
    n = g.vertex_count
    anchors = rng.choice(n, size=min(max(samples // (4 * len(radii)), 8), n),
                         replace=False)
    table = []
    for x in anchors:
        dist = bfs_distances(g, int(x))
        for r in radii:
            shell = np.flatnonzero((dist >= max(r // 2 + 1, 1)) & (dist <= r))
            if shell.size == 0:
                continue
            take = min(4, shell.size)
            ys = rng.choice(shell, size=take, replace=False)
            for y in ys:
                if mat is not None:
                    reff = float(mat[int(x), int(y)])
                else:
                    reff = effective_resistance(sys, [int(x)], [int(y)],
                                                cg_tol=cg_tol,
                                                maxiter=cg_maxiter)
                table.append((int(x), int(y), int(dist[y]), reff))
    if len(table) < 8:
        raise SpecError("insufficient distance range for resistance fit")
    ds = np.array([row[2] for row in table], dtype=np.float64)
    rs = np.array([row[3] for row in table], dtype=np.float64)
    try:
        slope, _, r2 = fit_loglog(ds, rs)
    except ValueError as exc:
        raise SpecError(f"insufficient distance range: {exc}") from exc
    return (slope, r2), table


# ---------------------------------------------------------------------------
# Truncated Green function


def truncated_green(kernel: WalkKernel, x: int, horizon: int) -> np.ndarray:
    """g~(x, y) = sum_{t=0}^{horizon} p~_t(x, y) by lazy row powering."""
    if not kernel.lazy:
        raise SpecError("truncated Green function is defined for the lazy walk")
    g = kernel.graph
    n = g.vertex_count
    if (horizon + 1) * n > 2 ** 33:
        raise CapacityError("truncated Green budget exceeded")
    pt = kernel.transition_matrix().T.tocsr()
    v = np.zeros(n)
    v[x] = 1.0
    acc = v.copy()
    for _ in range(horizon):
        v = pt @ v
        acc += v
    return acc / g.vertex_weight


# ---------------------------------------------------------------------------
# Faber-Krahn


def sample_connected_subsets(g: WeightedGraph, count: int, max_size: int,
                             seed: int) -> list[np.ndarray]:
    """Random connected subsets grown by BFS with random frontier order and
    random stopping (heuristic sampler; sizes in [1, max_size])."""
    rng = stream(seed, experiment_key("subsets"))
    n = g.vertex_count
    out = []
    for _ in range(count):
        size = int(rng.integers(1, max_size + 1))
        root = int(rng.integers(n))
        chosen = {root}
        frontier = [root]
        while frontier and len(chosen) < size:
            v = frontier.pop(int(rng.integers(len(frontier))))
            nbrs = g.neighbors(v)
            for w in nbrs[rng.permutation(len(nbrs))]:
                if int(w) not in chosen and len(chosen) < size:
                    chosen.add(int(w))
                    frontier.append(int(w))
        out.append(np.array(sorted(chosen), dtype=np.int64))
    return out


def dirichlet_eigenvalue(sys: LaplacianSystem, subset: np.ndarray,
                         tol: float = 1e-9, max_iter: int = 10_000) -> float:
    """Smallest eigenvalue of (L_SS, D_SS) by inverse power iteration.

    This is lambda_1(S) = inf E(f,f)/||f||^2_mu over supp f in S, for S a
    proper subset of a connected graph (so L_SS is positive definite).
    """
    g = sys.graph
    m = subset.size
    if m == 0:
        raise SpecError("empty subset")
    if m >= g.vertex_count:
        raise SpecError("subset must be proper")
    if m > EIGEN_CAP:
        raise CapacityError(f"subset exceeds eigen cap {EIGEN_CAP}")
    lsub = sys.laplacian[subset][:, subset].tocsc()
    dsub = g.vertex_weight[subset]
    if m == 1:
        return float(lsub[0, 0] / dsub[0])
    solve = spla.factorized(lsub)
    v = np.full(m, 1.0 / math.sqrt(m))
    lam_prev = np.inf
    for _ in range(max_iter):
        w = solve(dsub * v)
        w /= math.sqrt(float(w @ (dsub * w)))
        lam = float(w @ (lsub @ w)) / float(w @ (dsub * w))
        if abs(lam - lam_prev) <= tol * max(lam, 1e-300):
            return lam
        lam_prev = lam
        v = w
    raise NumericalError("inverse power iteration did not converge",
                         residual=abs(lam - lam_prev))


def dirichlet_eigenvalue_dense(sys: LaplacianSystem, subset: np.ndarray) -> float:
    """Dense generalized-eigenvalue oracle for lambda_1(S)."""
    lsub = sys.laplacian[subset][:, subset].toarray()
    dsub = np.diag(sys.graph.vertex_weight[subset])
    vals = scipy.linalg.eigh(lsub, dsub, eigvals_only=True)
    return float(vals[0])


@dataclass(frozen=True)
class FaberKrahnReport:
    minimum: float
    rows: list      # (subset_id, size, mu_S, lambda1, product)


def faber_krahn_check(sys: LaplacianSystem, subsets: list[np.ndarray],
                      d_w: float, d_f: float) -> FaberKrahnReport:
    """min over subsets of lambda_1(S) mu(S)^{d_w/d_f} (empirical c_FK)."""
    g = sys.graph
    rows = []
    best = np.inf
    for i, s in enumerate(subsets):
        lam = dirichlet_eigenvalue(sys, s)
        mu_s = float(g.vertex_weight[s].sum())
        prod = lam * mu_s ** (d_w / d_f)
        rows.append((i, int(s.size), mu_s, lam, prod))
        best = min(best, prod)
    return FaberKrahnReport(minimum=float(best), rows=rows)


# ---------------------------------------------------------------------------
# Uniform mixing time (relative sup distance)


def relative_sup_deviation(p_t: np.ndarray, pi: np.ndarray) -> float:
    """max_{x,y} |P_t(x,y)/pi(y) - 1| for a dense t-step matrix."""
    return float(np.abs(p_t / pi[None, :] - 1.0).max())


def _diag_deviation(p_t: np.ndarray, pi: np.ndarray) -> float:
    return float((np.diag(p_t) / pi - 1.0).max())


def uniform_mixing_time(kernel: WalkKernel, eps: float,
                        cap: int = UNIFORM_MIX_CAP) -> int:
    """min{t : max_{x,y} |P_x(X~_t = y)/pi(y) - 1| <= eps}, by powering the
    lazy kernel (repeated squaring + bisection).

    For lazy kernels the spectrum is nonnegative, so the relative sup
    deviation equals its diagonal maximum and is non-increasing in t, which
    makes the bisection sound.
    """
    if not kernel.lazy:
        raise SpecError("uniform mixing time is defined for the lazy kernel")
    if eps <= 0:
        raise SpecError("eps must be positive")
    g = kernel.graph
    n = g.vertex_count
    if n > cap:
        raise CapacityError(f"uniform mixing needs n <= {cap}")
    pi = g.vertex_weight / g.total_weight
    if (1.0 / pi - 1.0).max() <= eps:
        return 0
    p1 = kernel.transition_matrix().toarray()
    powers = [p1]          # powers[k] = P^(2^k)
    while _diag_deviation(powers[-1], pi) > eps:
        if len(powers) > 62:
            raise NumericalError("uniform mixing time absurdly large")
        powers.append(powers[-1] @ powers[-1])
    if len(powers) == 1:
        return 1
    # t in (2^(k-1), 2^k]: build upward from the largest failing power
    k = len(powers) - 1
    cur = powers[k - 1]
    t = 1 << (k - 1)
    for j in range(k - 2, -1, -1):
        trial = cur @ powers[j]
        if _diag_deviation(trial, pi) > eps:
            cur = trial
            t += 1 << j
    return t + 1


# ---------------------------------------------------------------------------
# Spectral cache (analysis-side route to the same diagonal quantities)


@dataclass(frozen=True)
class SpectralCache:
    """Eigendecomposition of the lazy kernel's symmetric form.

    Provides chi^2 diagonals (hence uniform-mixing deviations and the
    spectral TV upper bound max_x ||P~_t(x,.) - pi||_TV <= max_x
    sqrt(chi2(x, 2t))/2) at any t in O(n^2).
    """

    lam: np.ndarray           # eigenvalues in [0, 1], ascending
    weight: np.ndarray        # weight[x, k] = (u_k(x)^2 / pi(x))
    pi: np.ndarray

    def chi2_diag(self, t: int) -> np.ndarray:
        """chi^2(x, t) = P~_t(x,x)/pi(x) - 1 per start x."""
        powered = self.lam ** t
        powered[-1] = 0.0          # remove the stationary mode
        return self.weight @ powered

    def sup_deviation(self, t: int) -> float:
        return float(self.chi2_diag(t).max())

    def walk_tv_bound(self, t: int) -> float:
        """Upper bound on max_x ||P~_t(x, .) - pi||_TV (Cauchy-Schwarz)."""
        return min(1.0, 0.5 * math.sqrt(max(self.sup_deviation(2 * t), 0.0)))


def spectral_cache(kernel: WalkKernel, cap: int = UNIFORM_MIX_CAP) -> SpectralCache:
    if not kernel.lazy:
        raise SpecError("spectral cache expects the lazy kernel")
    g = kernel.graph
    n = g.vertex_count
    if n > cap:
        raise CapacityError(f"spectral cache needs n <= {cap}")
    root = np.sqrt(g.vertex_weight)
    a = sp.csr_matrix((g.weights, g.indices, g.indptr), shape=(n, n)).toarray()
    sym = 0.5 * (np.eye(n) + a / root[:, None] / root[None, :])
    lam, vec = scipy.linalg.eigh(sym)
    lam = np.clip(lam, 0.0, 1.0)
    pi = g.vertex_weight / g.total_weight
    weight = vec ** 2 / pi[:, None]
    return SpectralCache(lam=lam, weight=weight, pi=pi)


# ---------------------------------------------------------------------------
# Metric ball cover


def ball_cover(g: WeightedGraph, eta: float) -> list[int]:
    """Greedy cover of V(G) by balls of radius floor(eta R_N): repeatedly
    center a ball at the lowest-id uncovered vertex."""
    if not 0 < eta <= 1:
        raise SpecError("eta must lie in (0, 1]")
    r = int(math.floor(eta * diameter(g).value))
    covered = np.zeros(g.vertex_count, dtype=bool)
    centers = []
    while not covered.all():
        x = int(np.flatnonzero(~covered)[0])
        centers.append(x)
        dist = bfs_distances(g, x)
        covered |= dist <= r
    return centers
