"""Weighted graphs: conductances, invariant measure, balls, diameters,
structural-assumption checks, volume-growth fits, and wg-json/1 files.

Vertices are dense integers 0..n-1.  Conductances are stored in CSR form with
both directions present, so mu_x is a row sum and the walk kernels can read
neighborhoods contiguously.  Graphs are immutable after construction and safe
to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import SpecError
from .fitting import volume_slope

EXACT_DIAMETER_CAP = 200_000
ASSUMPTION_ENUM_CAP = 10_000


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric conductance graph in CSR form.

    indptr/indices/weights hold, for each vertex x, its neighbors y and the
    conductances mu_xy (> 0 exactly on edges, mu_xy = mu_yx).  vertex_weight
    is mu_x = sum of incident conductances and total_weight is mu(G).
    coords optionally carries exact integer coordinates from a generator.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    vertex_weight: np.ndarray
    total_weight: float
    coords: np.ndarray | None = None
    unit: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def vertex_count(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def edge_count(self) -> int:
        return self.indices.shape[0] // 2

    def degree(self, x: int) -> int:
        return int(self.indptr[x + 1] - self.indptr[x])

    def neighbors(self, x: int) -> np.ndarray:
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def edge_list(self) -> list[tuple[int, int, float]]:
        """Edges as (u, v, mu) with u < v, sorted."""
        out = []
        for u in range(self.vertex_count):
            for e in range(self.indptr[u], self.indptr[u + 1]):
                v = int(self.indices[e])
                if u < v:
                    out.append((u, v, float(self.weights[e])))
        return out


def build_graph(n: int, edges, coords=None, meta: dict | None = None) -> WeightedGraph:
    """Build and validate a WeightedGraph from undirected (u, v, mu) triples.

    Rejects self-loops, duplicate edges, non-positive conductances, and
    disconnected graphs.
    """
    if n <= 0:
        raise SpecError("graph needs at least one vertex")
    seen = set()
    us = np.empty(2 * len(edges), dtype=np.int64)
    vs = np.empty(2 * len(edges), dtype=np.int64)
    ws = np.empty(2 * len(edges), dtype=np.float64)
    for i, (u, v, mu) in enumerate(edges):
        if u == v:
            raise SpecError(f"self-loop at vertex {u}", condition="self-loop")
        if not (0 <= u < n and 0 <= v < n):
            raise SpecError(f"edge ({u},{v}) out of range", condition="format")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise SpecError(f"duplicate edge {key}", condition="duplicate")
        seen.add(key)
        if not (mu > 0) or not math.isfinite(mu):
            raise SpecError(
                f"conductance on edge {key} must be positive and finite, got {mu}",
                condition="ellipticity",
            )
        us[2 * i], vs[2 * i], ws[2 * i] = u, v, mu
        us[2 * i + 1], vs[2 * i + 1], ws[2 * i + 1] = v, u, mu

    order = np.lexsort((vs, us))
    us, vs, ws = us[order], vs[order], ws[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, us + 1, 1)
    indptr = np.cumsum(indptr)
    vertex_weight = np.zeros(n, dtype=np.float64)
    np.add.at(vertex_weight, us, ws)
    if np.any(vertex_weight == 0):
        raise SpecError("isolated vertex", condition="connectivity")

    g = WeightedGraph(
        indptr=indptr,
        indices=vs,
        weights=ws,
        vertex_weight=vertex_weight,
        total_weight=float(vertex_weight.sum()),
        coords=None if coords is None else np.asarray(coords, dtype=np.int64),
        unit=bool(len(ws) > 0 and np.all(ws == ws[0]) and ws[0] == 1.0),
        meta=meta or {},
    )
    for arr in (g.indptr, g.indices, g.weights, g.vertex_weight):
        arr.setflags(write=False)
    if _component_size(g, 0) != n:
        raise SpecError("graph is not connected", condition="connectivity")
    return g


def _component_size(g: WeightedGraph, src: int) -> int:
    dist = np.full(g.vertex_count, -1, dtype=np.int32)
    queue = np.empty(g.vertex_count, dtype=np.int64)
    _, _, reached = _kernels.bfs_fill(g.indptr, g.indices, src, dist, queue)
    return int(reached)


# ---------------------------------------------------------------------------
# Measures and metric balls


def invariant_measure(g: WeightedGraph) -> np.ndarray:
    """pi(x) = mu_x / mu(G); sums to 1 within 1e-12."""
    return g.vertex_weight / g.total_weight


def bfs_distances(g: WeightedGraph, src: int) -> np.ndarray:
    dist = np.full(g.vertex_count, -1, dtype=np.int32)
    queue = np.empty(g.vertex_count, dtype=np.int64)
    _kernels.bfs_fill(g.indptr, g.indices, src, dist, queue)
    return dist


def ball(g: WeightedGraph, x: int, r: int) -> np.ndarray:
    """Vertices within hop distance r of x (sorted ids)."""
    if not 0 <= x < g.vertex_count:
        raise SpecError(f"vertex {x} out of range")
    dist = bfs_distances(g, x)
    return np.flatnonzero((dist >= 0) & (dist <= r))


def ball_volume(g: WeightedGraph, x: int, r: int) -> float:
    """V(x, r) = mu(B(x, r))."""
    return float(g.vertex_weight[ball(g, x, r)].sum())


@dataclass(frozen=True)
class DiameterResult:
    value: int
    exact: bool


def diameter(g: WeightedGraph, exact_cap: int = EXACT_DIAMETER_CAP,
             sweeps: int = 8) -> DiameterResult:
    """Graph diameter: exact all-source BFS up to exact_cap vertices, a
    certified double-sweep lower bound above it."""
    n = g.vertex_count
    if n <= exact_cap:
        return DiameterResult(int(_kernels.eccentricity_max(g.indptr, g.indices)), True)
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    best = 0
    src = 0
    for _ in range(sweeps):
        dist[:] = -1
        far, ecc, _ = _kernels.bfs_fill(g.indptr, g.indices, src, dist, queue)
        best = max(best, int(ecc))
        if far == src:
            break
        src = int(far)
    return DiameterResult(best, False)


@dataclass(frozen=True)
class GraphMetrics:
    """Scale parameters of one graph level: diameter R_N, volume/walk
    exponents, and the time scale T_N = R_N ** d_w."""

    diameter: int
    diameter_exact: bool
    d_f: float
    d_w: float
    total_weight: float

    @property
    def t_n(self) -> float:
        return float(self.diameter) ** self.d_w


def metrics_for(g: WeightedGraph, d_f: float, d_w: float) -> GraphMetrics:
    dia = diameter(g)
    return GraphMetrics(dia.value, dia.exact, d_f, d_w, g.total_weight)


# ---------------------------------------------------------------------------
# Structural assumptions


@dataclass(frozen=True)
class AssumptionReport:
    """Empirical constants for the uniform-ellipticity, p0, and volume-scaling
    conditions, plus degree statistics."""

    c_e: float
    p_0: float
    c_v: float
    d_f: float
    max_degree: int
    delta_ratio: float          # max mu_x / min mu_x
    ellipticity_ok: bool
    p0_ok: bool
    volume_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.ellipticity_ok and self.p0_ok and self.volume_ok


def check_assumptions(g: WeightedGraph, d_f_nominal: float, seed: int = 0,
                      sample_centers: int = 200) -> AssumptionReport:
    """Measure c_e, p_0 and the d_f-set constant c_v on g.

    c_v is the smallest constant with c_v^-1 r^d_f <= V(x,r) <= c_v r^d_f
    over the scanned (x, r), 1 <= r <= diameter; all centers are scanned up
    to ASSUMPTION_ENUM_CAP vertices, a seeded sample of centers above that.
    """
    w = g.weights
    c_e = float(max(w.max(), 1.0 / w.min()))
    p_0 = float(np.min(w / g.vertex_weight[np.repeat(
        np.arange(g.vertex_count), np.diff(g.indptr))]))
    r_n = diameter(g).value
    n = g.vertex_count
    if n <= ASSUMPTION_ENUM_CAP:
        centers = np.arange(n)
    else:
        rng = np.random.Generator(np.random.Philox(key=seed))
        centers = rng.choice(n, size=min(sample_centers, n), replace=False)
    radii = np.arange(1, max(r_n, 1) + 1, dtype=np.int64)
    dist = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    c_v = 1.0
    for x in centers:
        vol, _ = _kernels.ball_volumes(g.indptr, g.indices, g.vertex_weight,
                                       int(x), radii, dist, queue)
        ratio = vol / radii.astype(np.float64) ** d_f_nominal
        c_v = max(c_v, float(ratio.max()), float(1.0 / ratio.min()))
    degs = np.diff(g.indptr)
    return AssumptionReport(
        c_e=c_e,
        p_0=p_0,
        c_v=c_v,
        d_f=d_f_nominal,
        max_degree=int(degs.max()),
        delta_ratio=float(g.vertex_weight.max() / g.vertex_weight.min()),
        ellipticity_ok=bool(np.isfinite(c_e)),
        p0_ok=bool(p_0 > 0),
        volume_ok=bool(np.isfinite(c_v)),
    )


# ---------------------------------------------------------------------------
# Volume growth


@dataclass(frozen=True)
class VolumeFit:
    d_f: float
    c_v: float
    table: list          # rows (center, r, volume)


def dyadic_radii(r_n: int) -> np.ndarray:
    """Radii 2, 4, ... capped at r_n/4 to suppress boundary saturation."""
    top = r_n // 4
    if top < 2:
        raise SpecError("insufficient radius range: diameter below 8")
    ks = int(math.floor(math.log2(top)))
    return np.array([2 ** k for k in range(1, ks + 1)], dtype=np.int64)


def boundary_witnesses(g: WeightedGraph) -> list[int]:
    """Approximate extremal vertices (double-sweep pair plus the vertex
    farthest from both); balls near these may be truncated by the boundary."""
    d0 = bfs_distances(g, 0)
    w1 = int(np.argmax(d0))
    d1 = bfs_distances(g, w1)
    w2 = int(np.argmax(d1))
    d2 = bfs_distances(g, w2)
    w3 = int(np.argmax(np.minimum(d1, d2)))
    return [w1, w2, w3]


def volume_growth_fit(g: WeightedGraph, samples: int = 40, seed: int = 0) -> VolumeFit:
    """Volume-growth exponent over dyadic radii 2 .. R_N/4.

    Centers are sampled among vertices whose top-radius ball cannot be
    truncated by the graph boundary (farther than the top radius from the
    extremal witnesses); per center, annulus masses V(r) - V(r/2) are fitted
    log-log and the slopes averaged.  Raises for graphs of diameter < 8.
    """
    r_n = diameter(g).value
    radii = dyadic_radii(r_n)
    full = np.concatenate(([1], radii))
    n = g.vertex_count
    rng = np.random.Generator(np.random.Philox(key=seed))
    eligible = np.ones(n, dtype=bool)
    for w in boundary_witnesses(g):
        eligible &= bfs_distances(g, w) > radii[-1]
    pool = np.flatnonzero(eligible)
    if pool.size == 0:
        pool = np.arange(n)
    if samples >= pool.size:
        centers = pool
    else:
        centers = np.sort(rng.choice(pool, size=samples, replace=False))
    dist = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    table = []
    for x in centers:
        vol, _ = _kernels.ball_volumes(g.indptr, g.indices, g.vertex_weight,
                                       int(x), full, dist, queue)
        for r, v in zip(full, vol):
            table.append((int(x), int(r), float(v)))
    d_f = volume_slope(table)
    ratios = np.array([v / r ** d_f for (_, r, v) in table])
    c_v = float(max(ratios.max(), 1.0 / ratios.min()))
    return VolumeFit(d_f=d_f, c_v=c_v, table=table)


# ---------------------------------------------------------------------------
# wg-json/1


def to_wg_json(g: WeightedGraph) -> str:
    """Serialize to the wg-json/1 format (deterministic byte output)."""
    vertices = []
    for i in range(g.vertex_count):
        entry: dict = {"id": i}
        if g.coords is not None:
            entry["coords"] = [int(c) for c in g.coords[i]]
        vertices.append(entry)
    edges = [{"u": u, "v": v, "mu": mu} for (u, v, mu) in g.edge_list()]
    doc = {"format": "wg-json/1", "directed": False,
           "vertices": vertices, "edges": edges}
    return json.dumps(doc, separators=(",", ":"), sort_keys=True) + "\n"


def from_wg_json(text: str) -> WeightedGraph:
    """Parse and validate a wg-json/1 document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc}", condition="format") from exc
    if not isinstance(doc, dict) or doc.get("format") != "wg-json/1":
        raise SpecError("missing or unknown format tag", condition="format")
    if doc.get("directed") is not False:
        raise SpecError("only undirected graphs are supported", condition="format")
    vertices = doc.get("vertices")
    edges = doc.get("edges")
    if not isinstance(vertices, list) or not isinstance(edges, list):
        raise SpecError("vertices/edges must be lists", condition="format")
    ids = [v.get("id") for v in vertices]
    n = len(ids)
    if sorted(ids) != list(range(n)):
        raise SpecError("vertex ids must be dense 0..n-1", condition="format")
    coords = None
    if vertices and "coords" in vertices[0]:
        by_id = sorted(vertices, key=lambda v: v["id"])
        coords = [v["coords"] for v in by_id]
        if any(len(c) != len(coords[0]) for c in coords):
            raise SpecError("inconsistent coordinate arity", condition="format")
    triples = []
    for e in edges:
        try:
            triples.append((int(e["u"]), int(e["v"]), float(e["mu"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"bad edge record {e!r}", condition="format") from exc
    return build_graph(n, triples, coords=coords)


def save_wg_json(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_wg_json(g))


def load_wg_json(path) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return from_wg_json(fh.read())
