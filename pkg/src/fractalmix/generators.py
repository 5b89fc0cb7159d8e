"""Deterministic generators: Sierpinski gasket graphs, generalized Sierpinski
carpet graphs, and baseline families (path / cycle / torus / complete).

All coordinates are exact integers so deduplication never touches floats:

* gasket level N in d dimensions lives in corner coordinates, i.e. vectors
  a in Z^{d+1}_{>=0} with sum(a) = 2^N; the Euclidean position is
  sum_i a_i * x_i / 2^N for simplex corners x_i.  For d = 2 the stored
  coordinate is the planar pair (2*a_1 + a_2, a_2) in units of
  (1/2, sqrt(3)/2) scaled by 2^N.
* carpet level N is the corner lattice {0..L^N}^d restricted to kept cells.

Identical spec -> identical vertex ordering (lexicographic in coordinates)
-> byte-identical wg-json output.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .errors import CapacityError, SpecError
from .graph import WeightedGraph, build_graph

VERTEX_BUDGET = 2_000_000

LOG3_OVER_LOG2 = math.log(3) / math.log(2)
LOG5_OVER_LOG2 = math.log(5) / math.log(2)


# ---------------------------------------------------------------------------
# Gasket


@dataclass(frozen=True)
class GasketSpec:
    level: int
    dim: int = 2

    def __post_init__(self):
        if self.level < 0:
            raise SpecError("gasket level must be >= 0")
        if self.dim < 2:
            raise SpecError("gasket dimension must be >= 2")

    @property
    def d_f(self) -> float:
        return math.log(self.dim + 1) / math.log(2)

    @property
    def d_w(self) -> float | None:
        # closed form only known for the planar gasket; higher d is fitted
        return LOG5_OVER_LOG2 if self.dim == 2 else None

    def describe(self) -> str:
        return f"gasket:d={self.dim},level={self.level}"


def build_gasket(spec: GasketSpec) -> WeightedGraph:
    """Level-N gasket graph with unit conductances.

    For d = 2: 3(3^N + 1)/2 vertices and 3^{N+1} edges.
    """
    d = spec.dim
    n_cells = (d + 1) ** spec.level
    if n_cells * (d + 1) > VERTEX_BUDGET:
        raise CapacityError(f"gasket level {spec.level} (d={d}) exceeds vertex budget")
    corners = [tuple(int(i == j) for j in range(d + 1)) for i in range(d + 1)]
    verts = set(corners)
    edges = {frozenset((a, b)) for a, b in itertools.combinations(corners, 2)}
    for k in range(spec.level):
        shift = 2 ** k
        new_verts = set()
        new_edges = set()
        for i in range(d + 1):
            off = tuple(shift * c for c in corners[i])
            for v in verts:
                new_verts.add(tuple(a + b for a, b in zip(v, off)))
            for e in edges:
                u, v = tuple(e)
                new_edges.add(frozenset((
                    tuple(a + b for a, b in zip(u, off)),
                    tuple(a + b for a, b in zip(v, off)),
                )))
        verts, edges = new_verts, new_edges

    def planar(a):
        # d = 2 planar integers in the (1/2, sqrt(3)/2) basis
        return (2 * a[1] + a[2], a[2])

    keyed = sorted(verts, key=planar if d == 2 else None)
    coords = [planar(a) for a in keyed] if d == 2 else list(keyed)
    index = {v: i for i, v in enumerate(keyed)}
    triples = sorted(
        (min(index[u], index[v]), max(index[u], index[v]), 1.0)
        for u, v in (tuple(e) for e in edges)
    )
    return build_graph(len(keyed), triples, coords=coords,
                       meta={"spec": spec.describe()})


# ---------------------------------------------------------------------------
# Carpet


@dataclass(frozen=True)
class CarpetSpec:
    level: int
    base: int
    dim: int = 2
    kept_cells: frozenset = field(default_factory=frozenset)
    hole: int | None = None      # set by the central-hole constructor

    def __post_init__(self):
        if self.level < 0 or self.base < 2 or self.dim < 2:
            raise SpecError("carpet needs level >= 0, base L >= 2, dim >= 2")
        validate_kept_cells(self.base, self.dim, self.kept_cells)

    @property
    def k(self) -> int:
        return len(self.kept_cells)

    @property
    def d_f(self) -> float:
        return math.log(self.k) / math.log(self.base)

    def describe(self) -> str:
        if self.hole is not None:
            return f"carpet:L={self.base},b={self.hole},d={self.dim},level={self.level}"
        return f"carpet:L={self.base},K={self.k},d={self.dim},level={self.level}"


def central_hole_carpet_spec(level: int, base: int, hole: int, dim: int = 2) -> CarpetSpec:
    """Carpet with the central hole^dim block of cells removed.

    Needs 1 <= hole <= L-1 with L - hole even so the hole is centered.
    """
    if not (1 <= hole <= base - 1):
        raise SpecError(f"central hole side must be in 1..{base - 1}, got {hole}")
    if (base - hole) % 2 != 0:
        raise SpecError(
            f"invalid central hole parity: L - b = {base - hole} must be even")
    lo = (base - hole) // 2
    hole_cells = set(itertools.product(range(lo, lo + hole), repeat=dim))
    kept = frozenset(
        c for c in itertools.product(range(base), repeat=dim) if c not in hole_cells)
    return CarpetSpec(level=level, base=base, dim=dim, kept_cells=kept, hole=hole)


def _cell_isometries(base: int, dim: int):
    """The hyperoctahedral group acting on cell labels {0..L-1}^dim."""
    for perm in itertools.permutations(range(dim)):
        for flips in itertools.product((False, True), repeat=dim):
            yield perm, flips


def _apply_isometry(cell, perm, flips, base):
    out = tuple(cell[p] for p in perm)
    return tuple(base - 1 - c if f else c for c, f in zip(out, flips))


def validate_kept_cells(base: int, dim: int, kept: frozenset) -> None:
    """Check the four carpet conditions on the kept-cell set (cell-level
    discretization: isometry invariance; face-adjacency connectivity with a
    spanning path; 2^d-block face-connectivity; bottom row kept)."""
    if not (base <= len(kept) <= base ** dim):
        raise SpecError(
            f"kept cell count must lie in [L, L^d] = [{base}, {base ** dim}]",
            condition="size")
    for cell in kept:
        if len(cell) != dim or any(not (0 <= c < base) for c in cell):
            raise SpecError(f"cell {cell} outside {{0..{base - 1}}}^{dim}",
                            condition="size")

    for perm, flips in _cell_isometries(base, dim):
        image = {_apply_isometry(c, perm, flips, base) for c in kept}
        if image != set(kept):
            raise SpecError("kept cells not invariant under cube isometries",
                            condition="symmetry")

    adj = _face_adjacency(kept)
    comp = _component_of(next(iter(sorted(kept))), adj)
    if comp != set(kept):
        raise SpecError("kept cells are not face-connected",
                        condition="connectedness")
    if not any(c[0] == 0 for c in kept) or not any(c[0] == base - 1 for c in kept):
        raise SpecError("kept cells contain no face-to-face spanning path",
                        condition="connectedness")

    for corner in itertools.product(range(base - 1), repeat=dim):
        block = [tuple(c + o for c, o in zip(corner, off))
                 for off in itertools.product((0, 1), repeat=dim)]
        inside = [c for c in block if c in kept]
        if not inside:
            continue
        block_adj = _face_adjacency(inside)
        if _component_of(inside[0], block_adj) != set(inside):
            raise SpecError(
                f"kept cells in the 2^d block at {corner} touch only diagonally",
                condition="non-diagonality")

    bottom = {(k,) + (0,) * (dim - 1) for k in range(base)}
    if not bottom <= set(kept):
        raise SpecError("bottom boundary row of cells must be kept",
                        condition="borders")


def _face_adjacency(cells):
    cellset = set(cells)
    adj = {c: [] for c in cellset}
    for c in cellset:
        for axis in range(len(c)):
            for dlt in (-1, 1):
                nb = tuple(v + dlt if i == axis else v for i, v in enumerate(c))
                if nb in cellset:
                    adj[c].append(nb)
    return adj


def _component_of(start, adj):
    seen = {start}
    stack = [start]
    while stack:
        c = stack.pop()
        for nb in adj[c]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return seen


def build_carpet(spec: CarpetSpec) -> WeightedGraph:
    """Level-N carpet graph on kept-cell corner lattice points, unit edges."""
    d, L, N = spec.dim, spec.base, spec.level
    kept = sorted(spec.kept_cells)
    n_cells = len(kept) ** N
    if n_cells * (2 ** d) > VERTEX_BUDGET * 4:
        raise CapacityError(f"carpet level {N} exceeds vertex budget")
    offsets = list(itertools.product((0, 1), repeat=d))
    cube_edges = [
        (a, b) for a, b in itertools.combinations(offsets, 2)
        if sum(x != y for x, y in zip(a, b)) == 1
    ]
    verts = set()
    edges = set()
    for word in itertools.product(kept, repeat=N) if N > 0 else [()]:
        base = [0] * d
        for digit in word:
            for i in range(d):
                base[i] = base[i] * L + digit[i]
        base_t = tuple(base)
        for off in offsets:
            verts.add(tuple(b + o for b, o in zip(base_t, off)))
        for a, b in cube_edges:
            u = tuple(x + o for x, o in zip(base_t, a))
            v = tuple(x + o for x, o in zip(base_t, b))
            edges.add((u, v) if u < v else (v, u))
    keyed = sorted(verts)
    index = {v: i for i, v in enumerate(keyed)}
    triples = sorted(
        (min(index[u], index[v]), max(index[u], index[v]), 1.0)
        for u, v in edges
    )
    return build_graph(len(keyed), triples, coords=keyed,
                       meta={"spec": spec.describe()})


# ---------------------------------------------------------------------------
# Baselines


def build_path(n: int) -> WeightedGraph:
    if n < 2:
        raise SpecError("path needs n >= 2")
    return build_graph(n, [(i, i + 1, 1.0) for i in range(n - 1)],
                       coords=[(i,) for i in range(n)],
                       meta={"spec": f"path:n={n}"})


def build_cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise SpecError("cycle needs n >= 3")
    edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    return build_graph(n, edges, coords=[(i,) for i in range(n)],
                       meta={"spec": f"cycle:n={n}"})


def build_torus(dim: int, side: int) -> WeightedGraph:
    if dim < 1 or side < 3:
        raise SpecError("torus needs dim >= 1 and side >= 3")
    n = side ** dim
    coords = list(itertools.product(range(side), repeat=dim))
    index = {c: i for i, c in enumerate(coords)}
    edges = []
    for c in coords:
        for axis in range(dim):
            nb = tuple((v + 1) % side if i == axis else v for i, v in enumerate(c))
            u, v = index[c], index[nb]
            edges.append((min(u, v), max(u, v), 1.0))
    return build_graph(n, sorted(set(edges)), coords=coords,
                       meta={"spec": f"torus:d={dim},side={side}"})


def build_complete(n: int) -> WeightedGraph:
    if n < 2:
        raise SpecError("complete graph needs n >= 2")
    edges = [(i, j, 1.0) for i in range(n) for j in range(i + 1, n)]
    return build_graph(n, edges, meta={"spec": f"complete:n={n}"})


# ---------------------------------------------------------------------------
# Rough (uniformly elliptic) weights


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z = (z + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def rough_weights(g: WeightedGraph, c_e: float, seed: int = 0) -> WeightedGraph:
    """Replace unit conductances by a seeded-hash draw from [1/c_e, c_e].

    The draw depends only on (seed, endpoint ids), not on edge enumeration
    order, so the weighting is deterministic and symmetric.
    """
    if c_e < 1.0:
        raise SpecError("ellipticity constant must be >= 1")
    triples = []
    for u, v, _ in g.edge_list():
        h = _mix64(_mix64(seed ^ (u * 0x1F123BB5)) ^ (v * 0x5851F42D4C957F2D))
        t = h / 2.0 ** 64
        triples.append((u, v, c_e ** (2.0 * t - 1.0)))
    meta = dict(g.meta)
    meta["rough_ce"] = c_e
    meta["rough_seed"] = seed
    coords = None if g.coords is None else [tuple(c) for c in g.coords]
    return build_graph(g.vertex_count, triples, coords=coords, meta=meta)


# ---------------------------------------------------------------------------
# Regime classification and spec strings

STRONGLY_RECURRENT = "strongly_recurrent"
TRANSIENT = "transient"
CRITICAL = "critical"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Regime:
    kind: str
    d_f: float | None
    d_w: float | None       # None means "fit numerically"


def classify_regime(spec) -> Regime:
    """Regime of the family: volume exponent below/above the walk exponent.

    Gaskets are strongly recurrent; 2-dimensional central-hole carpets are
    strongly recurrent while small central holes in high dimension
    (b^{d-1} < L^{d-1} - L) give transience; tori are transient for d >= 3
    and critical for d = 2.  Anything else is reported unknown with d_w left
    to numeric fitting.
    """
    if isinstance(spec, GasketSpec):
        return Regime(STRONGLY_RECURRENT, spec.d_f, spec.d_w)
    if isinstance(spec, CarpetSpec):
        if spec.hole is None:
            return Regime(UNKNOWN, spec.d_f, None)
        if spec.dim == 2:
            return Regime(STRONGLY_RECURRENT, spec.d_f, None)
        if spec.hole ** (spec.dim - 1) < spec.base ** (spec.dim - 1) - spec.base:
            return Regime(TRANSIENT, spec.d_f, None)
        return Regime(UNKNOWN, spec.d_f, None)
    if isinstance(spec, TorusSpec):
        if spec.dim >= 3:
            return Regime(TRANSIENT, float(spec.dim), 2.0)
        if spec.dim == 2:
            return Regime(CRITICAL, 2.0, 2.0)
        return Regime(STRONGLY_RECURRENT, 1.0, 2.0)
    raise SpecError(f"cannot classify {spec!r}")


@dataclass(frozen=True)
class TorusSpec:
    dim: int
    side: int

    def describe(self) -> str:
        return f"torus:d={self.dim},side={self.side}"


@dataclass(frozen=True)
class BaselineSpec:
    kind: str
    n: int

    def describe(self) -> str:
        return f"{self.kind}:n={self.n}"


def parse_spec(text: str):
    """Parse a CLI spec string like "gasket:d=2,level=6" into a spec object."""
    head, _, rest = text.partition(":")
    head = head.strip().lower()
    params: dict[str, int] = {}
    if rest:
        for piece in rest.split(","):
            key, _, val = piece.partition("=")
            if not val:
                raise SpecError(f"malformed spec parameter {piece!r} in {text!r}")
            try:
                params[key.strip().lower()] = int(val)
            except ValueError as exc:
                raise SpecError(f"non-integer value in {piece!r}") from exc
    try:
        if head == "gasket":
            return GasketSpec(level=params.pop("level"), dim=params.pop("d", 2))
        if head == "carpet":
            return central_hole_carpet_spec(
                level=params.pop("level"), base=params.pop("l"),
                hole=params.pop("b"), dim=params.pop("d", 2))
        if head == "torus":
            return TorusSpec(dim=params.pop("d"), side=params.pop("side"))
        if head in ("path", "cycle", "complete"):
            return BaselineSpec(kind=head, n=params.pop("n"))
    except KeyError as exc:
        raise SpecError(f"spec {text!r} is missing parameter {exc}") from exc
    raise SpecError(f"unknown graph family {head!r}")


def build_from_spec(spec) -> WeightedGraph:
    if isinstance(spec, GasketSpec):
        return build_gasket(spec)
    if isinstance(spec, CarpetSpec):
        return build_carpet(spec)
    if isinstance(spec, TorusSpec):
        return build_torus(spec.dim, spec.side)
    if isinstance(spec, BaselineSpec):
        builder = {"path": build_path, "cycle": build_cycle,
                   "complete": build_complete}[spec.kind]
        return builder(spec.n)
    raise SpecError(f"cannot build {spec!r}")


def build_from_string(text: str) -> WeightedGraph:
    return build_from_spec(parse_spec(text))


def build_graph_from_triples(n: int, triples) -> WeightedGraph:
    """Assemble an ad-hoc graph from validated (u, v, mu) triples."""
    return build_graph(n, triples)
