from __future__ import annotations

import numpy as np
import pytest

from fractalmix import generators as gen

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pure_python_bfs(adj: dict, src: int) -> dict:
    """Independent BFS oracle (no package code)."""
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def adjacency_dict(g) -> dict:
    return {x: [int(w) for w in g.neighbors(x)] for x in range(g.vertex_count)}


@pytest.fixture(scope="session")
def triangle():
    return gen.build_complete(3)


@pytest.fixture(scope="session")
def path3():
    return gen.build_path(3)


@pytest.fixture(scope="session")
def single_edge():
    return gen.build_complete(2)


@pytest.fixture(scope="session")
def cycle8():
    return gen.build_cycle(8)


@pytest.fixture(scope="session")
def gasket3():
    return gen.build_gasket(gen.GasketSpec(level=3))


@pytest.fixture(scope="session")
def gasket4():
    return gen.build_gasket(gen.GasketSpec(level=4))


@pytest.fixture(scope="session")
def gasket5():
    return gen.build_gasket(gen.GasketSpec(level=5))


def random_connected_graph(rng: np.random.Generator, n: int, extra: int,
                           weighted: bool = False):
    """Random spanning tree plus `extra` chords; optionally random weights."""
    edges = {}
    order = rng.permutation(n)
    for i in range(1, n):
        u = int(order[i])
        v = int(order[rng.integers(i)])
        key = (min(u, v), max(u, v))
        edges[key] = 1.0
    tries = 0
    while len(edges) < n - 1 + extra and tries < 50 * extra + 50:
        tries += 1
        u, v = int(rng.integers(n)), int(rng.integers(n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key not in edges:
            edges[key] = 1.0
    triples = []
    for (u, v), _ in sorted(edges.items()):
        mu = float(0.25 + 3.5 * rng.random()) if weighted else 1.0
        triples.append((u, v, mu))
    return gen.build_graph_from_triples(n, triples)
