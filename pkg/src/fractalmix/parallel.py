"""Deterministic sample-parallel execution.

Monte-Carlo experiments draw per-sample Philox streams, so results are
independent of scheduling; this helper just fans sample indices over a
thread pool (the numba kernels release the GIL) and returns results in
index order.  THREADS=1 (or threads=1) runs inline.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(requested: int | None = None) -> int:
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get("THREADS")
    if env:
        try:
            val = int(env)
            if val > 0:
                return val
        except ValueError:
            pass
    return os.cpu_count() or 1


def map_indexed(fn, n: int, threads: int | None = None) -> list:
    """[fn(0), ..., fn(n-1)], preserving order, optionally threaded.

    Indices are dispatched in contiguous chunks so pool overhead stays small
    relative to per-sample work; ordering (and hence output) is identical at
    every worker count because samples own their random streams.
    """
    workers = thread_count(threads)
    if workers <= 1 or n <= 1:
        return [fn(i) for i in range(n)]

    chunk = max(1, n // (workers * 8))
    spans = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]

    def run(span):
        lo, hi = span
        return [fn(i) for i in range(lo, hi)]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        out = []
        for part in pool.map(run, spans):
            out.extend(part)
        return out
