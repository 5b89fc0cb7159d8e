"""Compiled inner loops (numba) for BFS and random-walk sampling.

All walk kernels consume pre-drawn uniforms from a caller-supplied buffer and
return how many they used, so the RNG stays outside (one Philox stream per
sample) and the loops release the GIL.  Neighbor selection follows the
per-vertex cumulative-conductance tables; for globally unit conductances the
uniform maps straight to an index in the CSR row.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# BFS / distances


@njit(cache=True, nogil=True)
def bfs_fill(indptr, indices, src, dist, queue):
    """BFS from src writing hop distances into dist (must be prefilled -1).

    Returns (farthest vertex, eccentricity, number reached).
    """
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    far = src
    ecc = 0
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v]
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if dist[w] < 0:
                dist[w] = dv + 1
                if dv + 1 > ecc:
                    ecc = dv + 1
                    far = w
                queue[tail] = w
                tail += 1
    return far, ecc, tail


@njit(cache=True, nogil=True)
def eccentricity_max(indptr, indices):
    """Exact diameter by all-source BFS (quadratic; guarded by caller caps)."""
    n = indptr.shape[0] - 1
    dist = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    best = 0
    for s in range(n):
        dist[:] = -1
        _, ecc, _ = bfs_fill(indptr, indices, s, dist, queue)
        if ecc > best:
            best = ecc
    return best


@njit(cache=True, nogil=True)
def ball_volumes(indptr, indices, vertex_weight, src, radii, dist, queue):
    """mu-mass and vertex count of B(src, r) for each r in sorted radii."""
    dist[:] = -1
    bfs_fill(indptr, indices, src, dist, queue)
    nr = radii.shape[0]
    vol = np.zeros(nr, dtype=np.float64)
    cnt = np.zeros(nr, dtype=np.int64)
    n = indptr.shape[0] - 1
    for v in range(n):
        d = dist[v]
        if d < 0:
            continue
        for k in range(nr):
            if d <= radii[k]:
                vol[k] += vertex_weight[v]
                cnt[k] += 1
    return vol, cnt


# ---------------------------------------------------------------------------
# Walk stepping


@njit(cache=True, nogil=True, inline="always")
def _pick_neighbor(indptr, indices, cum, unit, pos, u):
    lo = indptr[pos]
    hi = indptr[pos + 1]
    if unit:
        j = int(u * (hi - lo))
        if j >= hi - lo:
            j = hi - lo - 1
        return indices[lo + j]
    w = u * cum[hi - 1]
    a = lo
    b = hi - 1
    while a < b:
        mid = (a + b) >> 1
        if cum[mid] > w:
            b = mid
        else:
            a = mid + 1
    return indices[a]


@njit(cache=True, nogil=True, inline="always")
def _step(indptr, indices, cum, unit, lazy, pos, u):
    if lazy:
        if u < 0.5:
            return pos
        u = 2.0 * (u - 0.5)
    return _pick_neighbor(indptr, indices, cum, unit, pos, u)


# ---------------------------------------------------------------------------
# Walk kernels
#
# state layout (int64):
#   0: pos   1: t   2: uncovered   3: grid cursor   4: done flag   5: tau_cov

POS, T, UNCOV, GCUR, DONE, TAU = 0, 1, 2, 3, 4, 5


@njit(cache=True, nogil=True)
def cover_first_visits(indptr, indices, cum, unit, lazy, u, first, state):
    """Advance a cover-time walk, recording first-visit times.

    first[x] = time of first visit (-1 while unvisited; the start holds 0).
    Stops when every vertex has been visited; state[TAU] is the cover time.
    Returns uniforms consumed.
    """
    pos = state[POS]
    t = state[T]
    uncov = state[UNCOV]
    used = 0
    while uncov > 0 and used < u.shape[0]:
        pos = _step(indptr, indices, cum, unit, lazy, pos, u[used])
        used += 1
        t += 1
        if first[pos] < 0:
            first[pos] = t
            uncov -= 1
    if uncov == 0 and state[DONE] == 0:
        state[DONE] = 1
        state[TAU] = t
    state[POS] = pos
    state[T] = t
    state[UNCOV] = uncov
    return used


@njit(cache=True, nogil=True)
def walk_fixed(indptr, indices, cum, unit, lazy, u, horizon, stop_at_cover,
               visited, counts, state):
    """Advance a fixed-horizon walk, tracking visit counts and cover time.

    counts[x] accumulates visits over X_0..X_t inclusive (caller seeds the
    start).  Returns uniforms consumed.
    """
    pos = state[POS]
    t = state[T]
    uncov = state[UNCOV]
    used = 0
    while t < horizon and used < u.shape[0]:
        if stop_at_cover and uncov == 0:
            break
        pos = _step(indptr, indices, cum, unit, lazy, pos, u[used])
        used += 1
        t += 1
        counts[pos] += 1
        if not visited[pos]:
            visited[pos] = True
            uncov -= 1
            if uncov == 0 and state[DONE] == 0:
                state[DONE] = 1
                state[TAU] = t
    state[POS] = pos
    state[T] = t
    state[UNCOV] = uncov
    return used


@njit(cache=True, nogil=True)
def exit_time(indptr, indices, cum, unit, lazy, u, in_ball, state):
    """Advance until the walk first leaves in_ball; state[DONE]=1 then."""
    pos = state[POS]
    t = state[T]
    used = 0
    while used < u.shape[0]:
        pos = _step(indptr, indices, cum, unit, lazy, pos, u[used])
        used += 1
        t += 1
        if not in_ball[pos]:
            state[DONE] = 1
            state[TAU] = t
            break
    state[POS] = pos
    state[T] = t
    return used


@njit(cache=True, nogil=True)
def confined(indptr, indices, cum, unit, lazy, u, dist_from_center, r, horizon, state):
    """Run up to horizon; DONE=1 with TAU=t if the walk exceeds distance r."""
    pos = state[POS]
    t = state[T]
    used = 0
    while t < horizon and used < u.shape[0]:
        pos = _step(indptr, indices, cum, unit, lazy, pos, u[used])
        used += 1
        t += 1
        if dist_from_center[pos] > r:
            state[DONE] = 1
            state[TAU] = t
            break
    state[POS] = pos
    state[T] = t
    return used


@njit(cache=True, nogil=True)
def cover_target(indptr, indices, cum, unit, lazy, u, target, horizon, visited, state):
    """Advance until every vertex of `target` is visited (or horizon).

    state[UNCOV] holds the remaining count of unvisited target vertices.
    """
    pos = state[POS]
    t = state[T]
    remaining = state[UNCOV]
    used = 0
    while t < horizon and remaining > 0 and used < u.shape[0]:
        pos = _step(indptr, indices, cum, unit, lazy, pos, u[used])
        used += 1
        t += 1
        if not visited[pos]:
            visited[pos] = True
            if target[pos]:
                remaining -= 1
                if remaining == 0:
                    state[DONE] = 1
                    state[TAU] = t
    state[POS] = pos
    state[T] = t
    state[UNCOV] = remaining
    return used


@njit(cache=True, nogil=True)
def local_time_oscillation(indptr, indices, cum, unit, lazy, u, horizon,
                           inv_norm, pair_ptr, pair_idx, counts, lhat, state):
    """Track max_{t<=horizon} max over close pairs |Lhat_t(x) - Lhat_t(y)|.

    inv_norm[x] = 1/(r(G) mu_x).  pair_ptr/pair_idx list, per vertex, the
    partners within the resistance-closeness cut.  Only pairs containing the
    vertex just visited can raise the running maximum, so each step folds
    those differences into state-slot TAU (bit-cast via float array `lhat`
    tail is avoided: the running max is returned separately).
    """
    pos = state[POS]
    t = state[T]
    used = 0
    best = 0.0
    while t < horizon and used < u.shape[0]:
        # counts currently reflect X_0..X_{t-1}; adding X_t gives Lhat_{t+1}
        pos = _step(indptr, indices, cum, unit, lazy, pos, u[used])
        used += 1
        t += 1
        counts[pos] += 1
        lhat[pos] = counts[pos] * inv_norm[pos]
        lv = lhat[pos]
        for e in range(pair_ptr[pos], pair_ptr[pos + 1]):
            d = lv - lhat[pair_idx[e]]
            if d < 0.0:
                d = -d
            if d > best:
                best = d
    state[POS] = pos
    state[T] = t
    return used, best


@njit(cache=True, nogil=True)
def sws_lamp_totals(indptr, indices, cum, unit, u, steps, lamps, lamp_sum, state):
    """Run the switch-walk-switch chain, accumulating per-vertex lamp totals.

    Each move consumes 3 uniforms (first switch, lazy move, second switch).
    lamp_sum[x] += lamps[x] after every completed move.
    """
    pos = state[POS]
    t = state[T]
    used = 0
    n = lamps.shape[0]
    while t < steps and used + 3 <= u.shape[0]:
        lamps[pos] = 1 if u[used] < 0.5 else 0
        pos = _step(indptr, indices, cum, unit, True, pos, u[used + 1])
        lamps[pos] = 1 if u[used + 2] < 0.5 else 0
        used += 3
        t += 1
        for x in range(n):
            lamp_sum[x] += lamps[x]
    state[POS] = pos
    state[T] = t
    return used
