"""Inner loops of the residual-graph engine.

Compiled with numba when it is importable; otherwise the numpy versions
below are used. Both produce identical results.
"""

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None


def csr_order_numpy(frm, to, n):
    """Permutation sorting arcs by (from, to, original index)."""
    order = np.lexsort((np.arange(len(frm)), to, frm))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(frm, minlength=n), out=indptr[1:])
    return order, indptr


def bfs_numpy(indptr, to, frm, res, s, t, n):
    """Queue-order BFS, level by level; returns the parent-arc array."""
    visited = np.zeros(n, dtype=np.bool_)
    parent = np.full(n, -1, dtype=np.int64)
    visited[s] = True
    frontier = np.array([s], dtype=np.int64)
    while frontier.size and not visited[t]:
        lo = indptr[frontier]
        counts = indptr[frontier + 1] - lo
        total = int(counts.sum())
        if total == 0:
            break
        offsets = np.cumsum(counts) - counts
        arcs = np.repeat(lo - offsets, counts) + np.arange(total, dtype=np.int64)
        heads = to[arcs]
        keep = (res[arcs] > 0) & ~visited[heads]
        arcs, heads = arcs[keep], heads[keep]
        if arcs.size == 0:
            break
        _, first = np.unique(heads, return_index=True)
        first.sort()
        frontier = heads[first]
        parent[frontier] = arcs[first]
        visited[frontier] = True
    return parent


def _csr_order_loop(frm, to, n):
    m = len(frm)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for a in range(m):
        indptr[frm[a] + 1] += 1
    for v in range(n):
        indptr[v + 1] += indptr[v]
    fill = indptr[:-1].copy()
    order = np.empty(m, dtype=np.int64)
    for a in range(m):
        u = frm[a]
        order[fill[u]] = a
        fill[u] += 1
    # per-node insertion sort by head id; stable, so ties keep arc index order
    for v in range(n):
        for i in range(indptr[v] + 1, indptr[v + 1]):
            a = order[i]
            j = i - 1
            while j >= indptr[v] and to[order[j]] > to[a]:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = a
    return order, indptr


def _bfs_loop(indptr, to, frm, res, s, t, n):
    visited = np.zeros(n, dtype=np.bool_)
    parent = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    visited[s] = True
    queue[0] = s
    head, tail = 0, 1
    while head < tail and not visited[t]:
        u = queue[head]
        head += 1
        for a in range(indptr[u], indptr[u + 1]):
            v = to[a]
            if res[a] > 0 and not visited[v]:
                visited[v] = True
                parent[v] = a
                queue[tail] = v
                tail += 1
    return parent


if njit is not None:
    csr_order = njit(cache=True)(_csr_order_loop)
    bfs = njit(cache=True)(_bfs_loop)
else:  # pragma: no cover
    csr_order = csr_order_numpy
    bfs = bfs_numpy
