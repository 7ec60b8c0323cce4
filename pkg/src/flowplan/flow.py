"""Integral max-flow and min-cost max-flow on directed capacitated networks.

Both engines work on a residual graph where every edge ``j`` owns a forward
arc and a paired backward arc. Arithmetic is integer only.

``max_flow`` is Edmonds-Karp: every augmenting path is a fewest-arc path
found by a queue-ordered breadth-first search that scans each node's
out-arcs by increasing head id, so results are deterministic. The search
loop lives in ``_kernels`` (numba-compiled when available).

``min_cost_max_flow`` is successive shortest paths with node potentials
(Dijkstra on reduced costs).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels

INDEX = np.int64


@dataclass(frozen=True, eq=False)
class Network:
    node_count: int
    tail: np.ndarray
    head: np.ndarray
    capacity: np.ndarray
    cost: np.ndarray
    source: int
    sink: int

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Sequence[int]], source: int, sink: int) -> "Network":
        """Build from ``(tail, head, capacity[, cost])`` tuples."""
        rows = [tuple(e) + (0,) * (4 - len(e)) for e in edges]
        arr = np.array(rows, dtype=INDEX).reshape(-1, 4)
        return cls(node_count, arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), arr[:, 3].copy(), source, sink)

    @property
    def edge_count(self) -> int:
        return len(self.tail)

    @cached_property
    def out_index(self) -> Tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, edge_ids)`` of out-edges, each node's edges by head id."""
        order = np.lexsort((self.head, self.tail))
        indptr = np.zeros(self.node_count + 1, dtype=INDEX)
        np.cumsum(np.bincount(self.tail, minlength=self.node_count), out=indptr[1:])
        return indptr, order

    def out_edges(self, node: int) -> np.ndarray:
        indptr, order = self.out_index
        return order[indptr[node]:indptr[node + 1]]


@dataclass(frozen=True, eq=False)
class Flow:
    edge_flow: np.ndarray
    value: int
    cost: int
    augmentations: int = 0


def zero_flow(net: Network) -> Flow:
    return Flow(np.zeros(net.edge_count, dtype=INDEX), 0, 0)


def make_flow(net: Network, edge_flow) -> Flow:
    """Wrap per-edge units into a Flow, deriving value and cost."""
    f = np.asarray(edge_flow, dtype=INDEX)
    out_s = int(f[net.tail == net.source].sum() - f[net.head == net.source].sum())
    return Flow(f, out_s, int((f * net.cost).sum()))


def check_flow(net: Network, flow: Flow) -> List[str]:
    """List every violated capacity / conservation / value constraint."""
    f = np.asarray(flow.edge_flow)
    report = []
    if f.shape != (net.edge_count,):
        return [f"flow has {f.size} entries for {net.edge_count} edges"]
    for j in np.flatnonzero(f < 0):
        report.append(f"edge {j}: negative flow {f[j]}")
    for j in np.flatnonzero(f > net.capacity):
        report.append(f"edge {j}: flow {f[j]} exceeds capacity {net.capacity[j]}")
    balance = np.bincount(net.tail, weights=f, minlength=net.node_count) - np.bincount(
        net.head, weights=f, minlength=net.node_count
    )
    balance = balance.astype(INDEX)
    for v in np.flatnonzero(balance):
        if v not in (net.source, net.sink):
            report.append(f"node {v}: conservation violated (net outflow {balance[v]})")
    out_s, in_t = int(balance[net.source]), int(-balance[net.sink])
    if out_s != in_t:
        report.append(f"source emits {out_s} but sink absorbs {in_t}")
    if out_s != flow.value:
        report.append(f"declared value {flow.value} but source emits {out_s}")
    cost = int((f * net.cost).sum())
    if cost != flow.cost:
        report.append(f"declared cost {flow.cost} but edges sum to {cost}")
    return report


class _Residual:
    """Paired-arc residual graph laid out in CSR order."""

    def __init__(self, net: Network, kernels=None):
        m = net.edge_count
        self.bfs_kernel = kernels.bfs if kernels else _kernels.bfs
        frm = np.concatenate([net.tail, net.head]).astype(INDEX)
        to = np.concatenate([net.head, net.tail]).astype(INDEX)
        cap = np.concatenate([net.capacity, np.zeros(m, dtype=INDEX)]).astype(INDEX)
        cost = np.concatenate([net.cost, -net.cost]).astype(INDEX)
        csr_order = kernels.csr_order if kernels else _kernels.csr_order
        order, self.indptr = csr_order(frm, to, net.node_count)
        pos = np.empty(2 * m, dtype=INDEX)
        pos[order] = np.arange(2 * m, dtype=INDEX)
        self.m = m
        self.n = net.node_count
        self.frm = frm[order]
        self.to = to[order]
        self.res = cap[order]
        self.cost = cost[order]
        self.pair = pos[(order + m) % (2 * m)]
        self.forward_pos = pos[:m]

    def edge_flow(self) -> np.ndarray:
        return self.res[self.pair[self.forward_pos]].copy()

    def bfs_path(self, s: int, t: int) -> Optional[np.ndarray]:
        """Arc positions of a fewest-arc s->t path, or None."""
        parent = self.bfs_kernel(self.indptr, self.to, self.frm, self.res, s, t, self.n)
        if parent[t] < 0:
            return None
        path = []
        v = t
        while v != s:
            a = parent[v]
            path.append(a)
            v = self.frm[a]
        return np.array(path[::-1], dtype=INDEX)

    def augment(self, arcs: np.ndarray, amount: int) -> None:
        self.res[arcs] -= amount
        self.res[self.pair[arcs]] += amount


def max_flow(net: Network, limit: Optional[int] = None, kernels=None) -> Flow:
    """Edmonds-Karp maximum flow (optionally stopping at ``limit`` units)."""
    r = _Residual(net, kernels)
    value = 0
    rounds = 0
    while limit is None or value < limit:
        path = r.bfs_path(net.source, net.sink)
        if path is None:
            break
        amount = int(r.res[path].min())
        if limit is not None:
            amount = min(amount, limit - value)
        r.augment(path, amount)
        value += amount
        rounds += 1
    f = r.edge_flow()
    return Flow(f, value, int((f * net.cost).sum()), rounds)


def min_cost_max_flow(net: Network, limit: Optional[int] = None) -> Flow:
    """Successive shortest paths; among maximum flows, one of least cost.

    With ``limit`` the flow value is capped and the result is the cheapest
    flow of value ``min(limit, max flow)``.
    """
    if net.edge_count and int(net.cost.min()) < 0:
        raise ValueError("negative edge cost")
    r = _Residual(net)
    n, s, t = r.n, net.source, net.sink
    indptr = r.indptr.tolist()
    to = r.to.tolist()
    cost = r.cost.tolist()
    res = r.res.tolist()
    pair = r.pair.tolist()
    INF = float("inf")
    pot = [0] * n
    value = rounds = 0
    while limit is None or value < limit:
        dist = [INF] * n
        parent = [-1] * n
        dist[s] = 0
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            pu = pot[u]
            for a in range(indptr[u], indptr[u + 1]):
                if res[a] <= 0:
                    continue
                v = to[a]
                nd = d + cost[a] + pu - pot[v]
                if nd < dist[v]:
                    dist[v] = nd
                    parent[v] = a
                    heapq.heappush(heap, (nd, v))
        if dist[t] == INF:
            break
        for v in range(n):
            if dist[v] != INF:
                pot[v] += dist[v]
        path = []
        v = t
        while v != s:
            a = parent[v]
            path.append(a)
            v = to[pair[a]]
        amount = min(res[a] for a in path)
        if limit is not None:
            amount = min(amount, limit - value)
        for a in path:
            res[a] -= amount
            res[pair[a]] += amount
        value += amount
        rounds += 1
    r.res = np.array(res, dtype=INDEX)
    f = r.edge_flow()
    return Flow(f, value, int((f * net.cost).sum()), rounds)


def decompose(net: Network, flow: Flow, drop_cycles: bool = False) -> List[List[int]]:
    """Split an integral flow into ``flow.value`` unit source->sink node paths.

    Walks always take the lowest-head out-edge that still carries flow. On a
    cyclic flow support this raises, unless ``drop_cycles`` is set, in which
    case flow circulating on cycles is discarded.
    """
    f = np.asarray(flow.edge_flow)
    if not np.issubdtype(f.dtype, np.integer):
        raise ValueError("flow is not integral")
    remaining = f.astype(INDEX).copy()
    indptr, order = net.out_index
    head = net.head
    paths = []
    for _ in range(flow.value):
        nodes = [net.source]
        edges: List[int] = []
        where = {net.source: 0}
        while nodes[-1] != net.sink:
            u = nodes[-1]
            cand = order[indptr[u]:indptr[u + 1]]
            live = cand[remaining[cand] > 0]
            if live.size == 0:
                raise ValueError(f"flow walk stuck at node {u}")
            j = int(live[0])
            v = int(head[j])
            remaining[j] -= 1
            if v in where:
                if not drop_cycles:
                    raise ValueError(f"cyclic flow support through node {v}")
                cut = where[v]
                for u2 in nodes[cut + 1:]:
                    del where[u2]
                del nodes[cut + 1:]
                del edges[cut:]
                continue
            where[v] = len(nodes)
            nodes.append(v)
            edges.append(j)
        paths.append(nodes)
    if not drop_cycles and remaining.any():
        raise ValueError("flow left over after decomposition (cycle or imbalance)")
    return paths
