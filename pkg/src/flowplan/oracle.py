"""Exhaustive joint-state search, for certifying flow results on tiny instances.

One search step moves every active agent to a neighbour or keeps it in
place, subject to: no two agents on one vertex, no two agents swapping
along an edge. Unlabeled states are sorted position tuples, which collapses
all agent permutations into one state.

Goal-replacement searches use absorbing goals: an agent that steps onto any
goal vertex leaves the system at that step.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from math import comb
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .graph import LABELED, Graph, Instance, Plan, compute_ell, distances_from, validate_instance

STATE_LIMIT = 10**6


class OracleGuardExceeded(Exception):
    pass


@dataclass(frozen=True)
class OracleResult:
    value: Optional[int]
    plan: Optional[Plan] = None


def _guard(inst: Instance) -> None:
    problems = validate_instance(inst)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    if comb(inst.graph.vertex_count, inst.n) > STATE_LIMIT:
        raise OracleGuardExceeded(f"C({inst.graph.vertex_count}, {inst.n}) joint states exceed {STATE_LIMIT}")


def joint_moves(
    g: Graph, positions: Sequence[int], blocked=frozenset(), shared=frozenset()
) -> Iterator[Tuple[int, ...]]:
    """Every collision-free simultaneous step of the agents at ``positions``.

    ``blocked`` vertices are occupied by parked agents; ``shared`` vertices
    may receive several agents at once.
    """
    k = len(positions)
    targets: List[int] = []
    taken: set = set()
    moves: set = set()

    def rec(i):
        if i == k:
            yield tuple(targets)
            return
        u = positions[i]
        for v in (u,) + g.adjacency[u]:
            if v in blocked or (v in taken and v not in shared):
                continue
            if v != u and (v, u) in moves:
                continue
            if v != u and v in shared and (u, v) in moves:
                continue  # one traversal per edge and step, even into a shared vertex
            targets.append(v)
            added = v not in taken
            taken.add(v)
            moves.add((u, v))
            yield from rec(i + 1)
            targets.pop()
            if added:
                taken.discard(v)
            moves.discard((u, v))

    yield from rec(0)


def _paths_from_trace(starts: Sequence[int], trace: List[Dict[int, int]]) -> Plan:
    """Follow agents through a list of per-step ``position -> target`` maps."""
    paths = [[s] for s in starts]
    for step in trace:
        for p in paths:
            p.append(step.get(p[-1], p[-1]))
    return Plan(tuple(tuple(p) for p in paths))


def _canon(positions, labeled: bool):
    return tuple(positions) if labeled else tuple(sorted(positions))


def oracle_min_makespan(inst: Instance, cap: Optional[int] = None) -> OracleResult:
    """Breadth-first search for the fewest steps that place agents on goals."""
    _guard(inst)
    g = inst.graph
    labeled = inst.mode == LABELED
    cap = inst.n + compute_ell(inst) - 1 if cap is None else cap
    start = _canon(inst.starts, labeled)
    target = _canon(inst.goals, labeled)
    parent: Dict[tuple, Optional[Tuple[tuple, tuple]]] = {start: None}
    frontier = [start]
    depth = 0
    while frontier:
        if target in parent:
            break
        if depth == cap:
            return OracleResult(None)
        nxt = []
        for state in frontier:
            for move in joint_moves(g, state):
                s2 = _canon(move, labeled)
                if s2 not in parent:
                    parent[s2] = (state, move)
                    nxt.append(s2)
        frontier = nxt
        depth += 1
    if target not in parent:
        return OracleResult(None)
    trace = []
    s = target
    while parent[s] is not None:
        prev, move = parent[s]
        trace.append(dict(zip(prev, move)))
        s = prev
    trace.reverse()
    return OracleResult(depth, _paths_from_trace(inst.starts, trace))


def _uniform_cost(start, expand, is_goal, estimate=None):
    """Dijkstra, or A* with an admissible ``estimate``, over implicit states.

    Improved states are re-queued, so the estimate need not be consistent.

    Returns ``(cost, state list)`` or None.
    """
    h = estimate or (lambda s: 0)
    best = {start: 0}
    parent = {start: None}
    heap = [(h(start), 0, 0, start)]
    tick = 1
    while heap:
        _, d, _, s = heapq.heappop(heap)
        if d > best[s]:
            continue
        if is_goal(s):
            chain = []
            while s is not None:
                chain.append(s)
                s = parent[s]
            return d, chain[::-1]
        for s2, w in expand(s):
            nd = d + w
            if nd < best.get(s2, float("inf")):
                best[s2] = nd
                parent[s2] = s
                heapq.heappush(heap, (nd + h(s2), nd, tick, s2))
                tick += 1
    return None


def _single_mover_distance(inst: Instance) -> OracleResult:
    """Unbounded-time distance search moving one agent per step.

    Any simultaneous step splits into chains, which can be replayed front
    first at the same cost, and full rotations, which leave the occupied
    set unchanged and can be dropped. So serial moves lose nothing here.
    """
    g = inst.graph
    goal = tuple(sorted(inst.goals))
    rows = [distances_from(g, t) for t in goal]
    to_goal = [min(col) for col in zip(*rows)]

    def estimate(state):
        # each agent walks to some goal; each goal is reached by a distinct agent
        pos = state[0]
        return max(sum(to_goal[v] for v in pos), sum(min(r[v] for v in pos) for r in rows))

    def expand(state):
        pos, _ = state
        occupied = set(pos)
        for i, u in enumerate(pos):
            for v in g.adjacency[u]:
                if v not in occupied:
                    yield (tuple(sorted(pos[:i] + (v,) + pos[i + 1:])), (u, v)), 1

    start = (tuple(sorted(inst.starts)), None)
    found = _uniform_cost(start, expand, lambda s: s[0] == goal, estimate)
    if found is None:
        return OracleResult(None)
    cost, chain = found
    trace = [dict([s[1]]) for s in chain[1:]]
    return OracleResult(cost, _paths_from_trace(inst.starts, trace))


def oracle_min_total_distance(inst: Instance, max_makespan: Optional[int] = None) -> OracleResult:
    """Fewest total edge traversals, optionally within ``max_makespan`` steps."""
    _guard(inst)
    if max_makespan is None and inst.mode != LABELED:
        return _single_mover_distance(inst)
    g = inst.graph
    goal = _canon(inst.goals, inst.mode == LABELED)
    labeled = inst.mode == LABELED

    # state: (time or 0, positions, move that produced it)
    def expand(state):
        t, pos, _ = state
        if max_makespan is not None and t >= max_makespan:
            return
        for move in joint_moves(g, pos):
            movers = sum(1 for a, b in zip(pos, move) if a != b)
            if movers == 0 and max_makespan is None:
                continue
            step = tuple(sorted(zip(pos, move)))
            nxt_t = t + 1 if max_makespan is not None else 0
            yield (nxt_t, _canon(move, labeled), step), movers

    start = (0, _canon(inst.starts, labeled), ())
    found = _uniform_cost(start, expand, lambda s: s[1] == goal)
    if found is None:
        return OracleResult(None)
    cost, chain = found
    trace = [dict(s[2]) for s in chain[1:]]
    return OracleResult(cost, _paths_from_trace(inst.starts, trace))


def oracle_min_total_arrival(inst: Instance, max_makespan: Optional[int] = None) -> OracleResult:
    """Least sum of arrival times, optionally within ``max_makespan`` steps.

    Agents standing on a goal may *park*: a parked agent never moves again
    and blocks its vertex. Each step costs the number of unparked agents.
    """
    _guard(inst)
    g = inst.graph
    goals = inst.goal_set

    def expand(state):
        t, parked, active, _ = state
        if max_makespan is not None and t >= max_makespan:
            return
        nxt_t = t + 1 if max_makespan is not None else 0
        for move in joint_moves(g, active, blocked=frozenset(parked)):
            step = tuple(sorted(zip(active, move)))
            on_goal = [v for v in move if v in goals]
            for mask in range(1 << len(on_goal)):
                park = {on_goal[b] for b in range(len(on_goal)) if mask >> b & 1}
                new_parked = tuple(sorted(set(parked) | park))
                new_active = tuple(sorted(v for v in move if v not in park))
                yield (nxt_t, new_parked, new_active, step), len(active)

    start = (0, (), tuple(sorted(inst.starts)), ())
    found = _uniform_cost(start, expand, lambda s: not s[2])
    if found is None:
        return OracleResult(None)
    cost, chain = found
    trace = [dict(s[3]) for s in chain[1:]]
    plan = _paths_from_trace(inst.starts, trace)
    return OracleResult(cost, plan)


@dataclass(frozen=True)
class GoalReplacementOptima:
    histogram: Dict[int, int]
    min_total_arrival: int
    min_makespan: int

    @property
    def histogram_total_arrival(self) -> int:
        return sum(t * c for t, c in self.histogram.items())

    @property
    def histogram_makespan(self) -> int:
        return max(self.histogram)


def _absorbing_step(g: Graph, active: Tuple[int, ...], goals: frozenset):
    for move in joint_moves(g, active, shared=goals):
        remaining = tuple(sorted(v for v in move if v not in goals))
        yield remaining, len(move) - len(remaining)


def oracle_goal_replacement(inst: Instance) -> GoalReplacementOptima:
    """Lexicographically largest arrival histogram, plus the separate optima."""
    _guard(inst)
    g = inst.graph
    goals = inst.goal_set
    start = tuple(sorted(inst.starts))
    limit = inst.n * g.vertex_count + g.vertex_count

    histogram: Dict[int, int] = {}
    layer = {start}
    t = 0
    while () not in layer:
        t += 1
        if t > limit:
            raise RuntimeError("histogram search did not finish")
        best, nxt = -1, set()
        for state in layer:
            for s2, arrived in _absorbing_step(g, state, goals):
                if arrived > best:
                    best, nxt = arrived, {s2}
                elif arrived == best:
                    nxt.add(s2)
        if best:
            histogram[t] = best
        layer = nxt

    seen = {start}
    frontier = [start]
    makespan = 0
    while () not in seen:
        makespan += 1
        nxt = []
        for state in frontier:
            for s2, _ in _absorbing_step(g, state, goals):
                if s2 not in seen:
                    seen.add(s2)
                    nxt.append(s2)
        frontier = nxt

    found = _uniform_cost(
        start,
        lambda s: ((s2, len(s)) for s2, _ in _absorbing_step(g, s, goals)),
        lambda s: not s,
    )
    return GoalReplacementOptima(histogram, found[0], makespan)


def arrival_makespan_tradeoff(inst: Instance):
    """``((S*, M_S), (S_M, M*))``: least total arrival with the least makespan
    any such plan can have, and least makespan with the least total arrival
    any such plan can have."""
    best_sum = oracle_min_total_arrival(inst).value
    best_span = oracle_min_makespan(inst).value
    sum_at_span = oracle_min_total_arrival(inst, max_makespan=best_span).value
    span = best_span
    while oracle_min_total_arrival(inst, max_makespan=span).value != best_sum:
        span += 1
    return (best_sum, span), (sum_at_span, best_span)


def distance_makespan_tradeoff(inst: Instance):
    """``((M*, D_M), (M_D, D*))`` in (makespan, total distance) form."""
    best_dist = oracle_min_total_distance(inst).value
    best_span = oracle_min_makespan(inst).value
    dist_at_span = oracle_min_total_distance(inst, max_makespan=best_span).value
    span = best_span
    while oracle_min_total_distance(inst, max_makespan=span).value != best_dist:
        span += 1
    return (best_span, dist_at_span), (span, best_dist)


def oracle_escape(g: Graph, evaders: Sequence[int], boundary: Sequence[int]) -> Optional[Tuple[Tuple[int, ...], ...]]:
    """Backtracking search for vertex-disjoint evader-to-boundary paths.

    Paths stop at the first boundary vertex they touch; cutting a path
    there only frees vertices, so no solution is lost. Returns the paths or
    None when none exist.
    """
    if len(evaders) > 5 or g.vertex_count > 16:
        raise OracleGuardExceeded("escape oracle is limited to 5 evaders on 16 vertices")
    exits = set(boundary)
    evader_set = set(evaders)
    used: set = set()
    chosen: List[Tuple[int, ...]] = []

    def paths_from(v, trail):
        if v in exits:
            yield tuple(trail)
            return
        for w in g.adjacency[v]:
            if w in used or w in trail or w in evader_set:
                continue
            trail.append(w)
            yield from paths_from(w, trail)
            trail.pop()

    def place(i):
        if i == len(evaders):
            return True
        e = evaders[i]
        for p in paths_from(e, [e]):
            used.update(p)
            chosen.append(p)
            if place(i + 1):
                return True
            chosen.pop()
            used.difference_update(p)
        return False

    return tuple(chosen) if place(0) else None


def find_tradeoffs(rng, attempts: int = 5000, max_vertices: int = 8):
    """Random search for instances on which the objectives pull apart.

    Returns ``(arrival_vs_makespan, distance_vs_makespan)``; each entry is an
    instance where both coordinates of the two optima differ strictly, or
    None if the search came up empty.
    """
    from .instances import random_graph_instance

    by_arrival = by_distance = None
    for _ in range(attempts):
        V = rng.randint(4, max_vertices)
        n = rng.randint(2, min(3, V // 2))
        inst = random_graph_instance(rng, V, n, rng.randint(0, 2))
        if by_arrival is None:
            (s1, m1), (s2, m2) = arrival_makespan_tradeoff(inst)
            if s1 < s2 and m2 < m1:
                by_arrival = inst
        if by_distance is None:
            (m1, d1), (m2, d2) = distance_makespan_tradeoff(inst)
            if m1 < m2 and d2 < d1:
                by_distance = inst
        if by_arrival is not None and by_distance is not None:
            break
    return by_arrival, by_distance
