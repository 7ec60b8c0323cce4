"""Solvers for unlabeled and goal-replacement planning via time-expanded flow.

Every flow-based solver follows the same pipeline: build the time-expanded
network for a horizon, run a flow engine, split the flow into unit paths
and project them back onto the graph. ``build_dag_schedule`` is the
flow-free constructive alternative: shortest paths on a minimum-cost
start/goal matching, ordered so that agents released one step apart never
collide.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .flow import Network, decompose, max_flow, min_cost_max_flow
from .graph import (
    GOAL_REPLACEMENT,
    UNLABELED,
    Graph,
    Instance,
    Path,
    Plan,
    compute_ell,
    distance_matrix,
    shortest_path,
    validate_instance,
    validate_plan,
)
from .timexp import EVERY_LAYER, BuildOptions, build_ten, project_flow_to_plan


class SolverError(AssertionError):
    """An outcome the theory rules out; indicates a bug, never bad input."""


class Infeasible(Exception):
    """No plan exists under the requested (user-supplied) horizon."""


@dataclass(frozen=True)
class SolveResult:
    plan: Plan
    objective_value: int
    horizon_used: int
    certificate: Optional[int] = None
    details: Dict = field(default_factory=dict, compare=False)


def horizon_bound(inst: Instance) -> int:
    """Horizon that always suffices (and is sometimes needed): n + ell - 1."""
    return inst.n + compute_ell(inst) - 1


def arrival_horizon_bound(n: int, V: int) -> int:
    """Horizon within which a plan of least total arrival time exists."""
    if n < 1 or V < n:
        raise ValueError("need 1 <= n <= V")
    return (n - 1) * (n - 2) // 2 + V


def makespan_lower_bound(inst: Instance) -> int:
    """Bottleneck distance bound, taken from both the start and goal side."""
    D = distance_matrix(inst)
    by_start = max(min(row) for row in D)
    by_goal = max(min(col) for col in zip(*D))
    return max(by_start, by_goal)


def _check(inst: Instance, allowed=(UNLABELED, GOAL_REPLACEMENT)) -> None:
    problems = validate_instance(inst)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    if inst.mode not in allowed:
        raise ValueError(f"{inst.mode} instances are not supported here")


def _options(inst: Instance, **kw) -> BuildOptions:
    return BuildOptions(goal_replacement=inst.mode == GOAL_REPLACEMENT, **kw)


def probe_horizon(inst: Instance, T: int) -> int:
    """Max-flow value of the T-step network (n means a plan exists)."""
    return max_flow(build_ten(inst, T, _options(inst)), limit=inst.n).value


def _plan_from_flow(inst, net, flow) -> Plan:
    plan = project_flow_to_plan(inst, net, decompose(net, flow))
    problems = validate_plan(inst, plan)
    if problems:
        raise SolverError("projected plan is invalid: " + problems[0])
    return plan


def solve_feasible(inst: Instance, horizon: Optional[int] = None) -> SolveResult:
    _check(inst)
    bound = horizon_bound(inst)
    T = bound if horizon is None else horizon
    net = build_ten(inst, T, _options(inst))
    flow = max_flow(net)
    if flow.value < inst.n:
        if horizon is not None and horizon < bound:
            raise Infeasible(f"only {flow.value} of {inst.n} agents fit in {T} steps")
        raise SolverError(f"max flow {flow.value} < {inst.n} at horizon {T}")
    plan = _plan_from_flow(inst, net, flow)
    if plan.makespan > bound:
        raise SolverError(f"makespan {plan.makespan} exceeds bound {bound}")
    return SolveResult(plan, plan.makespan, T, details={"flow_value": flow.value, "augmentations": flow.augmentations})


def solve_min_makespan(inst: Instance, max_horizon: Optional[int] = None) -> SolveResult:
    """Binary search for the least horizon whose network carries n units."""
    _check(inst)
    lo = makespan_lower_bound(inst)
    hi = horizon_bound(inst) if max_horizon is None else max_horizon
    if hi < lo:
        raise Infeasible(f"horizon {hi} is below the distance bound {lo}")
    probes: Dict[int, int] = {}
    best = None

    def probe(T):
        net = build_ten(inst, T, _options(inst))
        flow = max_flow(net, limit=inst.n)
        probes[T] = flow.value
        return (T, net, flow) if flow.value == inst.n else None

    while lo < hi:
        mid = (lo + hi) // 2
        found = probe(mid)
        if found:
            best, hi = found, mid
        else:
            lo = mid + 1
    if best is None or best[0] != lo:
        best = probe(lo)
    if best is None:
        if max_horizon is not None:
            raise Infeasible(f"no plan within {max_horizon} steps")
        raise SolverError("no feasible horizon up to the bound")
    T, net, flow = best
    plan = _plan_from_flow(inst, net, flow)
    if plan.makespan != T:
        raise SolverError(f"plan makespan {plan.makespan} != optimum {T}")
    return SolveResult(plan, T, T, certificate=T, details={"probes": probes, "lower_bound": makespan_lower_bound(inst)})


def solve_min_total_distance(inst: Instance, horizon: Optional[int] = None) -> SolveResult:
    """Min-cost max-flow with free waiting; cost counts edge traversals."""
    _check(inst, (UNLABELED,))
    T = horizon_bound(inst) if horizon is None else horizon
    net = build_ten(inst, T, BuildOptions(holdover_cost=0))
    flow = min_cost_max_flow(net)
    if flow.value < inst.n:
        if horizon is not None:
            raise Infeasible(f"only {flow.value} of {inst.n} agents fit in {T} steps")
        raise SolverError(f"max flow {flow.value} < {inst.n} at horizon {T}")
    plan = _plan_from_flow(inst, net, flow)
    if plan.total_distance != flow.cost:
        raise SolverError(f"plan distance {plan.total_distance} != flow cost {flow.cost}")
    _, lower = min_distance_assignment(inst)
    return SolveResult(plan, flow.cost, T, certificate=lower)


def solve_earliest_arrival(inst: Instance) -> SolveResult:
    """Arrival-time-priced min-cost flow on the goal-replacement network.

    Every step inside the network (wait or move) costs 1 and the sink link
    from layer ``t`` costs ``t``, so a unit arriving at ``t`` costs ``2t``;
    the flow therefore minimises total arrival time. ``details`` carries the
    per-step arrival histogram.
    """
    _check(inst, (GOAL_REPLACEMENT,))
    T = horizon_bound(inst)
    net = build_ten(inst, T, BuildOptions(holdover_cost=1, sink_mode=EVERY_LAYER, goal_replacement=True))
    flow = min_cost_max_flow(net)
    if flow.value < inst.n:
        raise SolverError(f"max flow {flow.value} < {inst.n} at horizon {T}")
    plan = _plan_from_flow(inst, net, flow)
    if 2 * plan.total_arrival != flow.cost:
        raise SolverError(f"flow cost {flow.cost} != twice total arrival {plan.total_arrival}")
    return SolveResult(
        plan,
        plan.total_arrival,
        T,
        details={"histogram": plan.arrival_histogram(), "makespan": plan.makespan},
    )


# --- assignment -------------------------------------------------------

def min_cost_assignment(cost: Sequence[Sequence[int]]) -> List[int]:
    """Square assignment by successive shortest augmenting paths.

    Rows are inserted one at a time; each insertion runs a Dijkstra-like
    search over columns with row/column potentials. Returns ``col[i]``.
    """
    n = len(cost)
    INF = float("inf")
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    owner = [0] * (n + 1)  # owner[j]: row (1-based) matched to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = owner[j0]
            delta, j1 = INF, 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta, j1 = minv[j], j
            for j in range(n + 1):
                if used[j]:
                    u[owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    col = [0] * n
    for j in range(1, n + 1):
        col[owner[j] - 1] = j - 1
    return col


def min_distance_assignment(inst: Instance) -> Tuple[List[Tuple[int, int]], int]:
    """Start/goal pairing of least total hop distance, and that total."""
    D = distance_matrix(inst)
    goals = inst.distinct_goals()
    if len(goals) != inst.n:
        raise ValueError("assignment needs as many distinct goals as agents")
    col = min_cost_assignment(D)
    pairs = [(s, goals[col[i]]) for i, s in enumerate(inst.starts)]
    return pairs, sum(D[i][col[i]] for i in range(inst.n))


# --- unscheduled path sets ----------------------------------------------

@dataclass(frozen=True)
class OrientedPathSet:
    """Start-to-goal paths, each edge oriented the way its paths traverse it."""

    paths: Tuple[Path, ...]

    def head(self, i: int) -> int:
        return self.paths[i][0]

    def tail(self, i: int) -> int:
        return self.paths[i][-1]

    def length(self, i: int) -> int:
        return len(self.paths[i]) - 1

    @property
    def total_length(self) -> int:
        return sum(len(p) - 1 for p in self.paths)

    def directed_edges(self) -> set:
        return {(a, b) for p in self.paths for a, b in zip(p, p[1:])}

    def opposite_edges(self) -> List[Tuple[int, int]]:
        """Edges traversed in both directions (each reported once)."""
        used = self.directed_edges()
        return sorted((a, b) for a, b in used if a < b and (b, a) in used)

    def orientation(self) -> Dict[Tuple[int, int], Tuple[int, int]]:
        """Map each undirected edge ``(min, max)`` to its traversal direction."""
        if self.opposite_edges():
            raise ValueError("some edge is used in both directions")
        return {(min(a, b), max(a, b)): (a, b) for a, b in self.directed_edges()}

    def find_cycle(self) -> Optional[List[int]]:
        """A directed cycle ``[c0, ..., ck-1]`` in the oriented edge set, or None."""
        succ: Dict[int, List[int]] = {}
        for a, b in sorted(self.directed_edges()):
            succ.setdefault(a, []).append(b)
        state: Dict[int, int] = {}
        for root in sorted(succ):
            if state.get(root):
                continue
            stack = [(root, iter(succ.get(root, ())))]
            trail = [root]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                    trail.pop()
                elif state.get(nxt) == 1:
                    return trail[trail.index(nxt):]
                elif not state.get(nxt):
                    state[nxt] = 1
                    trail.append(nxt)
                    stack.append((nxt, iter(succ.get(nxt, ()))))
        return None


def _shortcut(path: Sequence[int]) -> Tuple[int, ...]:
    """Remove every loop so that no vertex repeats."""
    out: List[int] = []
    where: Dict[int, int] = {}
    for v in path:
        if v in where:
            cut = where[v]
            for w in out[cut + 1:]:
                del where[w]
            del out[cut + 1:]
        else:
            where[v] = len(out)
            out.append(v)
    return tuple(out)


def _exchange_tails(p: Path, q: Path, x: int, y: int) -> Tuple[Path, Path]:
    """``p`` up to ``x`` then ``q`` from ``x``; ``q`` up to ``y`` then ``p`` from ``y``."""
    i, j = p.index(x), q.index(x)
    k, m = q.index(y), p.index(y)
    return p[:i] + q[j:], q[:k] + p[m:]


def _fix_opposite(paths: List[Path]) -> bool:
    """Reroute one pair that crosses an edge head-on; shortens the total by 2."""
    for i, p in enumerate(paths):
        steps = {(a, b) for a, b in zip(p, p[1:])}
        for j in range(len(paths)):
            if j == i:
                continue
            q = paths[j]
            for c, d in zip(q, q[1:]):
                if (d, c) in steps:
                    # p = .. u v ..,  q = .. v u ..   with u = d, v = c
                    u, v = d, c
                    paths[i], paths[j] = _exchange_tails(p, q, u, v)
                    return True
    return False


def _fix_cycle(paths: List[Path], cycle: List[int]) -> None:
    """Exchange tails so that one path runs further along ``cycle``.

    Length-neutral and edge-multiset-preserving; repeated application makes
    some path contain the whole cycle, which ``_shortcut`` then removes.
    """
    k = len(cycle)
    succ = {cycle[i]: cycle[(i + 1) % k] for i in range(k)}

    def run(p: Path) -> Tuple[int, int]:
        best = (0, -1)
        i = 0
        while i < len(p) - 1:
            if succ.get(p[i]) == p[i + 1]:
                j = i
                while j < len(p) - 1 and succ.get(p[j]) == p[j + 1]:
                    j += 1
                best = max(best, (j - i, j))
                i = j
            else:
                i += 1
        return best

    runs = [run(p) for p in paths]
    a = max(range(len(paths)), key=lambda i: runs[i][0])
    end = paths[a][runs[a][1]]
    nxt = succ[end]
    b = next(i for i, q in enumerate(paths) if i != a and any(x == end and y == nxt for x, y in zip(q, q[1:])))
    p, q = paths[a], paths[b]
    i, j = p.index(end), q.index(end)
    paths[a], paths[b] = p[:i] + q[j:], q[:j] + p[i:]


def repair_path_set(paths: Sequence[Path], edge_count: int) -> OrientedPathSet:
    """Rearrange start-goal paths until no edge is used both ways and the
    orientation is acyclic, never increasing the total length."""
    work = [_shortcut(p) for p in paths]
    cap = max(1, len(work) * max(1, edge_count))
    total = sum(len(p) for p in work)
    for _ in range(cap):
        if _fix_opposite(work):
            pass
        else:
            cycle = OrientedPathSet(tuple(work)).find_cycle()
            if cycle is None:
                return OrientedPathSet(tuple(work))
            _fix_cycle(work, cycle)
        work = [_shortcut(p) for p in work]
        new_total = sum(len(p) for p in work)
        if new_total > total:
            raise SolverError("path rearrangement increased the total length")
        total = new_total
    raise SolverError("path set repair did not converge")


def _extract_order(paths: Sequence[Path]) -> Tuple[List[Path], List[int]]:
    """Peel paths off in the release order that makes delayed starts safe.

    The path set is treated as an edge-use multiset. Each round picks, over
    the remaining edge uses, a shortest path from a remaining start to a
    *standalone* goal (one no remaining path passes through), removes it,
    and continues. Returns the ordered paths and, per round, the number of
    standalone goals that were available.
    """
    uses: Dict[Tuple[int, int], int] = {}
    for p in paths:
        for a, b in zip(p, p[1:]):
            uses[(a, b)] = uses.get((a, b), 0) + 1
    heads = sorted(p[0] for p in paths)
    tails = {p[-1] for p in paths}
    ordered: List[Path] = []
    standalone_counts: List[int] = []
    while heads:
        succ: Dict[int, List[int]] = {}
        pred: Dict[int, List[int]] = {}
        for (a, b), c in uses.items():
            if c > 0:
                succ.setdefault(a, []).append(b)
                pred.setdefault(b, []).append(a)
        standalone = sorted(g for g in tails if not succ.get(g))
        standalone_counts.append(len(standalone))
        if not standalone:
            raise SolverError("no standalone goal remains")
        # distance from every node to the nearest standalone goal, backwards
        to_goal = {g: 0 for g in standalone}
        queue = deque(standalone)
        while queue:
            x = queue.popleft()
            for w in pred.get(x, ()):
                if w not in to_goal:
                    to_goal[w] = to_goal[x] + 1
                    queue.append(w)
        candidates = [(to_goal[h], h) for h in heads if h in to_goal]
        if not candidates:
            raise SolverError("no start reaches a standalone goal")
        d, h = min(candidates)
        path = [h]
        while to_goal[path[-1]] > 0:
            x = path[-1]
            path.append(min(y for y in succ[x] if to_goal.get(y) == to_goal[x] - 1))
        for a, b in zip(path, path[1:]):
            uses[(a, b)] -= 1
        heads.remove(h)
        tails.remove(path[-1])
        ordered.append(tuple(path))
    return ordered, standalone_counts


def build_dag_schedule(inst: Instance) -> SolveResult:
    """Constructive plan: matched shortest paths released one step apart."""
    _check(inst, (UNLABELED,))
    g = inst.graph
    pairs, lower = min_distance_assignment(inst)
    raw = [shortest_path(g, s, t) for s, t in pairs]
    qset = repair_path_set(raw, g.edge_count)
    if qset.total_length != lower:
        raise SolverError(f"path set length {qset.total_length} != assignment bound {lower}")
    ordered, standalone_counts = _extract_order(qset.paths)
    T = horizon_bound(inst)
    start_index = {s: i for i, s in enumerate(inst.starts)}
    paths: List[Optional[Path]] = [None] * inst.n
    for delay, q in enumerate(ordered):
        p = (q[0],) * delay + q
        if len(p) > T + 1:
            raise SolverError(f"scheduled path exceeds horizon {T}")
        paths[start_index[q[0]]] = p + (q[-1],) * (T + 1 - len(p))
    plan = Plan(tuple(paths))
    problems = validate_plan(inst, plan)
    if problems:
        raise SolverError("scheduled plan is invalid: " + problems[0])
    if plan.total_distance != lower:
        raise SolverError("scheduled distance differs from the assignment bound")
    ordered_set = OrientedPathSet(tuple(ordered))
    return SolveResult(
        plan,
        plan.makespan,
        T,
        certificate=lower,
        details={"path_set": ordered_set, "standalone_counts": standalone_counts},
    )


# --- escape ---------------------------------------------------------------

@dataclass(frozen=True)
class EscapeResult:
    feasible: bool
    paths: Tuple[Path, ...] = ()


def grid_boundary(g: Graph) -> List[int]:
    """Free cells on the outer rim of the grid (degree < 4 when no coords)."""
    if g.coords is not None and g.shape is not None:
        R, C = g.shape
        return [i for i, (r, c) in enumerate(g.coords) if r in (0, R - 1) or c in (0, C - 1)]
    return [v for v in range(g.vertex_count) if len(g.adjacency[v]) < 4]


def solve_escape(g: Graph, evaders: Sequence[int], boundary: Optional[Sequence[int]] = None) -> EscapeResult:
    """Vertex-disjoint paths from every evader to distinct boundary vertices.

    Each vertex is split into an in/out pair joined by a unit gate; a unit
    max flow of value ``len(evaders)`` exists iff the paths do.
    """
    V = g.vertex_count
    for e in evaders:
        if not 0 <= e < V:
            raise ValueError(f"evader {e} is off the grid")
    if len(set(evaders)) != len(evaders):
        raise ValueError("evaders must be distinct")
    exits = sorted(set(grid_boundary(g) if boundary is None else boundary))
    source, sink = 2 * V, 2 * V + 1
    edges = [(2 * v, 2 * v + 1, 1) for v in range(V)]
    for a, b in g.edges:
        edges.append((2 * a + 1, 2 * b, 1))
        edges.append((2 * b + 1, 2 * a, 1))
    edges += [(source, 2 * e, 1) for e in evaders]
    edges += [(2 * b + 1, sink, 1) for b in exits]
    net = Network.from_edges(2 * V + 2, edges, source, sink)
    flow = max_flow(net)
    if flow.value < len(evaders):
        return EscapeResult(False)
    exit_set = set(exits)
    by_start = {}
    for nodes in decompose(net, flow, drop_cycles=True):
        verts = [x // 2 for x in nodes[1:-1:2]]
        for k, v in enumerate(verts):
            if v in exit_set:
                verts = verts[: k + 1]
                break
        by_start[verts[0]] = tuple(verts)
    return EscapeResult(True, tuple(by_start[e] for e in evaders))
