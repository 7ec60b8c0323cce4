"""Graph, instance and plan data model with collision semantics.

Vertices are dense integer ids ``0..V-1``. Every edge has unit length.
Grid graphs additionally carry ``(row, col)`` coordinates per vertex so
they can be printed back in grid form.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

LABELED = "labeled"
UNLABELED = "unlabeled"
GOAL_REPLACEMENT = "goal_replacement"
MODES = (LABELED, UNLABELED, GOAL_REPLACEMENT)

Path = Tuple[int, ...]
Coord = Tuple[int, int]


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    edges: Tuple[Tuple[int, int], ...]
    coords: Optional[Tuple[Coord, ...]] = None
    shape: Optional[Tuple[int, int]] = None
    adjacency: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    edge_ids: Dict[Tuple[int, int], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple((min(u, v), max(u, v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        nbrs: List[set] = [set() for _ in range(self.vertex_count)]
        ids: Dict[Tuple[int, int], int] = {}
        for i, (u, v) in enumerate(edges):
            if 0 <= u < self.vertex_count and 0 <= v < self.vertex_count and u != v:
                nbrs[u].add(v)
                nbrs[v].add(u)
                ids.setdefault((u, v), i)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(s)) for s in nbrs))
        object.__setattr__(self, "edge_ids", ids)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_ids

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_ids[(min(u, v), max(u, v))]

    def vertex_of(self, coord: Coord) -> int:
        if self.coords is None:
            raise ValueError("graph has no coordinates")
        index = self._coord_index()
        if coord not in index:
            raise KeyError(f"no free cell at {coord}")
        return index[coord]

    def _coord_index(self) -> Dict[Coord, int]:
        cached = self.__dict__.get("_coord_cache")
        if cached is None:
            cached = {c: i for i, c in enumerate(self.coords or ())}
            object.__setattr__(self, "_coord_cache", cached)
        return cached


def grid_graph(rows: int, cols: int, blocked: Iterable[Coord] = ()) -> Graph:
    """4-connected grid over the free cells, numbered in row-major order."""
    blocked = set(blocked)
    cells = [(r, c) for r in range(rows) for c in range(cols) if (r, c) not in blocked]
    index = {cell: i for i, cell in enumerate(cells)}
    edges = []
    for (r, c), i in index.items():
        for nb in ((r, c + 1), (r + 1, c)):
            j = index.get(nb)
            if j is not None:
                edges.append((i, j))
    return Graph(len(cells), tuple(edges), coords=tuple(cells), shape=(rows, cols))


def path_graph(count: int) -> Graph:
    return Graph(count, tuple((i, i + 1) for i in range(count - 1)))


def cycle_graph(count: int) -> Graph:
    return Graph(count, tuple((i, (i + 1) % count) for i in range(count)))


@dataclass(frozen=True)
class Instance:
    """Graph plus agents: ``starts[i]`` and ``goals[i]`` belong to agent ``i``.

    In goal-replacement mode ``goals`` may repeat; the goal set is the set
    of distinct values.
    """

    graph: Graph
    starts: Tuple[int, ...]
    goals: Tuple[int, ...]
    mode: str = UNLABELED

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(self.starts))
        object.__setattr__(self, "goals", tuple(self.goals))

    @property
    def n(self) -> int:
        return len(self.starts)

    @property
    def goal_set(self) -> frozenset:
        return frozenset(self.goals)

    def distinct_goals(self) -> Tuple[int, ...]:
        """Goal vertices in first-appearance order, without repeats."""
        return tuple(dict.fromkeys(self.goals))

    def with_mode(self, mode: str) -> "Instance":
        return Instance(self.graph, self.starts, self.goals, mode)


@dataclass(frozen=True)
class Plan:
    """Timestep-indexed vertex paths sharing one horizon.

    Paths are padded to the common horizon by repeating their final vertex.
    All statistics are derived from the paths on access.
    """

    paths: Tuple[Path, ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(tuple(p) for p in self.paths))

    @property
    def n(self) -> int:
        return len(self.paths)

    @property
    def horizon(self) -> int:
        return len(self.paths[0]) - 1 if self.paths else 0

    def arrival_times(self) -> Tuple[int, ...]:
        return tuple(arrival_time(p) for p in self.paths)

    @property
    def makespan(self) -> int:
        return max(self.arrival_times(), default=0)

    @property
    def total_arrival(self) -> int:
        return sum(self.arrival_times())

    @property
    def total_distance(self) -> int:
        return sum(sum(1 for a, b in zip(p, p[1:]) if a != b) for p in self.paths)

    def arrival_histogram(self) -> Dict[int, int]:
        return dict(sorted(Counter(self.arrival_times()).items()))

    def extended(self, horizon: int) -> "Plan":
        """Same plan padded (never truncated) to ``horizon``."""
        if horizon < self.horizon:
            raise ValueError("cannot shrink a plan")
        pad = horizon - self.horizon
        return Plan(tuple(p + (p[-1],) * pad for p in self.paths))


def arrival_time(path: Sequence[int]) -> int:
    """Earliest index from which the path stays at its final vertex."""
    k = len(path) - 1
    while k > 0 and path[k - 1] == path[-1]:
        k -= 1
    return k


def validate_instance(inst: Instance) -> List[str]:
    """Return every violated graph/instance precondition; empty means valid."""
    g = inst.graph
    report = []
    V = g.vertex_count
    if V < 1:
        report.append("graph has no vertices")
    seen = set()
    for u, v in g.edges:
        if not (0 <= u < V and 0 <= v < V):
            report.append(f"edge ({u},{v}) references a vertex outside 0..{V - 1}")
        elif u == v:
            report.append(f"self-loop at vertex {u}")
        elif (u, v) in seen:
            report.append(f"duplicate edge ({u},{v})")
        seen.add((u, v))
    if V >= 1 and len(_reachable(g, 0)) != V:
        report.append("not connected")

    n = inst.n
    if inst.mode not in MODES:
        report.append(f"unknown mode {inst.mode!r}")
    if n < 1:
        report.append("no agents")
    if n > V:
        report.append(f"more agents ({n}) than vertices ({V})")
    if len(inst.goals) != n:
        report.append(f"{n} starts but {len(inst.goals)} goals")
    for name, ids in (("start", inst.starts), ("goal", inst.goals)):
        for x in ids:
            if not 0 <= x < V:
                report.append(f"{name} {x} is not a vertex")
    if len(set(inst.starts)) != len(inst.starts):
        report.append("duplicate starts")
    if inst.mode != GOAL_REPLACEMENT and len(set(inst.goals)) != len(inst.goals):
        report.append("duplicate goals")
    if set(inst.starts) & set(inst.goals):
        report.append("starts/goals not disjoint")
    return report


def _reachable(g: Graph, source: int) -> set:
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def distances_from(g: Graph, source: int) -> List[int]:
    """Hop distances from ``source``; -1 marks unreachable vertices."""
    if not 0 <= source < g.vertex_count:
        raise ValueError(f"invalid vertex id {source}")
    dist = [-1] * g.vertex_count
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def shortest_path(g: Graph, source: int, target: int) -> Path:
    """A shortest path; ties go to the smallest next vertex id."""
    dist = distances_from(g, target)
    if dist[source] < 0:
        raise ValueError(f"no path from {source} to {target}")
    path = [source]
    while path[-1] != target:
        u = path[-1]
        path.append(min(v for v in g.adjacency[u] if dist[v] == dist[u] - 1))
    return tuple(path)


def distance_matrix(inst: Instance) -> List[List[int]]:
    """``D[i][j]`` = hop distance from ``starts[i]`` to the j-th distinct goal."""
    goals = inst.distinct_goals()
    rows = []
    for s in inst.starts:
        d = distances_from(inst.graph, s)
        rows.append([d[g] for g in goals])
    return rows


def compute_ell(inst: Instance) -> int:
    """Largest start-to-goal hop distance over all start/goal pairs."""
    return max(max(row) for row in distance_matrix(inst))


def validate_plan(inst: Instance, plan: Plan) -> List[str]:
    """Check a plan against the instance's endpoint and collision rules.

    Returns a list of violations sorted by timestep (the first entry is the
    earliest problem); an empty list means the plan is valid. Raises
    ``ValueError`` if the paths do not share one length.
    """
    paths = plan.paths
    if len({len(p) for p in paths}) > 1:
        raise ValueError("paths have different lengths")
    report: List[Tuple[int, str]] = []
    n, g = inst.n, inst.graph
    if len(paths) != n:
        return [f"plan has {len(paths)} paths for {n} agents"]
    if not paths or not paths[0]:
        return ["plan is empty"]
    T = len(paths[0]) - 1
    for i, p in enumerate(paths):
        bad = [v for v in p if not 0 <= v < g.vertex_count]
        if bad:
            return [f"agent {i} visits invalid vertex {bad[0]}"]

    goal_set = inst.goal_set
    for i, p in enumerate(paths):
        if p[0] != inst.starts[i]:
            report.append((0, f"agent {i} starts at {p[0]}, expected {inst.starts[i]}"))
        for k in range(T):
            if p[k] != p[k + 1] and not g.has_edge(p[k], p[k + 1]):
                report.append((k, f"agent {i} jumps {p[k]}->{p[k + 1]} at t={k}->{k + 1} along a non-edge"))

    finals = [p[-1] for p in paths]
    if inst.mode == LABELED:
        for i, v in enumerate(finals):
            if v != inst.goals[i]:
                report.append((T, f"agent {i} ends at {v}, expected goal {inst.goals[i]}"))
    elif inst.mode == UNLABELED:
        if sorted(finals) != sorted(inst.goals):
            report.append((T, f"final positions {sorted(finals)} do not match goals {sorted(inst.goals)}"))
    else:
        for i, v in enumerate(finals):
            if v not in goal_set:
                report.append((T, f"agent {i} ends at {v}, which is not a goal"))

    arrivals = plan.arrival_times()
    for k in range(T + 1):
        at: Dict[int, List[int]] = {}
        for i, p in enumerate(paths):
            at.setdefault(p[k], []).append(i)
        for v, agents in at.items():
            if len(agents) < 2:
                continue
            if inst.mode == GOAL_REPLACEMENT and v in goal_set and all(
                arrivals[i] <= k and finals[i] == v for i in agents
            ):
                continue
            for a, b in zip(agents, agents[1:]):
                report.append((k, f"meet: agents {a} and {b} at vertex {v} at t={k}"))
    for k in range(T):
        moves = {}
        for i, p in enumerate(paths):
            if p[k] != p[k + 1]:
                moves[(p[k], p[k + 1])] = i
        for (u, v), i in moves.items():
            j = moves.get((v, u))
            if j is not None and i < j:
                report.append((k, f"head-on: agents {i} and {j} swap on edge ({u},{v}) at t={k}->{k + 1}"))
    report.sort(key=lambda item: item[0])
    return [msg for _, msg in report]
