"""Time-expanded flow network for a planning instance and a horizon ``T``.

Every vertex ``v`` gets ``2T + 1`` copies ``v(0), v(1), v(1)', ..., v(T)'``
where ``v(0)`` doubles as ``v(0)'``. Inside one timestep the copies are
joined by a *vertex gate* ``v(t) -> v(t)'``; between timesteps by a
*holdover* ``v(t)' -> v(t+1)`` (waiting). Each graph edge ``(a, b)`` and step
``t`` gets a two-node gadget::

    a(t)' --\\                 /--> a(t+1)
             gadget_tail -> gadget_head
    b(t)' --/                 \\--> b(t+1)

whose single middle edge lets at most one agent cross the edge per step,
in either direction but never both.

Node ids and edge ids are laid out arithmetically (see the ``*_node`` and
``*_edge`` helpers) so the builder is fully vectorised and plans map to
flows without lookup tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .flow import INDEX, Flow, Network, make_flow
from .graph import GOAL_REPLACEMENT, Instance, Plan, arrival_time, validate_instance, validate_plan

FINAL_LAYER = "final_layer"
EVERY_LAYER = "every_layer_arrival_cost"

EDGE_KINDS = ("holdover", "vertex_gate", "gadget_arm", "gadget_middle", "source_link", "sink_link")
NODE_KINDS = ("in_copy", "out_copy", "gadget_tail", "gadget_head", "super_source", "super_sink")


@dataclass(frozen=True)
class BuildOptions:
    holdover_cost: int = 1
    sink_mode: str = FINAL_LAYER
    goal_replacement: bool = False


@dataclass(frozen=True)
class TenNode:
    kind: str
    base_vertex: Optional[int] = None
    layer: Optional[int] = None
    base_edge: Optional[int] = None


@dataclass(frozen=True, eq=False)
class TimeExpandedNetwork(Network):
    instance: Instance
    horizon: int
    options: BuildOptions

    # --- node layout -------------------------------------------------
    @property
    def _V(self) -> int:
        return self.instance.graph.vertex_count

    @property
    def _E(self) -> int:
        return self.instance.graph.edge_count

    @property
    def gadget_base(self) -> int:
        return self._V * (2 * self.horizon + 1)

    def out_node(self, v: int, t: int) -> int:
        return 2 * t * self._V + v

    def in_node(self, v: int, t: int) -> int:
        if t == 0:
            return v
        return (2 * t - 1) * self._V + v

    def gadget_nodes(self, e: int, t: int):
        tail = self.gadget_base + 2 * (t * self._E + e)
        return tail, tail + 1

    def node(self, i: int) -> TenNode:
        V, E = self._V, self._E
        if i == self.source:
            return TenNode("super_source")
        if i == self.sink:
            return TenNode("super_sink")
        if i < self.gadget_base:
            c, v = divmod(i, V)
            if c % 2 == 0:
                return TenNode("out_copy", v, c // 2)
            return TenNode("in_copy", v, (c + 1) // 2)
        k, side = divmod(i - self.gadget_base, 2)
        t, e = divmod(k, E)
        return TenNode("gadget_head" if side else "gadget_tail", layer=t, base_edge=e)

    # --- edge layout -------------------------------------------------
    def holdover_edge(self, v: int, t: int) -> int:
        return t * self._V + v

    def gate_edge(self, v: int, t: int) -> int:
        return self._V * self.horizon + (t - 1) * self._V + v

    def gadget_edge(self, e: int, t: int, k: int) -> int:
        """``k``: 0/1 arm from endpoint a/b, 2 middle, 3/4 arm to endpoint a/b."""
        return 2 * self._V * self.horizon + 5 * (t * self._E + e) + k

    def source_edge(self, agent: int) -> int:
        return 2 * self._V * self.horizon + 5 * self._E * self.horizon + agent

    def sink_edge(self, goal_index: int, t: int) -> int:
        base = self.source_edge(self.instance.n)
        if self.options.sink_mode == FINAL_LAYER:
            return base + goal_index
        return base + t * len(self.goal_order) + goal_index

    @property
    def goal_order(self):
        return self.instance.distinct_goals()

    def edge_kind(self, j: int) -> str:
        V, E, T = self._V, self._E, self.horizon
        if j < V * T:
            return "holdover"
        if j < 2 * V * T:
            return "vertex_gate"
        if j < 2 * V * T + 5 * E * T:
            return "gadget_middle" if (j - 2 * V * T) % 5 == 2 else "gadget_arm"
        if j < self.source_edge(self.instance.n):
            return "source_link"
        return "sink_link"

    def dump(self) -> str:
        """Plain-text edge list ``from to capacity cost kind``."""
        lines = [
            f"{int(a)} {int(b)} {int(c)} {int(w)} {self.edge_kind(j)}"
            for j, (a, b, c, w) in enumerate(zip(self.tail, self.head, self.capacity, self.cost))
        ]
        return "\n".join(lines) + "\n"


def expected_size(inst: Instance, T: int, opts: BuildOptions = BuildOptions()):
    """Closed-form ``(node_count, edge_count)`` of a build."""
    V, E, n = inst.graph.vertex_count, inst.graph.edge_count, inst.n
    G = len(inst.distinct_goals())
    sinks = G if opts.sink_mode == FINAL_LAYER else G * (T + 1)
    return V * (2 * T + 1) + 2 * E * T + 2, 5 * E * T + 2 * V * T + n + sinks


def build_ten(inst: Instance, T: int, opts: BuildOptions = BuildOptions()) -> TimeExpandedNetwork:
    if T < 1:
        raise ValueError("horizon must be at least 1")
    problems = validate_instance(inst)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    if opts.sink_mode not in (FINAL_LAYER, EVERY_LAYER):
        raise ValueError(f"unknown sink mode {opts.sink_mode!r}")
    g = inst.graph
    V, E, n = g.vertex_count, g.edge_count, inst.n
    goals = np.array(inst.distinct_goals(), dtype=INDEX)
    relax = opts.goal_replacement
    wide = np.ones(V, dtype=INDEX)
    if relax:
        wide[goals] = n

    ts = np.arange(T, dtype=INDEX)
    vs = np.arange(V, dtype=INDEX)
    # holdover v(t)' -> v(t+1), t = 0..T-1
    h_tail = (2 * ts[:, None] * V + vs).ravel()
    h_head = ((2 * ts[:, None] + 1) * V + vs).ravel()
    h_cap = np.tile(wide, T)
    h_cost = np.full(V * T, opts.holdover_cost, dtype=INDEX)
    # gate v(t) -> v(t)', t = 1..T
    g_tail = h_head.copy()
    g_head = h_head + V
    g_cap = np.tile(wide, T)
    g_cost = np.zeros(V * T, dtype=INDEX)
    # gadgets
    ends = np.array(g.edges, dtype=INDEX).reshape(-1, 2)
    a, b = ends[:, 0], ends[:, 1]
    base = V * (2 * T + 1)
    tail = base + 2 * (ts[:, None] * E + np.arange(E, dtype=INDEX))
    head = tail + 1
    out_a = 2 * ts[:, None] * V + a
    out_b = 2 * ts[:, None] * V + b
    in_a = (2 * ts[:, None] + 1) * V + a
    in_b = (2 * ts[:, None] + 1) * V + b
    x_tail = np.stack([out_a, out_b, tail, head, head], axis=-1).ravel()
    x_head = np.stack([tail, tail, head, in_a, in_b], axis=-1).ravel()
    x_cap = np.ones(5 * E * T, dtype=INDEX)
    x_cost = np.tile(np.array([0, 0, 1, 0, 0], dtype=INDEX), E * T)

    source = base + 2 * E * T
    sink = source + 1
    s_tail = np.full(n, source, dtype=INDEX)
    s_head = np.array(inst.starts, dtype=INDEX)
    s_cap = np.ones(n, dtype=INDEX)
    s_cost = np.zeros(n, dtype=INDEX)

    sink_cap = n if relax else 1
    if opts.sink_mode == FINAL_LAYER:
        k_tail = 2 * T * V + goals
        k_cost = np.zeros(len(goals), dtype=INDEX)
    else:
        layers = np.arange(T + 1, dtype=INDEX)
        k_tail = (2 * layers[:, None] * V + goals).ravel()
        k_cost = np.repeat(layers, len(goals))
    k_head = np.full(len(k_tail), sink, dtype=INDEX)
    k_cap = np.full(len(k_tail), sink_cap, dtype=INDEX)

    return TimeExpandedNetwork(
        node_count=sink + 1,
        tail=np.concatenate([h_tail, g_tail, x_tail, s_tail, k_tail]),
        head=np.concatenate([h_head, g_head, x_head, s_head, k_head]),
        capacity=np.concatenate([h_cap, g_cap, x_cap, s_cap, k_cap]),
        cost=np.concatenate([h_cost, g_cost, x_cost, s_cost, k_cost]),
        source=int(source),
        sink=int(sink),
        instance=inst,
        horizon=T,
        options=opts,
    )


def project_flow_to_plan(inst: Instance, net: TimeExpandedNetwork, unit_paths: Sequence[Sequence[int]]) -> Plan:
    """Turn unit source->sink node paths into one vertex path per agent.

    Each unit path is sampled at its out-copies ``v(t)'``; an agent that
    leaves for the sink early is padded at its goal through the horizon.
    In goal-replacement mode an agent is considered absorbed by the first
    goal it reaches.
    """
    T = net.horizon
    V = inst.graph.vertex_count
    start_index = {s: i for i, s in enumerate(inst.starts)}
    indptr, order = net.out_index
    paths: List[Optional[tuple]] = [None] * inst.n
    goal_set = inst.goal_set
    for nodes in unit_paths:
        if len(nodes) < 3 or nodes[0] != net.source or nodes[-1] != net.sink:
            raise ValueError("unit path must run from the super source to the super sink")
        for u, v in zip(nodes, nodes[1:]):
            if v not in net.head[order[indptr[u]:indptr[u + 1]]]:
                raise ValueError(f"{u}->{v} is not an edge of the network")
        verts = []
        for u in nodes[1:-1]:
            if u < net.gadget_base:
                c, v = divmod(u, V)
                if c % 2 == 0:
                    if c // 2 != len(verts):
                        raise ValueError(f"unit path skips to layer {c // 2}")
                    verts.append(v)
        if not verts or verts[0] not in start_index:
            raise ValueError("unit path does not begin at a start vertex")
        if inst.mode == GOAL_REPLACEMENT:
            for k, v in enumerate(verts):
                if v in goal_set:
                    verts = verts[: k + 1]
                    break
        verts += [verts[-1]] * (T + 1 - len(verts))
        i = start_index[verts[0]]
        if paths[i] is not None:
            raise ValueError(f"two unit paths leave start {verts[0]}")
        paths[i] = tuple(verts)
    if any(p is None for p in paths):
        raise ValueError("some agent has no unit path")
    return Plan(tuple(paths))


def plan_to_flow(inst: Instance, net: TimeExpandedNetwork, plan: Plan) -> Flow:
    """Mark each agent's vertex copies and connect them into one unit of flow."""
    if plan.horizon != net.horizon:
        raise ValueError(f"plan horizon {plan.horizon} != network horizon {net.horizon}")
    problems = validate_plan(inst, plan)
    if problems:
        raise ValueError("invalid plan: " + problems[0])
    g = inst.graph
    goal_index = {v: j for j, v in enumerate(net.goal_order)}
    f = np.zeros(net.edge_count, dtype=INDEX)
    every_layer = net.options.sink_mode == EVERY_LAYER
    for i, p in enumerate(plan.paths):
        f[net.source_edge(i)] += 1
        stop = len(p) - 1
        if every_layer:
            stop = min(stop, arrival_time(p))
        for t in range(stop):
            u, v = p[t], p[t + 1]
            if u == v:
                f[net.holdover_edge(u, t)] += 1
            else:
                e = g.edge_id(u, v)
                a = g.edges[e][0]
                f[net.gadget_edge(e, t, 0 if u == a else 1)] += 1
                f[net.gadget_edge(e, t, 2)] += 1
                f[net.gadget_edge(e, t, 3 if v == a else 4)] += 1
            f[net.gate_edge(v, t + 1)] += 1
        f[net.sink_edge(goal_index[p[stop]], stop)] += 1
    return make_flow(net, f)

