"""Instance generators: the two-star family and random grid instances."""

from __future__ import annotations

import random
from typing import Optional

from .graph import UNLABELED, Graph, Instance, grid_graph


def two_star_instance(n: int, ell: int, mode: str = UNLABELED) -> Instance:
    """Two stars of ``n`` leaves whose hubs are ``ell - 2`` edges apart.

    Starts are the leaves of the first hub, goals those of the second, so
    every start/goal pair is exactly ``ell`` apart and all agents must
    squeeze through the first hub one step at a time.
    """
    if n < 1 or ell < 3:
        raise ValueError("need n >= 1 and ell >= 3")
    hubs = list(range(ell - 1))  # hub path 0 .. ell-2
    edges = [(i, i + 1) for i in range(ell - 2)]
    starts = tuple(range(ell - 1, ell - 1 + n))
    goals = tuple(range(ell - 1 + n, ell - 1 + 2 * n))
    edges += [(hubs[0], s) for s in starts]
    edges += [(hubs[-1], g) for g in goals]
    return Instance(Graph(ell - 1 + 2 * n, tuple(edges)), starts, goals, mode)


def random_grid_instance(
    rng: random.Random,
    rows: int,
    cols: int,
    n: int,
    obstacle_ratio: float = 0.2,
    mode: str = UNLABELED,
    goal_count: Optional[int] = None,
) -> Instance:
    """Random connected grid map with ``n`` agents.

    Random cells are blocked, then only the largest connected component is
    kept free. Retries until that component holds ``n + goal_count`` cells.
    In goal-replacement mode ``goal_count`` distinct goals (default ``n``)
    are shared out among the agents.
    """
    goal_count = n if goal_count is None else goal_count
    need = n + goal_count
    for _ in range(1000):
        blocked = {(r, c) for r in range(rows) for c in range(cols) if rng.random() < obstacle_ratio}
        free = [(r, c) for r in range(rows) for c in range(cols) if (r, c) not in blocked]
        if not free:
            continue
        component = _largest_component(set(free))
        if len(component) < need:
            continue
        blocked = {(r, c) for r in range(rows) for c in range(cols) if (r, c) not in component}
        g = grid_graph(rows, cols, blocked)
        cells = rng.sample(range(g.vertex_count), need)
        starts = tuple(cells[:n])
        goal_pool = cells[n:]
        if goal_count == n:
            goals = tuple(goal_pool)
        else:
            goals = tuple(goal_pool[i % goal_count] for i in range(n))
        return Instance(g, starts, goals, mode)
    raise ValueError("could not place agents; lower the obstacle ratio")


def _largest_component(cells: set) -> set:
    best: set = set()
    seen: set = set()
    for cell in sorted(cells):
        if cell in seen:
            continue
        comp = {cell}
        stack = [cell]
        while stack:
            r, c = stack.pop()
            for nb in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
                if nb in cells and nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        seen |= comp
        if len(comp) > len(best):
            best = comp
    return best


def random_graph_instance(rng: random.Random, vertices: int, n: int, extra_edges: int = 0) -> Instance:
    """Random spanning tree plus ``extra_edges`` chords, with ``n`` agents."""
    if 2 * n > vertices:
        raise ValueError("need at least 2n vertices")
    edges = {(rng.randrange(v), v) for v in range(1, vertices)}
    chords = [(a, b) for a in range(vertices) for b in range(a + 1, vertices) if (a, b) not in edges]
    rng.shuffle(chords)
    edges |= set(chords[:extra_edges])
    cells = rng.sample(range(vertices), 2 * n)
    return Instance(Graph(vertices, tuple(sorted(edges))), tuple(cells[:n]), tuple(cells[n:]))


def tradeoff_instance() -> Instance:
    """Four agents on ten vertices where every pair of objectives conflicts.

    A spine ``s4 - s1 - s2 - s3 - w - g4`` with goals ``g1..g3`` hanging off
    ``s1..s3`` and a bypass ``s4 - x - w``. Dropping three agents onto their
    own pendant goals while the fourth detours is cheapest (total arrival 6,
    distance 6) but takes 3 steps; shifting everyone one place along the
    spine first finishes in 2 steps at total arrival 8 and distance 8.
    """
    s1, s2, s3, s4, g1, g2, g3, g4, w, x = range(10)
    edges = [(s4, s1), (s1, s2), (s2, s3), (s3, w), (w, g4), (s1, g1), (s2, g2), (s3, g3), (s4, x), (x, w)]
    return Instance(Graph(10, tuple(edges)), (s1, s2, s3, s4), (g1, g2, g3, g4))
