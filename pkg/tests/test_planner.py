import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowplan import planner
from flowplan.graph import GOAL_REPLACEMENT, LABELED, Instance, grid_graph, path_graph, validate_plan
from flowplan.instances import random_grid_instance, two_star_instance


def test_two_star_values():
    inst = two_star_instance(2, 3)
    assert planner.solve_min_makespan(inst).objective_value == 4
    assert planner.solve_min_total_distance(inst).objective_value == 6
    assert planner.probe_horizon(inst, 3) == 1
    assert planner.probe_horizon(inst, 4) == 2


def test_feasible_plan_within_bound():
    inst = two_star_instance(3, 4)
    res = planner.solve_feasible(inst)
    assert validate_plan(inst, res.plan) == []
    assert res.plan.makespan <= planner.horizon_bound(inst)


def test_explicit_short_horizon_is_infeasible():
    inst = two_star_instance(3, 3)
    with pytest.raises(planner.Infeasible):
        planner.solve_feasible(inst, horizon=4)
    with pytest.raises(planner.Infeasible):
        planner.solve_min_makespan(inst, max_horizon=4)


def test_labeled_instances_rejected():
    inst = two_star_instance(2, 3, LABELED)
    with pytest.raises(ValueError):
        planner.solve_feasible(inst)


def test_bounds():
    assert planner.arrival_horizon_bound(1, 5) == 5
    assert planner.arrival_horizon_bound(4, 10) == 13
    inst = Instance(path_graph(5), (0, 1), (3, 4))
    assert planner.makespan_lower_bound(inst) == 3
    assert planner.solve_min_makespan(inst).objective_value == 3


def test_min_cost_assignment_matches_permutations():
    rng = random.Random(4)
    for _ in range(50):
        n = rng.randint(1, 6)
        cost = [[rng.randint(0, 9) for _ in range(n)] for _ in range(n)]
        col = planner.min_cost_assignment(cost)
        assert sorted(col) == list(range(n))
        best = min(sum(cost[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
        assert sum(cost[i][col[i]] for i in range(n)) == best


def test_distance_objective_equals_assignment_bound():
    rng = random.Random(7)
    for _ in range(15):
        inst = random_grid_instance(rng, 5, 5, rng.randint(1, 4))
        res = planner.solve_min_total_distance(inst)
        _, lower = planner.min_distance_assignment(inst)
        assert res.objective_value == lower == res.plan.total_distance


def test_repair_removes_opposite_edges_and_cycles():
    # two paths crossing one edge in opposite directions
    fixed = planner.repair_path_set([(0, 1, 2, 3), (4, 2, 1, 5)], edge_count=10)
    assert fixed.opposite_edges() == []
    assert fixed.total_length <= 6
    # a directed 4-cycle formed by two paths
    paths = [(10, 0, 1, 2, 12), (11, 2, 3, 0, 13)]
    fixed = planner.repair_path_set(paths, edge_count=20)
    assert fixed.find_cycle() is None
    assert fixed.opposite_edges() == []
    assert fixed.total_length <= 8
    assert sorted(p[0] for p in fixed.paths) == [10, 11]
    assert sorted(p[-1] for p in fixed.paths) == [12, 13]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5))
def test_dag_schedule_properties(seed, n):
    inst = random_grid_instance(random.Random(seed), 5, 5, n)
    res = planner.build_dag_schedule(inst)
    qset = res.details["path_set"]
    assert qset.opposite_edges() == []
    assert qset.find_cycle() is None
    assert all(c >= 1 for c in res.details["standalone_counts"])
    assert validate_plan(inst, res.plan) == []
    assert res.plan.total_distance == res.certificate
    assert res.plan.makespan <= planner.horizon_bound(inst)


def test_earliest_arrival_shares_goal():
    inst = Instance(path_graph(5), (0, 1, 2), (4, 4, 4), GOAL_REPLACEMENT)
    res = planner.solve_earliest_arrival(inst)
    assert res.details["histogram"] == {2: 1, 3: 1, 4: 1}
    assert res.objective_value == 9


def test_earliest_arrival_needs_goal_replacement():
    with pytest.raises(ValueError):
        planner.solve_earliest_arrival(two_star_instance(2, 3))


def test_escape_basics():
    g = grid_graph(3, 3)
    assert not planner.solve_escape(g, list(range(9))).feasible
    res = planner.solve_escape(g, [4])
    assert res.feasible and res.paths[0][0] == 4 and len(res.paths[0]) == 2
    assert planner.grid_boundary(g) == [0, 1, 2, 3, 5, 6, 7, 8]


def test_escape_paths_are_disjoint_and_end_on_exits():
    g = grid_graph(5, 5)
    evaders = [g.vertex_of((r, c)) for r, c in [(1, 1), (2, 2), (3, 3), (2, 1)]]
    res = planner.solve_escape(g, evaders)
    assert res.feasible
    used = [v for p in res.paths for v in p]
    assert len(used) == len(set(used))
    rim = set(planner.grid_boundary(g))
    for e, p in zip(evaders, res.paths):
        assert p[0] == e and p[-1] in rim
        assert all(v not in rim for v in p[:-1])


def test_escape_with_explicit_exits():
    g = path_graph(5)
    assert planner.solve_escape(g, [1, 2], boundary=[0]).feasible is False
    assert planner.solve_escape(g, [1, 3], boundary=[0, 4]).paths == ((1, 0), (3, 4))
