import pytest

from flowplan.graph import (
    GOAL_REPLACEMENT,
    LABELED,
    Graph,
    Instance,
    Plan,
    arrival_time,
    compute_ell,
    cycle_graph,
    distance_matrix,
    distances_from,
    grid_graph,
    path_graph,
    shortest_path,
    validate_instance,
    validate_plan,
)
from flowplan.instances import two_star_instance


def test_grid_numbering_skips_blocked_cells():
    g = grid_graph(2, 3, blocked={(0, 1)})
    assert g.vertex_count == 5
    assert g.coords == ((0, 0), (0, 2), (1, 0), (1, 1), (1, 2))
    assert g.vertex_of((1, 1)) == 3
    assert g.has_edge(0, 2) and not g.has_edge(0, 1)
    assert g.edge_count == 4
    with pytest.raises(KeyError):
        g.vertex_of((0, 1))


def test_adjacency_sorted_and_edges_normalised():
    g = Graph(4, ((3, 0), (2, 0), (1, 0)))
    assert g.adjacency[0] == (1, 2, 3)
    assert g.edges == ((0, 3), (0, 2), (0, 1))
    assert g.edge_id(3, 0) == 0


def test_validate_instance_messages():
    g = Graph(4, ((0, 1), (2, 3)))
    assert "not connected" in validate_instance(Instance(g, (0,), (1,)))
    p = path_graph(3)
    assert "starts/goals not disjoint" in validate_instance(Instance(p, (0,), (0,)))
    assert "duplicate goals" in validate_instance(Instance(p, (0, 1), (2, 2)))
    assert validate_instance(Instance(p, (0, 1), (2, 2), GOAL_REPLACEMENT)) == []
    assert any("duplicate edge" in m for m in validate_instance(Instance(Graph(2, ((0, 1), (1, 0))), (0,), (1,))))
    assert any("more agents" in m for m in validate_instance(Instance(path_graph(2), (0, 1, 2), (0, 1, 2))))


def test_distances_and_shortest_path_ties():
    g = cycle_graph(6)
    assert distances_from(g, 0) == [0, 1, 2, 3, 2, 1]
    assert shortest_path(g, 0, 3) == (0, 1, 2, 3)
    assert distances_from(Graph(3, ((0, 1),)), 0)[2] == -1


def test_ell_of_two_star():
    inst = two_star_instance(3, 4)
    assert compute_ell(inst) == 4
    assert all(d == 4 for row in distance_matrix(inst) for d in row)


def test_arrival_time_ignores_revisits():
    assert arrival_time((0, 1, 2, 2)) == 2
    assert arrival_time((0, 1, 0, 1)) == 3
    assert arrival_time((5,)) == 0


def test_plan_statistics():
    plan = Plan(((0, 1, 2, 2), (3, 3, 4, 5)))
    assert plan.horizon == 3
    assert plan.arrival_times() == (2, 3)
    assert plan.makespan == 3
    assert plan.total_arrival == 5
    assert plan.total_distance == 4
    assert plan.arrival_histogram() == {2: 1, 3: 1}
    assert plan.extended(5).paths[0] == (0, 1, 2, 2, 2, 2)


def test_validate_plan_detects_meet_and_head_on():
    g = path_graph(4)
    inst = Instance(g, (0, 3), (1, 2), LABELED)
    swap = Plan(((0, 1, 2, 1), (3, 2, 1, 2)))
    problems = validate_plan(inst, swap)
    assert problems[0].startswith("meet: agents 0 and 1 at vertex") or "head-on" in problems[0]
    assert any("head-on: agents 0 and 1" in m and "t=1->2" in m for m in problems)
    meet = Plan(((0, 1, 1), (3, 2, 1)))
    assert any(m.startswith("meet: agents 0 and 1 at vertex 1 at t=2") for m in validate_plan(inst, meet))


def test_validate_plan_unlabeled_accepts_any_matching():
    g = path_graph(4)
    inst = Instance(g, (0, 1), (2, 3))
    assert validate_plan(inst, Plan(((0, 1, 2), (1, 2, 3)))) == []
    assert validate_plan(inst.with_mode(LABELED), Plan(((0, 1, 2), (1, 2, 3)))) == []
    assert validate_plan(inst.with_mode(LABELED), Plan(((0, 1, 2, 3), (1, 2, 3, 2)))) != []


def test_validate_plan_rejects_non_edge_and_wrong_start():
    inst = Instance(path_graph(3), (0,), (2,))
    assert any("non-edge" in m for m in validate_plan(inst, Plan(((0, 2),))))
    assert any("starts at" in m for m in validate_plan(inst, Plan(((1, 2),))))
    with pytest.raises(ValueError):
        validate_plan(inst, Plan(((0, 1, 2), (0, 1))))


def test_goal_replacement_allows_sharing_a_goal_after_arrival():
    g = path_graph(4)  # 0 - 1 - 2 - 3
    inst = Instance(g, (0, 2), (3, 3), GOAL_REPLACEMENT)
    ok = Plan(((0, 1, 2, 3), (2, 3, 3, 3)))
    assert validate_plan(inst, ok) == []
    # an agent passing through an occupied goal that is not its final stop
    inst2 = Instance(path_graph(4), (0, 3), (1, 1), GOAL_REPLACEMENT)
    assert validate_plan(inst2, Plan(((0, 1, 1), (3, 2, 1)))) == []
