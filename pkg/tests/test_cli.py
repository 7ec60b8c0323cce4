import io
import random

import pytest

from flowplan.cli import run
from flowplan.formats import (
    EscapeSpec,
    ParseError,
    format_escape,
    format_instance,
    format_plan,
    parse_escape,
    parse_instance,
    parse_plan,
)
from flowplan.graph import GOAL_REPLACEMENT, LABELED, Plan, compute_ell, grid_graph
from flowplan.instances import random_grid_instance, two_star_instance
from flowplan.planner import solve_min_total_distance

TWO_STAR = "graph 6 5\n0 1\n0 2\n0 3\n1 4\n1 5\nagents 2\n2 4\n3 5\n"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def star_file(tmp_path):
    p = tmp_path / "star.txt"
    p.write_text(TWO_STAR)
    return p


def test_parse_graph_form():
    inst = parse_instance("graph 3 2\n0 1\n1 2\nagents 1\n0 2\n")
    assert inst.graph.vertex_count == 3 and inst.n == 1
    assert inst.starts == (0,) and inst.goals == (2,)
    assert compute_ell(parse_instance(TWO_STAR)) == 3


def test_parse_grid_form_and_mode():
    text = "grid 2 3\n.#.\n...\nagents 1\n0 0 0 2\nmode goal_replacement\n"
    inst = parse_instance(text)
    assert inst.mode == GOAL_REPLACEMENT
    assert inst.graph.vertex_count == 5
    assert inst.goals == (inst.graph.vertex_of((0, 2)),)


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("grid 3 3\n...\n###\n...\nagents 1\n0 0 2 2\n", None, "not connected"),
        ("graf 3 2\n", 1, "expected 'grid R C'"),
        ("graph 3 2\n0 1\n1 5\nagents 1\n0 2\n", 3, "out of range"),
        ("grid 2 2\n.#\n..\nagents 1\n0 1 1 1\n", 5, "blocked"),
        ("graph 3 2\n0 1\n1 2\nagents 2\n0 2\n0 1\n", 6, "duplicate start"),
        ("graph 3 2\n0 1\n1 2\nagents 2\n0 2\n1 0\n", 6, "goal is the start"),
        ("graph 3 2\n0 1\n1 2\nagents 1\n0 x\n", 5, "not an integer"),
        ("graph 3 2\n0 1\n1 2\nagents 1\n0 2\nmode fancy\n", 6, "expected 'mode"),
        ("grid 2 2\n..\n.\n", 3, "map row has 1 cells"),
    ],
)
def test_parse_errors_name_line(text, line, fragment):
    with pytest.raises(ParseError) as info:
        parse_instance(text)
    assert fragment in str(info.value)
    if line is not None:
        assert info.value.line == line


def test_instance_round_trip():
    rng = random.Random(2)
    for mode in ("unlabeled", LABELED, GOAL_REPLACEMENT):
        for _ in range(10):
            inst = random_grid_instance(rng, 4, 5, rng.randint(1, 4), mode=mode)
            assert parse_instance(format_instance(inst)) == inst
    star = parse_instance(TWO_STAR)
    assert parse_instance(format_instance(star)) == star


def test_plan_round_trip():
    inst = random_grid_instance(random.Random(3), 4, 4, 3)
    plan = solve_min_total_distance(inst).plan
    text = format_plan(inst.graph, plan)
    back, footer = parse_plan(text, inst.graph)
    assert sorted(back.paths) == sorted(plan.paths)
    assert footer == {
        "makespan": plan.makespan,
        "total_distance": plan.total_distance,
        "total_arrival": plan.total_arrival,
    }
    assert format_plan(inst.graph, back) == text


def test_escape_round_trip():
    g = grid_graph(3, 3)
    spec = EscapeSpec(g, (4, 0), (2,))
    assert parse_escape(format_escape(spec)) == spec


def test_solve_makespan_two_star(star_file, tmp_path):
    code, out, _ = call("solve", "--objective", "makespan", "--in", str(star_file))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "plan 2 4"
    assert lines[-1].startswith("makespan 4 ")
    # rows are ordered by start vertex
    assert [int(r.split()[0]) for r in lines[1:3]] == [2, 3]


def test_horizon_below_bound_is_infeasible(star_file):
    code, out, _ = call("solve", "--objective", "feasible", "--horizon", "3", "--in", str(star_file))
    assert code == 3 and "infeasible" in out


def test_verify_accepts_and_rejects(star_file, tmp_path):
    plan_file = tmp_path / "plan.txt"
    assert call("solve", "--objective", "distance", "--in", str(star_file), "--out", str(plan_file))[0] == 0
    code, out, _ = call("verify", "--in", str(star_file), "--plan", str(plan_file))
    assert code == 0 and out.startswith("valid")

    bad = tmp_path / "bad.txt"
    bad.write_text("plan 2 4\n2 0 0 1 4\n3 3 0 1 5\n")
    code, out, _ = call("verify", "--in", str(star_file), "--plan", str(bad))
    assert code == 2 and "meet" in out and "t=2" in out


def test_verify_reports_head_on_swap(tmp_path):
    inst = tmp_path / "line.txt"
    inst.write_text("graph 4 3\n0 1\n1 2\n2 3\nagents 2\n0 3\n1 2\n")
    plan = tmp_path / "swap.txt"
    plan.write_text("plan 2 3\n0 1 2 3\n1 2 1 2\n")
    code, out, _ = call("verify", "--in", str(inst), "--plan", str(plan))
    assert code == 2
    assert "head-on: agents 0 and 1" in out and "t=1->2" in out


def test_verify_rejects_wrong_footer(star_file, tmp_path):
    plan = tmp_path / "p.txt"
    plan.write_text("plan 2 4\n2 2 0 1 4\n3 0 1 5 5\nmakespan 9 total_distance 6 total_arrival 7\n")
    code, out, _ = call("verify", "--in", str(star_file), "--plan", str(plan))
    assert code == 2 and "footer makespan" in out


def test_labeled_solve_exit_code(tmp_path):
    p = tmp_path / "l.txt"
    p.write_text(TWO_STAR + "mode labeled\n")
    assert call("solve", "--in", str(p))[0] == 3


def test_arrival_needs_goal_replacement(star_file, tmp_path):
    assert call("solve", "--objective", "arrival", "--in", str(star_file))[0] == 1
    p = tmp_path / "gr.txt"
    p.write_text(TWO_STAR + "mode goal_replacement\n")
    code, out, _ = call("solve", "--objective", "arrival", "--in", str(p))
    assert code == 0 and out.splitlines()[-1] == "makespan 4 total_distance 6 total_arrival 7"


def test_input_errors_exit_one(tmp_path):
    assert call("solve", "--in", str(tmp_path / "missing.txt"))[0] == 1
    assert call("solve", "--bogus")[0] == 1
    assert call("frobnicate")[0] == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("grid 3 3\n...\n###\n...\nagents 1\n0 0 2 2\n")
    code, _, err = call("solve", "--in", str(bad))
    assert code == 1 and "not connected" in err


def test_stats(star_file):
    code, out, _ = call("stats", "--in", str(star_file))
    assert code == 0
    values = dict(line.split() for line in out.splitlines())
    assert values["ell"] == "3" and values["horizon_bound"] == "4"
    assert values["V"] == "6" and values["E"] == "5" and values["n"] == "2"
    assert values["arrival_horizon_bound"] == "6"


def test_escape_command(tmp_path):
    p = tmp_path / "esc.txt"
    p.write_text("grid 3 3\n...\n...\n...\nevaders 1\n1 1\n")
    code, out, _ = call("escape", "--in", str(p))
    assert code == 0 and out.splitlines()[0] == "feasible"
    full = "grid 3 3\n...\n...\n...\nevaders 9\n" + "".join(f"{r} {c}\n" for r in range(3) for c in range(3))
    p.write_text(full)
    assert call("escape", "--in", str(p))[0] == 3


def test_oracle_command_and_guard(star_file, tmp_path):
    code, out, _ = call("oracle", "--objective", "arrival", "--in", str(star_file))
    assert (code, out.strip()) == (0, "arrival 7")
    inst = random_grid_instance(random.Random(1), 8, 8, 8, obstacle_ratio=0.0)
    big = tmp_path / "big.txt"
    big.write_text(format_instance(inst))
    assert call("oracle", "--in", str(big))[0] == 4


def test_distance_batch_agrees_with_oracle(tmp_path):
    rng = random.Random(50)
    for k in range(50):
        inst = random_grid_instance(rng, 3, 4, rng.randint(1, 3), obstacle_ratio=0.15)
        src = tmp_path / f"i{k}.txt"
        src.write_text(format_instance(inst))
        plan = tmp_path / f"p{k}.txt"
        code, out, _ = call("solve", "--objective", "distance", "--in", str(src), "--out", str(plan))
        assert code == 0
        assert call("verify", "--in", str(src), "--plan", str(plan))[0] == 0
        footer = dict(zip(out.split()[0::2], out.split()[1::2]))
        code, oout, _ = call("oracle", "--objective", "distance", "--in", str(src))
        assert code == 0
        assert oout.split() == ["distance", footer["total_distance"]]


def test_plan_file_rows_are_agents_in_start_order():
    inst = two_star_instance(2, 3)
    plan = Plan(((3, 0, 1, 5, 5), (2, 2, 0, 1, 4)))
    assert format_plan(inst.graph, plan).splitlines()[1].startswith("2 ")
