import pytest

from fixtures import cascade_example, single_window_example, slot_example
from wampf import (FrameworkState, Graph, NWAStar, ProblemInstance, StopCondition,
                   XStar, detect_collisions, path_cost, plan_independently, rec_wampf, solve,
                   solve_joint)
from wampf.domain import check_path
from wampf.movingai import gen_random_scenario

PLANNERS = (NWAStar, XStar)


def kinds(pl):
    return [k for k, _, _ in pl.trace]


@pytest.mark.parametrize("cls", PLANNERS)
def test_single_window_walkthrough(cls):
    inst = single_window_example()
    g = inst.graph
    pl = cls(inst, radius=1)
    events = []
    res = solve(inst, pl, sink=events.append)
    assert kinds(pl) == ["plan", "regrow", "regrow"]
    wins = [w for _, w, _ in pl.trace]
    assert [len(w.agents) for w in wins] == [2, 2, 2]
    assert [len(w.cells) for w in wins] == [9, 25, 49]
    assert [d["cost"] for _, _, d in pl.trace] == [6, 8, 13]
    assert [d["start_time"] for _, _, d in pl.trace] == [2, 1, 0]
    # the first repair already costs one wait over the independent plan
    assert res.initial_cost == 12
    assert [e.cost for e in events] == [13, 13, 13]
    assert events[-1].optimal and events[-1].bound == 1.0
    assert res.cost == solve_joint(inst).optimal_cost == 13
    waits = sum(1 for p in res.path.paths for u, v in zip(p, p[1:]) if u == v)
    assert waits == 1
    assert g.cell(res.path.paths[0][3]) == (3, 5)


@pytest.mark.parametrize("cls", PLANNERS)
def test_cascading_windows_merge_to_three_agents(cls):
    inst = cascade_example()
    pl = cls(inst, radius=1)
    p = plan_independently(inst)
    first = detect_collisions(p, first_only=True)[0]
    assert first.agents == (0, 1) and first.timestep == 1
    w, p1 = pl.plan_in(pl.first_collision_window(p), p)
    induced = detect_collisions(p1, first_only=True)[0]
    assert induced.agents == (0, 2) and induced.timestep == 7
    assert inst.graph.cell(induced.location[0]) == (6, 1)

    pl = cls(inst, radius=1)
    res = solve(inst, pl)
    sizes = [len(w.agents) for _, w, _ in pl.trace]
    assert max(sizes) == 3 and res.lnaiaw == 3
    assert any(w.agents == (0, 1, 2) for _, w, _ in pl.trace)
    assert all(3 not in w.agents for _, w, _ in pl.trace)  # d never joins a window
    assert res.optimal and res.cost == solve_joint(inst).optimal_cost


@pytest.mark.parametrize("cls", PLANNERS)
def test_slot_repair_then_padded_improvement(cls):
    inst, p0 = slot_example()
    g = inst.graph
    assert path_cost(p0) == path_cost(plan_independently(inst))
    pl = cls(inst, radius=1)
    w, p1 = pl.plan_in(pl.first_collision_window(p0), p0)
    assert w.agents == (0, 1)
    assert path_cost(p1) == path_cost(p0) + 2
    assert g.vertex(4, 4) in p1.paths[1]  # b ducks into the slot
    nxt = detect_collisions(p1, first_only=True)[0]
    assert nxt.agents == (1, 2)

    pl = cls(inst, radius=1)
    state = FrameworkState(inst, p0, path_cost(p0))
    res = rec_wampf(state, pl)
    regrows = [(w, d) for k, w, d in pl.trace if k == "regrow" and w.agents == (0, 1)]
    w1, d1 = regrows[0]
    assert d1["applied"] and d1["padded"] == {0: 0, 1: 2}
    assert res.optimal and res.cost == solve_joint(inst).optimal_cost
    assert res.lnaiaw == 3


@pytest.mark.parametrize("cls", PLANNERS)
def test_collision_free_instance_reports_once(cls):
    inst = gen_random_scenario(20, 20, 0.0, 1, 1)
    events = []
    res = solve(inst, cls(inst), sink=events.append)
    assert len(events) == 1 and events[0].optimal and events[0].bound == 1.0
    assert res.lnaiaw == 0 and res.iterations == 1


@pytest.mark.parametrize("seed", range(15))
def test_anytime_costs_and_bounds_non_increasing(seed):
    inst = gen_random_scenario(12, 12, 0.1, 4, 70 + seed)
    for cls in PLANNERS:
        events = []
        res = solve(inst, cls(inst), sink=events.append)
        costs = [e.cost for e in events]
        bounds = [e.bound for e in events]
        assert costs == sorted(costs, reverse=True)
        assert bounds == sorted(bounds, reverse=True)
        assert all(b >= 1.0 for b in bounds)
        assert events[-1].optimal and bounds[-1] == 1.0
        assert check_path(res.path, inst) == []


def test_stop_conditions():
    inst = gen_random_scenario(16, 16, 0.05, 6, 3)
    res = solve(inst, XStar(inst), stop=StopCondition(first_valid=True))
    assert res.status in ("first", "optimal")
    assert res.first_iteration_valid and not detect_collisions(res.path)
    res2 = solve(inst, XStar(inst), stop=StopCondition(max_iterations=1))
    assert res2.iterations == 1
    res3 = solve(inst, NWAStar(inst), stop=StopCondition(timeout_s=0.0))
    assert res3.status in ("timeout", "optimal")


def test_general_graph_with_hop_windows():
    # ring of 8 with a spur at vertex 0: two agents cross on the ring
    edges = [(i, (i + 1) % 8) for i in range(8)] + [(0, 8)]
    g = Graph(9, edges)
    inst = ProblemInstance(g, [8, 4], [4, 8])
    for cls in PLANNERS:
        pl = cls(inst, radius=1)
        res = solve(inst, pl)
        assert res.optimal and res.cost == solve_joint(inst).optimal_cost
        assert check_path(res.path, inst) == []
        assert pl.trace
        assert all(w.describe().startswith("hop") for _, w, _ in pl.trace)


def test_event_dict_shape():
    inst = single_window_example()
    events = []
    solve(inst, XStar(inst, radius=1), sink=events.append)
    d = events[0].as_dict()
    assert list(d) == ["event", "iteration", "cost", "bound", "elapsed_us", "optimal"]
    assert d["event"] == "solution"

