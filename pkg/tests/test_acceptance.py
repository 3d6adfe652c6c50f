"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import statistics
import time
from pathlib import Path

from fixtures import (MALFORMED_MAPS, MALFORMED_SCENS, cascade_example, single_window_example,
                      slot_example)
from wampf import (FrameworkState, JointGoal, JointState, NWAStar, StopCondition, XStar,
                   detect_collisions, path_cost, plan_independently, rec_wampf, solve,
                   solve_joint)
from wampf.movingai import (ParseError, cross_instance, gen_random_scenario, parse_map,
                            parse_map_text, parse_scen, render_map, render_scen)
from wampf.search import astar, check_vstp, segment_cost

DATA = Path(__file__).parent / "data"


def test_c1_optimal_vs_oracle(verdict):
    t0 = time.perf_counter()
    bad = []
    for seed in range(200):
        inst = gen_random_scenario(8, 8, 0.10, 2 + seed % 2, seed)
        opt = solve_joint(inst).optimal_cost
        for cls in (XStar, NWAStar):
            res = solve(inst, cls(inst))
            if not res.optimal or res.cost != opt:
                bad.append((seed, cls.name, res.cost, opt))
    dt = time.perf_counter() - t0
    assert verdict(1, not bad, f"200 instances, X*/NWA* final cost == oracle, "
                               f"{len(bad)} mismatches, {dt:.1f}s"), bad[:5]


def test_c2_valid_after_one_iteration(verdict):
    bad = []
    for seed in range(500):
        n = 2 + seed % 9  # 2..10 agents
        inst = gen_random_scenario(32, 32, 0.05, n, seed)
        res = solve(inst, XStar(inst), stop=StopCondition(max_iterations=1))
        if res.first_iteration_valid is False or detect_collisions(res.path):
            bad.append(seed)
    assert verdict(2, not bad, f"collision-free after iteration 1 in {500 - len(bad)}/500"), bad


def test_c3_vstp(verdict):
    violations = []
    checks = 0
    for seed in range(100):
        inst = gen_random_scenario(8, 8, 0.1, 2, 2000 + seed)

        def hook(tree):
            nonlocal checks
            checks += 1
            violations.extend(check_vstp(tree))

        astar(inst.graph, inst.goals, JointState(inst.starts, 0),
              JointGoal(inst.goals, 3), hook=hook)
    # mutations: corrupt one g of a closed state in finished trees
    detected = 0
    for seed in range(10):
        inst = gen_random_scenario(8, 8, 0.1, 2, 2000 + seed)
        seg, tree = astar(inst.graph, inst.goals, JointState(inst.starts, 0),
                          JointGoal(inst.goals, 3))
        victim = next(s for s in seg[1:] if s in tree.closed)
        tree.g[victim] += 1
        detected += bool(check_vstp(tree))
    ok = not violations and detected == 10
    assert verdict(3, ok, f"{len(violations)} violations over {checks} checks in 100 searches; "
                          f"{detected}/10 mutations detected")


def test_c4_xstar_reuse_equals_fresh(verdict):
    steps = 0
    bad = []
    for seed in range(100):
        inst = gen_random_scenario(10, 10, 0.15, 2 + seed % 2, seed)
        xs = XStar(inst)
        solve(inst, xs)
        for w, gp, cost in xs.stage_log:
            seg, _ = astar(inst.graph, xs.goals_of(w), gp.start, gp.goal, w)
            steps += 1
            if seg is None or segment_cost(seg) != cost:
                bad.append(seed)
    ok = not bad and steps > 0
    assert verdict(4, ok, f"{steps} grow steps, {len(bad)} differ from fresh in-window A*")


def test_c5_monotone_and_bounds(verdict):
    problems = []
    runs = 0
    for seed in range(60):
        inst = gen_random_scenario(10, 10, 0.1, 3 + seed % 2, 300 + seed)
        opt = solve_joint(inst).optimal_cost
        for cls in (XStar, NWAStar):
            events = []
            solve(inst, cls(inst), sink=events.append)
            runs += 1
            costs = [e.cost for e in events]
            if costs != sorted(costs, reverse=True):
                problems.append((seed, "cost", costs))
            for e in events:
                if not (e.bound >= e.cost / opt - 1e-12 and e.cost / opt >= 1):
                    problems.append((seed, "bound", e))
            if not (events[-1].optimal and events[-1].bound == 1.0):
                problems.append((seed, "terminal", events[-1]))
    assert verdict(5, not problems, f"{runs} runs, {len(problems)} monotonicity/bound "
                                    f"violations"), problems[:5]


def test_c6_first_bound_tightness(verdict):
    bounds = []
    for seed in range(30):
        inst = gen_random_scenario(50, 50, 0.05, 10, 1000 + seed)
        events = []
        solve(inst, XStar(inst), sink=events.append, stop=StopCondition(first_valid=True))
        bounds.append(events[0].bound)
    med = statistics.median(bounds)
    assert verdict(6, med <= 1.02, f"median first-solution bound {med:.4f} (<= 1.02), "
                                   f"max {max(bounds):.4f}")


def test_c7_cross_orderings(verdict):
    inst = cross_instance(20)
    xv, xo, no, jo = [], [], [], []
    for _ in range(30):
        t = time.perf_counter()
        r = solve(inst, XStar(inst))
        xo.append(time.perf_counter() - t)
        xv.append(r.time_to_valid)
        t = time.perf_counter()
        solve(inst, NWAStar(inst))
        no.append(time.perf_counter() - t)
        t = time.perf_counter()
        solve_joint(inst, limit=None)
        jo.append(time.perf_counter() - t)
    mxv, mxo, mno, mjo = (statistics.median(v) for v in (xv, xo, no, jo))
    ok = mxv < 0.25 * mjo and mxo < mno
    assert verdict(7, ok, f"X* valid {100 * mxv / mjo:.1f}% of joint (< 25%), "
                          f"X* optimal {100 * mxo / mjo:.0f}% vs NWA* {100 * mno / mjo:.0f}%")


def _single_window_ok(cls):
    inst = single_window_example()
    pl = cls(inst, radius=1)
    events = []
    res = solve(inst, pl, sink=events.append)
    return ([k for k, _, _ in pl.trace] == ["plan", "regrow", "regrow"]
            and [len(w.agents) for _, w, _ in pl.trace] == [2, 2, 2]
            and [d["cost"] for _, _, d in pl.trace] == [6, 8, 13]
            and res.initial_cost + 1 == res.cost == solve_joint(inst).optimal_cost
            and all(e.cost == res.initial_cost + 1 for e in events)
            and res.optimal)


def _cascade_ok(cls):
    inst = cascade_example()
    pl = cls(inst, radius=1)
    p = plan_independently(inst)
    _, p1 = pl.plan_in(pl.first_collision_window(p), p)
    induced = detect_collisions(p1, first_only=True)[0]
    pl = cls(inst, radius=1)
    res = solve(inst, pl)
    sizes = [len(w.agents) for _, w, _ in pl.trace]
    return (induced.timestep == 7 and induced.agents == (0, 2)
            and any(w.agents == (0, 1, 2) for _, w, _ in pl.trace)
            and max(sizes) == 3 and res.lnaiaw == 3
            and res.cost == solve_joint(inst).optimal_cost)


def _slot_ok(cls):
    inst, p0 = slot_example()
    pl = cls(inst, radius=1)
    _, p1 = pl.plan_in(pl.first_collision_window(p0), p0)
    pl = cls(inst, radius=1)
    res = rec_wampf(FrameworkState(inst, p0, path_cost(p0)), pl)
    regrow = [d for k, w, d in pl.trace if k == "regrow" and w.agents == (0, 1)][0]
    return (path_cost(p1) == path_cost(p0) + 2
            and regrow["padded"] == {0: 0, 1: 2} and regrow["applied"]
            and res.cost == solve_joint(inst).optimal_cost)


def test_c8_worked_examples(verdict):
    results = {}
    for name, check in (("single-window", _single_window_ok), ("cascade", _cascade_ok),
                        ("slot", _slot_ok)):
        results[name] = all(check(cls) for cls in (NWAStar, XStar))
    detail = ", ".join(f"{k} {'ok' if v else 'BAD'}" for k, v in results.items())
    assert verdict(8, all(results.values()), detail)


def test_c9_parser_round_trip(verdict):
    raw_map = (DATA / "lak_excerpt.map").read_bytes()
    raw_scen = (DATA / "lak_excerpt.scen").read_bytes()
    pm = parse_map_text(raw_map)
    same_map = render_map(pm.grid, pm.rows).encode() == raw_map
    same_scen = render_scen(parse_scen(raw_scen, pm.grid)).encode() == raw_scen
    hits = 0
    for text, line in MALFORMED_MAPS:
        try:
            parse_map(text)
        except ParseError as e:
            hits += e.line == line
    for text, line in MALFORMED_SCENS:
        try:
            parse_scen(text)
        except ParseError as e:
            hits += e.line == line
    total = len(MALFORMED_MAPS) + len(MALFORMED_SCENS)
    ok = same_map and same_scen and hits == total == 6
    assert verdict(9, ok, f"map/scen byte-identical: {same_map}/{same_scen}; "
                          f"{hits}/{total} malformed inputs rejected at the right line")
