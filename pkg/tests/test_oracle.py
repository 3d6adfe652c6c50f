import heapq
import itertools

import pytest

from wampf import GridMap, NoSolution, ProblemInstance, solve_joint
from wampf.domain import check_path
from wampf.movingai import gen_random_scenario
from wampf.oracle import BudgetExceeded, TooManyAgents


def dijkstra_joint(inst):
    """Plain uniform-cost search over (positions, finished) with no heuristic.

    Written against the grid directly so it shares no code with the solver.
    An agent may stop for good at its goal; until then it pays 1 per step.
    """
    g = inst.graph
    n = inst.n_agents
    moves = {v: [v] + sorted(g.adj[v]) for v in range(g.n) if not g.blocked[v]}
    start = (tuple(inst.starts), (False,) * n)
    dist = {start: 0}
    pq = [(0, start)]
    while pq:
        d, (pos, done) = heapq.heappop(pq)
        if d > dist[(pos, done)]:
            continue
        if all(done):
            return d
        per = []
        for i in range(n):
            if done[i]:
                per.append([(pos[i], True)])
                continue
            opts = [(q, False) for q in moves[pos[i]]]
            if pos[i] == inst.goals[i]:
                opts.append((pos[i], True))
            per.append(opts)
        for combo in itertools.product(*per):
            nxt = tuple(q for q, _ in combo)
            if len(set(nxt)) < n:
                continue
            if any(nxt[i] == pos[j] and nxt[j] == pos[i] and nxt[i] != pos[i]
                   for i in range(n) for j in range(i + 1, n)):
                continue
            fin = tuple(f for _, f in combo)
            cost = d + sum(1 for i in range(n) if not done[i] and not fin[i])
            key = (nxt, fin)
            if cost < dist.get(key, 1 << 60):
                dist[key] = cost
                heapq.heappush(pq, (cost, key))
    return None


@pytest.mark.parametrize("seed", range(25))
def test_oracle_matches_uniform_cost_search(seed):
    n = 2 + seed % 2
    inst = gen_random_scenario(5, 5, 0.15, n, 500 + seed)
    res = solve_joint(inst)
    assert res.optimal_cost == dijkstra_joint(inst)
    assert check_path(res.path, inst) == []


def test_oracle_head_on_in_open_grid():
    g = GridMap(3, 3)
    inst = ProblemInstance.on_grid(g, [(0, 1), (2, 1)], [(2, 1), (0, 1)])
    # one agent side-steps: two moves over the 4-move lower bound
    assert solve_joint(inst).optimal_cost == dijkstra_joint(inst) == 6


def test_oracle_limits():
    inst = gen_random_scenario(8, 8, 0.0, 5, 1)
    with pytest.raises(TooManyAgents):
        solve_joint(inst)
    inst3 = gen_random_scenario(12, 12, 0.0, 3, 2)
    with pytest.raises(BudgetExceeded):
        solve_joint(inst3, limit=2)


def test_oracle_no_solution_in_dead_end():
    # two agents in a 2-cell corridor must swap: impossible
    g = GridMap.from_rows([".."])
    inst = ProblemInstance.on_grid(g, [(0, 0), (1, 0)], [(1, 0), (0, 0)])
    with pytest.raises(NoSolution):
        solve_joint(inst)
