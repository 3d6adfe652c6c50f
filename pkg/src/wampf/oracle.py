"""Brute-force joint-space A*: ground truth for optimality checks."""
from __future__ import annotations

from dataclasses import dataclass

from .domain import GlobalPath, JointGoal, JointState, NoSolution, ProblemInstance
from .search import BudgetExceeded, astar, segment_cost

DEFAULT_BUDGET = 5_000_000
DEFAULT_AGENT_CAP = 4


class TooManyAgents(ValueError):
    pass


@dataclass
class OracleResult:
    optimal_cost: int
    path: GlobalPath
    expansions: int


def solve_joint(inst: ProblemInstance, limit: int = DEFAULT_BUDGET,
                agent_cap: int | None = DEFAULT_AGENT_CAP, deadline=None) -> OracleResult:
    """Optimal sum-of-costs solution by A* over the full joint space.

    Raises BudgetExceeded past `limit` expansions and NoSolution when the
    reachable joint space is exhausted.
    """
    n = inst.n_agents
    if agent_cap is not None and n > agent_cap:
        raise TooManyAgents(f"{n} agents exceeds the oracle cap of {agent_cap}")
    start = JointState(tuple(inst.starts), 0)
    goal = JointGoal(tuple(inst.goals), (1 << n) - 1)
    seg, tree = astar(inst.graph, inst.goals, start, goal, max_expansions=limit,
                      deadline=deadline)
    if seg is None:
        raise NoSolution("joint space exhausted")
    paths = [[s.pos[i] for s in seg] for i in range(n)]
    return OracleResult(segment_cost(seg), GlobalPath(paths), tree.expansions)


__all__ = ["solve_joint", "OracleResult", "BudgetExceeded", "TooManyAgents",
           "DEFAULT_BUDGET", "DEFAULT_AGENT_CAP"]
