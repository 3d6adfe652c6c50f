"""The anytime windowed repair loop: plan agents independently, repair
collisions chronologically inside windows, then keep growing the windows
until every one of them has proven its agents optimal."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from .domain import (GlobalPath, JointGoal, JointState, NoSolution, ProblemInstance,
                     detect_collisions, path_cost)
from .search import SearchTimeout, astar
from .window import grow, merge, overlaps


@dataclass
class SolutionEvent:
    iteration: int
    cost: int
    bound: float
    elapsed_us: int
    optimal: bool

    def as_dict(self):
        return {"event": "solution", "iteration": self.iteration, "cost": self.cost,
                "bound": self.bound, "elapsed_us": self.elapsed_us,
                "optimal": self.optimal}


@dataclass
class FrameworkState:
    inst: ProblemInstance
    path: GlobalPath
    initial_cost: int
    windows: list = field(default_factory=list)
    iteration: int = 0
    lnaiaw: int = 0
    t0: float = field(default_factory=time.perf_counter)
    best: GlobalPath | None = None  # last path reported as valid
    log: list = field(default_factory=list)

    def elapsed_us(self) -> int:
        return int((time.perf_counter() - self.t0) * 1e6)


@dataclass
class StopCondition:
    timeout_s: float | None = None
    max_iterations: int | None = None
    first_valid: bool = False


@dataclass
class SolveResult:
    status: str  # optimal | first | timeout | iterations | no_solution
    path: GlobalPath | None
    cost: int | None
    optimal: bool
    events: list
    iterations: int
    lnaiaw: int
    initial_cost: int
    time_to_valid: float | None = None
    time_to_optimal: float | None = None
    first_iteration_valid: bool | None = None


def plan_independently(inst: ProblemInstance) -> GlobalPath:
    """Optimal single-agent paths, ignoring the other agents."""
    paths = []
    for i in range(inst.n_agents):
        start = JointState((inst.starts[i],), 0)
        goal = JointGoal((inst.goals[i],), 1)
        seg, _ = astar(inst.graph, (inst.goals[i],), start, goal)
        if seg is None:
            raise NoSolution(f"agent {i} cannot reach its goal")
        paths.append([s.pos[0] for s in seg])
    return GlobalPath(paths)


def merge_colliding_windows(w, state: FrameworkState, hooks):
    """Absorb every window overlapping w, plan in the union and add it to W.

    A plan that had to grow its window may overlap further windows; those are
    absorbed in turn and the union planned again.
    """
    W = state.windows
    while True:
        changed = True
        while changed:
            changed = False
            for o in list(W):
                if overlaps(w, o):
                    W.remove(o)
                    hooks.forget(o)
                    w = merge(w, o)
                    state.log.append(("merge", w))
                    changed = True
        w, state.path = hooks.plan_in(w, state.path)
        state.lnaiaw = max(state.lnaiaw, len(w.agents))
        if not any(overlaps(w, o) for o in W):
            W.append(w)
            return w


def first_collision_window(p: GlobalPath, radius: int, hooks):
    return hooks.first_collision_window(p, radius)


def _grow_phase(state: FrameworkState, hooks):
    W = state.windows
    for w in list(W):
        if not any(x is w for x in W):
            continue  # absorbed by an earlier merge this round
        succ = grow(w, hooks.step)
        if any(o is not w and overlaps(succ, o) for o in W):
            W.remove(w)
            hooks.forget(w)
            state.log.append(("grow-merge", succ))
            merge_colliding_windows(succ, state, hooks)
            continue
        w2, state.path = hooks.grow_and_replan(w, state.path)
        state.lnaiaw = max(state.lnaiaw, len(w2.agents))
        W[[i for i, x in enumerate(W) if x is w][0]] = w2
        state.log.append(("grow", w2))
        if any(o is not w2 and overlaps(w2, o) for o in W):
            # replan had to grow past the plain successor
            W.remove(w2)
            hooks.forget(w2)
            merge_colliding_windows(w2, state, hooks)


def _repair_phase(state: FrameworkState, hooks):
    repeats = {}
    while True:
        cw = hooks.first_collision_window(state.path)
        if cw is None:
            return
        # a collision that survives its own repair (the window could not cover
        # it) gets a progressively larger window
        key = (cw.agents, getattr(cw, "lo", None), getattr(cw, "hi", None),
               getattr(cw, "centers", None))
        k = repeats.get(key, 0)
        repeats[key] = k + 1
        if k:
            if k > 4 * (state.inst.graph.n + 1):
                raise RuntimeError("collision repair is not making progress")
            for _ in range(k):
                cw = grow(cw, hooks.step)
        state.log.append(("create", cw))
        merge_colliding_windows(cw, state, hooks)


def rec_wampf(state: FrameworkState, hooks, sink: Callable | None = None,
              stop: StopCondition | None = None) -> SolveResult:
    """Run the repair/grow loop until optimal or the stop condition fires."""
    stop = stop or StopCondition()
    events = []
    deadline = None if stop.timeout_s is None else state.t0 + stop.timeout_s
    hooks.deadline = deadline
    t_valid = None
    first_ok = None

    def emit(ev):
        events.append(ev)
        if sink is not None:
            sink(ev)

    def finish(status, optimal):
        p = state.path if optimal or status in ("first", "iterations") else state.best
        cost = None if p is None else path_cost(p)
        return SolveResult(status, p, cost, optimal, events, state.iteration,
                           state.lnaiaw, state.initial_cost, t_valid,
                           (time.perf_counter() - state.t0) if optimal else None,
                           first_ok)

    while True:
        state.iteration += 1
        try:
            _grow_phase(state, hooks)
            _repair_phase(state, hooks)
        except SearchTimeout:
            return finish("timeout", False)
        if first_ok is None:
            first_ok = not detect_collisions(state.path)
        state.windows = [w for w in state.windows if not _quit(hooks, state, w)]
        cost = path_cost(state.path)
        state.best = state.path
        if t_valid is None:
            t_valid = time.perf_counter() - state.t0
        if not state.windows:
            emit(SolutionEvent(state.iteration, cost, 1.0, state.elapsed_us(), True))
            return finish("optimal", True)
        bound = cost / state.initial_cost if state.initial_cost else 1.0
        emit(SolutionEvent(state.iteration, cost, bound, state.elapsed_us(), False))
        if stop.first_valid:
            return finish("first", False)
        if stop.max_iterations is not None and state.iteration >= stop.max_iterations:
            return finish("iterations", False)
        if deadline is not None and time.perf_counter() > deadline:
            return finish("timeout", False)


def _quit(hooks, state, w) -> bool:
    if hooks.should_quit(state.path, w):
        hooks.forget(w)
        state.log.append(("quit", w))
        return True
    return False


def solve(inst: ProblemInstance, planner, sink=None, stop: StopCondition | None = None) -> SolveResult:
    """Convenience entry: independent plan, then the anytime loop.

    `planner` is a planner instance (NWAStar / XStar).  A collision-free
    independent plan is returned at once as optimal with a single event.
    """
    t0 = time.perf_counter()
    path = plan_independently(inst)
    c0 = path_cost(path)
    state = FrameworkState(inst, path, c0, t0=t0)
    try:
        return rec_wampf(state, planner, sink, stop)
    except NoSolution:
        return SolveResult("no_solution", None, None, False, [], state.iteration,
                           state.lnaiaw, c0)
