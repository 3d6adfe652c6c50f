"""Window planners: NWA* (fresh in-window A* each time) and X* (reuses the
window's search tree across growth steps), plus path splicing/padding."""
from __future__ import annotations

from dataclasses import dataclass, field

from .domain import (GlobalPath, JointState, NoSolution, ProblemInstance,
                     detect_collisions, joint_neighbors, path_cost)
from .search import (SearchTree, astar, astar_search_until, astar_with_bookkeeping,
                     culled_below, expand_state, segment_cost, shift_tree,
                     unwind_path)
from .window import Goalposts, extract_goalposts, grow, make_window


@dataclass
class RepairInfo:
    goalposts: Goalposts
    impeded: bool
    cost: int  # cost of the chosen in-window segment
    padded: dict  # agent -> padding waits that survived in the path
    tree: SearchTree | None = None
    expansions: int = 0


def splice_and_pad(p: GlobalPath, agents, gp: Goalposts, seg):
    """Replace the window agents' section [start_time, goal_time] with seg.

    Each agent's column of seg is cut at its own arrival at g_k; if it arrives
    earlier than it used to leave g_k, it waits there so that it leaves at the
    original time.  Returns (new path, {agent: padding waits}).
    """
    if seg[0].pos != gp.start.pos:
        raise ValueError("segment does not start at the window start")
    if not gp.goal.matches(seg[-1]):
        raise ValueError("segment does not end at the window goal")
    span = gp.goal_time - gp.start_time
    paths = list(p.paths)
    padded = {}
    for j, a in enumerate(agents):
        col = [st.pos[j] for st in seg]
        arr = len(col) - 1
        while arr > 0 and col[arr - 1] == col[-1]:
            arr -= 1
        pad = max(0, span - arr)
        prefix = [p.at(a, t) for t in range(gp.start_time)]
        suffix = list(p.paths[a][gp.goal_time + 1:])
        paths[a] = prefix + col[:arr + 1] + [col[-1]] * pad + suffix
        padded[a] = pad if suffix else 0
    return GlobalPath(paths), padded


class WindowPlanner:
    """Shared plumbing for the two planners (hooks used by the framework)."""

    name = "base"

    def __init__(self, inst: ProblemInstance, radius: int = 2, step: int = 1):
        self.inst = inst
        self.graph = inst.graph
        self.radius = radius
        self.step = step
        self.info = {}
        self.deadline = None
        self.trace = []  # (kind, window, details) for logs and fixtures
        self.expansions = 0
        self.search_hook = None  # optional per-loop-head callback for searches

    def goals_of(self, w):
        return tuple(self.inst.goals[a] for a in w.agents)

    def first_collision_window(self, p: GlobalPath, radius=None):
        cs = detect_collisions(p, first_only=True)
        if not cs:
            return None
        return make_window(cs[0], self.radius if radius is None else radius, self.graph)

    def forget(self, w):
        self.info.pop(w, None)

    def _goalposts(self, w, p):
        """Goalposts of w on p, or None when there are none or when an endpoint
        itself has two agents on one vertex (no repair can end there; the
        window has to grow past the collision)."""
        gp = extract_goalposts(w, p, self.inst.goals)
        if gp is None:
            return None
        n = len(w.agents)
        if len(set(gp.start.pos)) < n or len(set(gp.goal.pos)) < n:
            return None
        return gp

    def _fresh(self, w, gp, bookkeeping):
        seg, tree = astar(self.graph, self.goals_of(w), gp.start, gp.goal, w,
                          bookkeeping=bookkeeping, hook=self.search_hook,
                          deadline=self.deadline)
        self.expansions += tree.expansions
        return seg, tree

    def plan_in(self, w, p: GlobalPath):
        """Search inside w (growing it while no repair exists); returns (w, path)."""
        while True:
            gp = self._goalposts(w, p)
            if gp is not None:
                seg, tree = self._fresh(w, gp, self.bookkeeping)
                if seg is not None:
                    return self._commit(w, p, gp, seg, tree, "plan")
            if w.saturated():
                raise NoSolution(f"no repair for agents {list(w.agents)}")
            self.trace.append(("autogrow", w, {}))
            w = grow(w, self.step)

    def _commit(self, w, p, gp, seg, tree, kind):
        new, padded = splice_and_pad(p, w.agents, gp, seg)
        cost = segment_cost(seg)
        applied = True
        if kind == "regrow" and path_cost(new) > path_cost(p):
            # padding can turn a window-optimal segment into a globally worse
            # path; a grow step never makes the reported solution worse
            new, padded, applied = p, {a: 0 for a in w.agents}, False
        found = tree.gval(seg[-1]) - tree.gval(seg[0])
        self.info[w] = RepairInfo(gp, culled_below(tree, tree.gval(seg[-1])),
                                  cost, padded, tree if self.bookkeeping else None,
                                  tree.expansions)
        assert found == cost, "unwound segment cost differs from its g-value"
        self.trace.append((kind, w, {"cost": cost, "padded": padded,
                                     "start_time": gp.start_time,
                                     "goal_time": gp.goal_time,
                                     "applied": applied}))
        return w, new

    def should_quit(self, p: GlobalPath, w) -> bool:
        info = self.info.get(w)
        if info is None:
            return False
        gp = info.goalposts
        full = (1 << len(w.agents)) - 1
        if gp.start_time != 0 or gp.goal.rest_ok != full:
            return False
        if gp.goal.pos != self.goals_of(w):
            return False
        return not self.impeded(w)

    def impeded(self, w) -> bool:
        return self.info[w].impeded


class NWAStar(WindowPlanner):
    name = "nwa"
    bookkeeping = False

    def grow_and_replan(self, w, p: GlobalPath):
        self.forget(w)
        w1 = grow(w, self.step)
        gp = self._goalposts(w1, p)
        if gp is not None:
            seg, tree = self._fresh(w1, gp, False)
            if seg is not None:
                return self._commit(w1, p, gp, seg, tree, "regrow")
        return self.plan_in(w1, p)


class XStar(WindowPlanner):
    name = "xstar"
    bookkeeping = True

    def __init__(self, *a, inclusive_until: bool = False, reexpand: bool = False, **kw):
        super().__init__(*a, **kw)
        # inclusive_until: Stage 1/2 also expand states with f exactly fmax
        self.inclusive_until = inclusive_until
        # reexpand: Stage 3 re-expands closed states whose g dropped below cl
        self.reexpand = reexpand
        self.fallbacks = 0
        self.stage_log = []  # per grow step: (window, goalposts, cost)

    def grow_and_replan(self, w, p: GlobalPath):
        info = self.info.pop(w)
        tree = info.tree
        old = info.goalposts
        w1 = grow(w, self.step)
        gp = self._goalposts(w1, p)
        # the tree is only reusable if its start is still on the path where
        # we left it and the new start precedes it inside the grown window
        usable = (gp is not None and tree is not None
                  and p.joint_at(w.agents, old.start_time).pos == tree.start.pos
                  and gp.start_time <= old.start_time)
        if usable:
            pi = [p.joint_at(w.agents, t) for t in range(gp.start_time, old.start_time + 1)]
            usable = all(w1.contains(s) for s in pi) and _is_walk(self.graph, pi, tree.goals)
        if not usable:
            self.fallbacks += 1
            self.trace.append(("fallback", w1, {}))
            return self.plan_in(w1, p)

        before = tree.expansions
        tree.deadline = self.deadline
        tree.hook = self.search_hook
        seg = self._reuse(tree, w1, pi, gp)
        self.expansions += tree.expansions - before
        if seg is None:
            # nothing inside w1 reaches the goal; keep growing from scratch
            return self.plan_in(grow(w1, self.step), p)
        self.stage_log.append((w1, gp, segment_cost(seg)))
        return self._commit(w1, p, gp, seg, tree, "regrow")

    def _reuse(self, tree: SearchTree, w1, pi, gp: Goalposts):
        # Stage 1: culled states now inside join the frontier, then catch up
        tree.window = w1
        for s in list(tree.otw):
            if w1.contains(s):
                del tree.otw[s]
                if s not in tree.closed or tree.g[s] < tree.cl[s]:
                    tree.push(s)
        gk = tree.goal_state
        astar_search_until(tree, w1, tree.gval(gk), self.inclusive_until)
        fk = tree.gval(gk)

        # Stage 2: move the root back along the path to the new start
        c = segment_cost(pi)
        shift_tree(tree, c)
        s1 = pi[0]
        tree.set_g(s1, 0)
        tree.start = s1
        for s in pi:
            expand_state(tree, s, w1)
        astar_search_until(tree, w1, fk + c, self.inclusive_until)

        # Stage 3: retarget the heuristic at the new goal
        tree.rebuild(gp.goal)
        done = [s for s in _goal_variants(gp.goal) if s in tree.closed]
        if done:
            best = min(done, key=lambda s: (tree.gval(s), s))
            seg = unwind_path(tree, best, s1)
        else:
            seg = astar_with_bookkeeping(tree, w1, s1, gp.goal, self.reexpand)
        if seg is not None:
            tree.goal_state = seg[-1]
        return seg

    def _commit(self, w, p, gp, seg, tree, kind):
        out = super()._commit(w, p, gp, seg, tree, kind)
        tree.goal_state = seg[-1]
        return out


def _is_walk(graph, seq, goals) -> bool:
    for a, b in zip(seq, seq[1:]):
        if all(n != b for n, _ in joint_neighbors(graph, a, goals)):
            return False
    return True


def _goal_variants(goal):
    """All joint states that satisfy a goal test (rest flags within rest_ok)."""
    bits = [1 << i for i in range(len(goal.pos)) if goal.rest_ok >> i & 1]
    out = []
    for m in range(1 << len(bits)):
        mask = 0
        for k, b in enumerate(bits):
            if m >> k & 1:
                mask |= b
        out.append(JointState(goal.pos, mask))
    return out


PLANNERS = {"xstar": XStar, "nwa": NWAStar}
