"""Window-restricted A* over joint states, with the bookkeeping needed to reuse
a finished search tree after the window grows (out-of-window set, closed
values, uniform g shift) and a checker for the valid-search-tree properties."""
from __future__ import annotations

import heapq
import time
from typing import Callable

from .domain import (Graph, JointGoal, JointState, heuristic, joint_neighbors,
                     joint_predecessors)

INF = float("inf")


class SearchTimeout(Exception):
    pass


class BudgetExceeded(Exception):
    pass


class InvariantViolation(AssertionError):
    pass


class _Everywhere:
    """Window that contains every state (unrestricted search)."""

    def contains(self, s):
        return True


EVERYWHERE = _Everywhere()


class SearchTree:
    """Open/closed sets, g and closed-value tables and the out-of-window set.

    g and cl are stored raw; the real value is raw + offset, so a uniform
    shift of the whole tree is O(1).
    """

    def __init__(self, graph: Graph, goals, start: JointState, goal: JointGoal,
                 window=EVERYWHERE, bookkeeping: bool = True):
        self.graph = graph
        self.goals = tuple(goals)  # global goals of the member agents
        self.window = window
        self.bookkeeping = bookkeeping
        self.start = start
        self.goal = goal
        self.offset = 0
        self.g = {}
        self.cl = {}
        self.open = {}  # state -> raw g at the time of its live heap entry
        self.heap = []
        self.closed = set()
        self.otw = {}  # state -> generation of the window that culled it
        self.impeded = False
        self.culled_fmin = None  # smallest raw f of a culled neighbor (no bookkeeping)
        self.expansions = 0
        self.max_expansions = None
        self.deadline = None
        self.hook: Callable | None = None  # called with the tree at every loop head
        self._tables = _dist_tables(graph, goal)
        self.set_g(start, 0)
        self.push(start)

    # --- value access -------------------------------------------------
    def gval(self, s) -> float:
        r = self.g.get(s)
        return INF if r is None else r + self.offset

    def clval(self, s) -> float:
        r = self.cl.get(s)
        return INF if r is None else r + self.offset

    def set_g(self, s, value):
        self.g[s] = value - self.offset

    def h(self, s) -> int:
        return _h_tab(self._tables, self.goal.rest_ok, s)

    def f(self, s) -> float:
        return self.gval(s) + self.h(s)

    # --- open set -----------------------------------------------------
    def push(self, s):
        gr = self.g[s]
        if self.open.get(s) == gr:
            return
        self.open[s] = gr
        heapq.heappush(self.heap, (gr + self.h(s), -gr, s))

    def peek(self):
        heap = self.heap
        op = self.open
        while heap:
            _, ng, s = heap[0]
            if op.get(s) == -ng:
                return s
            heapq.heappop(heap)
        return None

    def pop(self):
        s = self.peek()
        if s is not None:
            heapq.heappop(self.heap)
            del self.open[s]
        return s

    def rebuild(self, goal: JointGoal):
        """Switch the heuristic target and reorder the open set."""
        if goal == self.goal:
            return
        self.goal = goal
        self._tables = tabs = _dist_tables(self.graph, goal)
        ok = goal.rest_ok
        self.heap = [(gr + _h_tab(tabs, ok, s), -gr, s) for s, gr in self.open.items()]
        heapq.heapify(self.heap)

    def is_live_open(self, s) -> bool:
        """In O and not a duplicate that the re-expansion rule would skip."""
        if s not in self.open:
            return False
        if s in self.closed and self.cl[s] <= self.g[s]:
            return False
        return True

    def _tick(self):
        self.expansions += 1
        if self.max_expansions is not None and self.expansions > self.max_expansions:
            raise BudgetExceeded(self.expansions)
        if self.deadline is not None and (self.expansions & 255) == 0:
            if time.perf_counter() > self.deadline:
                raise SearchTimeout()


DEAD = 10**9  # heuristic of states that can never satisfy the goal test


def search_heuristic(graph: Graph, s: JointState, goal: JointGoal) -> int:
    """Consistent heuristic used by the searches.

    Agents allowed to finish inside the segment contribute their distance.
    The others keep paying until the whole segment ends, so each of them
    contributes the largest remaining distance of any still-moving agent.
    A state where such an agent already rests can never reach the goal.
    """
    if s.rest & ~goal.rest_ok:
        return DEAD
    total = 0
    far = 0
    k = 0
    dist = graph.dist
    for i, (p, q) in enumerate(zip(s.pos, goal.pos)):
        d = dist(p, q)
        if (s.rest >> i) & 1:
            continue
        if d > far:
            far = d
        if (goal.rest_ok >> i) & 1:
            total += d
        else:
            k += 1
    return total + k * far


def _dist_tables(graph: Graph, goal: JointGoal):
    cache = graph.__dict__.setdefault("_htab_cache", {})
    out = []
    for q in goal.pos:
        t = cache.get(q)
        if t is None:
            if len(cache) > 4096:
                cache.clear()
            d = graph.dist
            t = cache[q] = [d(v, q) for v in range(graph.n)]
        out.append(t)
    return out


def _h_tab(tabs, rest_ok, s) -> int:
    """search_heuristic with precomputed per-agent distance tables."""
    rest = s.rest
    if rest & ~rest_ok:
        return DEAD
    total = 0
    far = 0
    k = 0
    for i, p in enumerate(s.pos):
        if (rest >> i) & 1:
            continue
        d = tabs[i][p]
        if d > far:
            far = d
        if (rest_ok >> i) & 1:
            total += d
        else:
            k += 1
    return total + k * far


def expand_state(tree: SearchTree, s: JointState, window=None):
    """Close s and relax every neighbor; cull (and record) out-of-window ones."""
    if window is None:
        window = tree.window
    tree._tick()
    g = tree.g
    gs = g[s]
    closed = tree.closed
    closed.add(s)
    cl = tree.cl
    cl[s] = gs
    book = tree.bookkeeping
    cells = getattr(window, "cells", None)
    inside = (lambda n: cells.issuperset(n.pos)) if cells is not None else window.contains
    gen = getattr(window, "generation", 0)
    open_ = tree.open
    heap = tree.heap
    tabs = tree._tables
    ok = tree.goal.rest_ok
    push = heapq.heappush
    for n, c in joint_neighbors(tree.graph, s, tree.goals):
        new = gs + c
        if inside(n):
            old = g.get(n)
            if old is None or new < old:
                g[n] = old = new
            if n in closed and old >= cl[n]:
                continue
            if open_.get(n) != old:
                open_[n] = old
                push(heap, (old + _h_tab(tabs, ok, n), -old, n))
        else:
            tree.impeded = True
            if book:
                old = g.get(n)
                if old is None or new < old:
                    g[n] = new
                tree.otw[n] = gen
            else:
                fn = new + _h_tab(tabs, ok, n)
                if tree.culled_fmin is None or fn < tree.culled_fmin:
                    tree.culled_fmin = fn


def astar_search_until(tree: SearchTree, window, fmax, inclusive: bool = True):
    """Expand in f order while f(top) <= fmax (f(top) < fmax when not
    inclusive); closed states are re-expanded only when their g dropped below
    their closed value."""
    if window is not None:
        tree.window = window
    fraw = fmax - tree.offset
    if not inclusive:
        fraw -= 1  # costs are integers
    while True:
        if tree.hook is not None:
            tree.hook(tree)
        s = tree.peek()
        if s is None:
            return
        gr = tree.g[s]
        if gr + tree.h(s) > fraw:
            return
        tree.pop()
        if s in tree.closed and tree.cl[s] <= gr:
            continue
        expand_state(tree, s)


def astar_with_bookkeeping(tree: SearchTree, window=None, start=None, goal=None,
                           reexpand: bool = False):
    """Plain A* loop over an existing tree.  Returns the segment or None.

    With reexpand=True the closed check uses the closed-value rule of
    astar_search_until instead of bare membership.
    """
    if window is not None:
        tree.window = window
    start = tree.start if start is None else start
    goal = tree.goal if goal is None else goal
    closed = tree.closed
    while True:
        if tree.hook is not None:
            tree.hook(tree)
        s = tree.peek()
        if s is None:
            return None
        if goal.matches(s):
            return unwind_path(tree, s, start)
        tree.pop()
        if s in closed:
            if not reexpand or tree.cl[s] <= tree.g[s]:
                continue
        expand_state(tree, s)


def astar(graph: Graph, goals, start: JointState, goal: JointGoal, window=EVERYWHERE,
          bookkeeping: bool = False, hook=None, deadline=None, max_expansions=None):
    """Fresh window-restricted A*.  Returns (segment or None, tree)."""
    tree = SearchTree(graph, goals, start, goal, window, bookkeeping)
    tree.hook = hook
    tree.deadline = deadline
    tree.max_expansions = max_expansions
    seg = astar_with_bookkeeping(tree)
    return seg, tree


def unwind_path(tree: SearchTree, goal_state: JointState, start: JointState):
    """Walk back from the goal through closed states, each time taking the
    predecessor with the lowest g whose g plus edge cost equals the current g."""
    path = [goal_state]
    cur = goal_state
    gr = tree.g
    guard = 0
    while cur != start:
        gc = gr[cur]
        best = None
        for p, c in joint_predecessors(tree.graph, cur, tree.goals):
            if p != start and p not in tree.closed:
                continue
            gp = gr.get(p)
            if gp is None or gp + c != gc:
                continue
            key = (gp, p)
            if best is None or key < best:
                best = key
        if best is None:
            raise InvariantViolation(f"broken parent chain at {cur}")
        cur = best[1]
        path.append(cur)
        guard += 1
        if guard > 10 * (len(gr) + 1):
            raise InvariantViolation("cycle while unwinding")
    path.reverse()
    return path


def culled_below(tree: SearchTree, cost) -> bool:
    """True if some culled neighbor has f < cost, i.e. a path leaving the
    window might have been cheaper than the solution found.  A search with
    no such state returned the unrestricted optimum."""
    if tree.bookkeeping:
        tabs = tree._tables
        ok = tree.goal.rest_ok
        lim = cost - tree.offset
        g = tree.g
        return any(g[s] + _h_tab(tabs, ok, s) < lim for s in tree.otw)
    return tree.culled_fmin is not None and tree.culled_fmin + tree.offset < cost


def shift_tree(tree: SearchTree, delta):
    """Add delta to every stored g and closed value (O order is unaffected)."""
    if delta < 0:
        raise ValueError("shift must be non-negative")
    tree.offset += delta


def shift_tree_eager(tree: SearchTree, delta):
    """Reference implementation of shift_tree that rewrites every entry."""
    if delta < 0:
        raise ValueError("shift must be non-negative")
    for s in tree.g:
        tree.g[s] += delta
    for s in tree.cl:
        tree.cl[s] += delta
    tree.open = {s: gr + delta for s, gr in tree.open.items()}
    tree.heap = [(f + delta, ng - delta, s) for f, ng, s in tree.heap]


def segment_cost(seg) -> int:
    from .domain import transition_cost
    return sum(transition_cost(a, b) for a, b in zip(seg, seg[1:]))


def check_vstp(tree: SearchTree, start=None, goal=None) -> list:
    """Evaluate the five valid-search-tree properties; returns violation strings."""
    start = tree.start if start is None else start
    if goal is not None and goal != tree.goal:
        hfun = lambda s: search_heuristic(tree.graph, s, goal)  # noqa: E731
    else:
        hfun = tree.h
    out = []
    closed = tree.closed
    live_open = [s for s in tree.open if tree.is_live_open(s)]
    in_tree = set(tree.open) | closed

    # 1
    if start not in in_tree:
        out.append("P1: start not in O or C")

    # 2
    for s in in_tree:
        if s == start:
            continue
        gs = tree.gval(s)
        best = INF
        for p, c in joint_predecessors(tree.graph, s, tree.goals):
            if p in closed:
                v = tree.gval(p) + c
                if v < best:
                    best = v
        if best != gs:
            out.append(f"P2: {s} g={gs} best closed parent gives {best}")

    # 3
    for s in closed:
        for n, _ in joint_neighbors(tree.graph, s, tree.goals):
            if n in in_tree:
                continue
            if not tree.window.contains(n) and (not tree.bookkeeping or n in tree.otw):
                continue
            out.append(f"P3: neighbor {n} of closed {s} missing")

    # 4
    reach = set()
    if start in closed:
        reach.add(start)
        stack = [start]
        while stack:
            u = stack.pop()
            for n, _ in joint_neighbors(tree.graph, u, tree.goals):
                if n in closed and n not in reach:
                    reach.add(n)
                    stack.append(n)
    for s in in_tree:
        if s == start or s in reach:
            continue
        if s in closed:
            out.append(f"P4: closed {s} unreachable from start")
            continue
        if not any(p in reach for p, _ in joint_predecessors(tree.graph, s, tree.goals)):
            out.append(f"P4: open {s} has no reachable closed parent")

    # 5
    if closed and live_open:
        fc = max(tree.gval(s) + hfun(s) for s in closed)
        fo = min(tree.gval(s) + hfun(s) for s in live_open)
        if fc > fo:
            out.append(f"P5: max f(closed)={fc} > min f(open)={fo}")
    return out


def dump_tree(tree: SearchTree, label=str) -> str:
    """Text dump: one line per known state with g, cl and set membership."""
    lines = []
    states = set(tree.g) | tree.closed | set(tree.open) | set(tree.otw)
    for s in sorted(states):
        pos = " ".join(label(v) for v in s.pos)
        flags = ("O" if s in tree.open else "-") + ("C" if s in tree.closed else "-") \
            + ("X" if s in tree.otw else "-")
        cl = tree.clval(s)
        lines.append(f"{pos} r={s.rest:b} g={tree.gval(s)} "
                     f"cl={'inf' if cl == INF else cl} {flags}")
    return "\n".join(lines) + "\n"
