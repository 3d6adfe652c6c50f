"""Agents, maps, joint states, the neighbor/cost model and collision semantics.

Vertices are plain ints.  On a grid, cell (x, y) is vertex y * width + x.

Cost model: every agent pays 1 per timestep (move or wait) until it decides to
rest at its goal; resting is a 0-cost action available only at the agent's own
goal and, once taken, the agent stays put for free.  The resting flags live in
the joint state so that edge costs never depend on anything but the global
goals, which keeps g-values meaningful when a search tree changes goal.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence


class NoSolution(Exception):
    """Raised when some agent (or agent group) provably cannot reach its goal."""


class JointState(NamedTuple):
    pos: tuple  # vertex per member agent, agents in ascending id order
    rest: int = 0  # bit i set -> agent i is resting at its goal for good


class JointGoal(NamedTuple):
    """Goal test for a joint search: exact positions, and only the agents in
    `rest_ok` may be in the resting mode when the goal is reached."""
    pos: tuple
    rest_ok: int = 0

    def matches(self, s: JointState) -> bool:
        return s.pos == self.pos and (s.rest & ~self.rest_ok) == 0


class Collision(NamedTuple):
    timestep: int
    agents: tuple  # (i, j) with i < j
    kind: str  # "vertex" or "edge"
    location: tuple  # (v,) for vertex, (u, v) for edge: agent i moves u -> v

    def sort_key(self):
        return (self.timestep, self.agents, 0 if self.kind == "vertex" else 1)


class Graph:
    """Undirected graph with unit edges; every vertex also has a wait self-loop."""

    def __init__(self, n: int, edges=(), blocked=None):
        self.n = n
        self.blocked = [False] * n if blocked is None else list(blocked)
        nbrs = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            if self.blocked[u] or self.blocked[v]:
                continue
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.adj = tuple(tuple(sorted(s)) for s in nbrs)
        self._dist_cache = {}

    def passable(self, v: int) -> bool:
        return 0 <= v < self.n and not self.blocked[v]

    def bfs(self, src: int) -> list:
        d = self._dist_cache.get(src)
        if d is None:
            d = [-1] * self.n
            d[src] = 0
            q = deque([src])
            while q:
                u = q.popleft()
                for w in self.adj[u]:
                    if d[w] < 0:
                        d[w] = d[u] + 1
                        q.append(w)
            self._dist_cache[src] = d
        return d

    def dist(self, u: int, v: int) -> int:
        """Hop distance (exact on general graphs); used as the per-agent heuristic."""
        d = self.bfs(v)[u]
        return d if d >= 0 else 10**9

    def label(self, v: int) -> str:
        return str(v)


class GridMap(Graph):
    """4-connected grid.  Heuristic is Manhattan distance."""

    def __init__(self, width: int, height: int, blocked=None):
        if width <= 0 or height <= 0:
            raise ValueError("grid dimensions must be positive")
        self.width = width
        self.height = height
        n = width * height
        blocked = [False] * n if blocked is None else list(blocked)
        if len(blocked) != n:
            raise ValueError("blocked mask has wrong size")
        if all(blocked):
            raise ValueError("grid has no passable cell")
        edges = []
        for y in range(height):
            for x in range(width):
                v = y * width + x
                if x + 1 < width:
                    edges.append((v, v + 1))
                if y + 1 < height:
                    edges.append((v, v + width))
        super().__init__(n, edges, blocked)

    @classmethod
    def from_rows(cls, rows: Sequence[str]):
        """Rows top to bottom as printed; row index == y.  '.' free, anything else blocked."""
        h = len(rows)
        w = len(rows[0])
        blocked = []
        for r in rows:
            if len(r) != w:
                raise ValueError("ragged rows")
            blocked.extend(ch != "." for ch in r)
        return cls(w, h, blocked)

    def vertex(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValueError(f"cell ({x},{y}) out of bounds")
        return y * self.width + x

    def cell(self, v: int) -> tuple:
        return (v % self.width, v // self.width)

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def dist(self, u: int, v: int) -> int:
        w = self.width
        return abs(u % w - v % w) + abs(u // w - v // w)

    def label(self, v: int) -> str:
        x, y = self.cell(v)
        return f"({x},{y})"

    def num_passable(self) -> int:
        return sum(1 for b in self.blocked if not b)


@dataclass
class ProblemInstance:
    graph: Graph
    starts: tuple
    goals: tuple
    name: str = ""

    def __post_init__(self):
        self.starts = tuple(self.starts)
        self.goals = tuple(self.goals)
        if len(self.starts) != len(self.goals):
            raise ValueError("starts and goals differ in length")
        for v in self.starts + self.goals:
            if not self.graph.passable(v):
                raise ValueError(f"endpoint {self.graph.label(v)} is not passable")
        if len(set(self.starts)) != len(self.starts):
            raise ValueError("starts are not pairwise distinct")
        if len(set(self.goals)) != len(self.goals):
            raise ValueError("goals are not pairwise distinct")

    @property
    def n_agents(self) -> int:
        return len(self.starts)

    @classmethod
    def on_grid(cls, grid: GridMap, starts, goals, name=""):
        """Build from (x, y) cells."""
        return cls(grid, [grid.vertex(*c) for c in starts],
                   [grid.vertex(*c) for c in goals], name)


def joint_neighbors(graph: Graph, s: JointState, goals: Sequence[int]):
    """All collision-free successors of s with their transition cost.

    `goals` are the global goals of s's agents (same order).  No window
    filtering is done here.
    """
    pos = s.pos
    rest = s.rest
    adj = graph.adj
    # partial assignments: (positions so far, rest mask, cost)
    partial = [((), 0, 0)]
    where = {p: j for j, p in enumerate(pos)}
    for i, p in enumerate(pos):
        bit = 1 << i
        if rest & bit:
            opts = ((p, bit, 0),)
        else:
            opts = [(q, 0, 1) for q in adj[p]]
            opts.append((p, 0, 1))
            if p == goals[i]:
                opts.append((p, bit, 0))
        if i == 0:
            partial = [((q,), b, c) for q, b, c in opts]
            continue
        nxt = []
        for q, b, c in opts:
            j = where.get(q)
            swap = j is not None and j < i and q != p
            for ps, m, cc in partial:
                if q in ps:
                    continue
                if swap and ps[j] == p:
                    continue
                nxt.append((ps + (q,), m | b, cc + c))
        partial = nxt
    new = tuple.__new__
    return [(new(JointState, (ps, m)), c) for ps, m, c in partial]


def joint_predecessors(graph: Graph, s: JointState, goals: Sequence[int]):
    """States p with s among joint_neighbors(p), with cost c(p, s).  Excludes s itself."""
    pos = s.pos
    n = len(pos)
    opts = []
    for i in range(n):
        p = pos[i]
        bit = 1 << i
        if s.rest & bit:
            # already resting (free) or just started resting (free)
            opts.append(((p, bit, 0), (p, 0, 0)))
        else:
            o = [(q, 0, 1) for q in graph.adj[p]]
            o.append((p, 0, 1))
            opts.append(o)
    out = []
    chosen = [0] * n

    def rec(i, mask, cost):
        if i == n:
            prev = JointState(tuple(chosen), mask)
            if prev != s:
                out.append((prev, cost))
            return
        pi = pos[i]
        for q, b, c in opts[i]:
            ok = True
            for j in range(i):
                qj = chosen[j]
                if qj == q or (qj == pi and q == pos[j]):
                    ok = False
                    break
            if ok:
                chosen[i] = q
                rec(i + 1, mask | b, cost + c)

    rec(0, 0, 0)
    return out


def transition_cost(s: JointState, t: JointState) -> int:
    """Cost of the move s -> t (assumes it is a legal transition)."""
    c = 0
    for i in range(len(s.pos)):
        if not (t.rest >> i) & 1:
            c += 1
    return c


def heuristic(graph: Graph, s, g) -> int:
    """Sum of per-agent distances from s's positions to g's positions."""
    sp = s.pos if hasattr(s, "pos") else s
    gp = g.pos if hasattr(g, "pos") else g
    if len(sp) != len(gp):
        raise ValueError("heuristic: agent sets differ")
    return sum(graph.dist(a, b) for a, b in zip(sp, gp))


class GlobalPath:
    """Per-agent vertex sequences indexed by timestep.  An agent whose sequence
    has ended rests at its last vertex forever.  Trailing duplicates are
    stripped so len-1 is the final arrival time."""

    __slots__ = ("paths",)

    def __init__(self, paths):
        self.paths = tuple(_strip(tuple(p)) for p in paths)

    def __len__(self):
        return len(self.paths)

    def __eq__(self, other):
        return isinstance(other, GlobalPath) and self.paths == other.paths

    def __hash__(self):
        return hash(self.paths)

    def __repr__(self):
        return f"GlobalPath({[list(p) for p in self.paths]})"

    def at(self, agent: int, t: int) -> int:
        p = self.paths[agent]
        return p[t] if t < len(p) else p[-1]

    def joint_at(self, agents, t: int) -> JointState:
        return JointState(tuple(self.at(a, t) for a in agents), 0)

    def horizon(self, agents=None) -> int:
        """Last timestep at which any of `agents` still changes position."""
        idx = range(len(self.paths)) if agents is None else agents
        return max((len(self.paths[a]) - 1 for a in idx), default=0)

    def with_agent(self, agent: int, seq) -> "GlobalPath":
        ps = list(self.paths)
        ps[agent] = seq
        return GlobalPath(ps)

    def to_cells(self, grid: GridMap):
        return [[grid.cell(v) for v in p] for p in self.paths]


def _strip(p: tuple) -> tuple:
    k = len(p)
    while k > 1 and p[k - 1] == p[k - 2]:
        k -= 1
    return p[:k]


def path_cost(p: GlobalPath, goals=None) -> int:
    """Sum over agents of their final arrival time (trailing goal waits are free).

    If `goals` is given, an agent whose path does not end at its goal is an error.
    """
    total = 0
    for i, seq in enumerate(p.paths):
        if goals is not None and seq[-1] != goals[i]:
            raise ValueError(f"agent {i} does not end at its goal")
        total += len(seq) - 1
    return total


def detect_collisions(p: GlobalPath, first_only: bool = False):
    """All vertex and swap collisions, sorted by (timestep, agent pair, kind)."""
    paths = p.paths
    n = len(paths)
    T = p.horizon()
    found = []
    for t in range(T + 1):
        seen = {}
        here = []
        for i in range(n):
            v = paths[i][t] if t < len(paths[i]) else paths[i][-1]
            here.append(v)
            j = seen.get(v)
            if j is None:
                seen[v] = [i]
            else:
                j.append(i)
        for v, group in seen.items():
            if len(group) > 1:
                for a in range(len(group)):
                    for b in range(a + 1, len(group)):
                        found.append(Collision(t, (group[a], group[b]), "vertex", (v,)))
        if t < T:
            moves = {}
            for i in range(n):
                u = here[i]
                w = paths[i][t + 1] if t + 1 < len(paths[i]) else paths[i][-1]
                if u != w:
                    moves[(u, w)] = i
            for (u, w), i in moves.items():
                j = moves.get((w, u))
                if j is not None and i < j:
                    found.append(Collision(t, (i, j), "edge", (u, w)))
        if first_only and found:
            break
    found.sort(key=Collision.sort_key)
    if first_only:
        return found[:1]
    return found


def is_valid_move(graph: Graph, u: int, v: int) -> bool:
    return u == v or v in graph.adj[u]


def check_path(p: GlobalPath, inst: ProblemInstance) -> list:
    """Independent validity report: endpoints, legal moves, collisions."""
    problems = []
    for i, seq in enumerate(p.paths):
        if seq[0] != inst.starts[i]:
            problems.append(f"agent {i} does not start at its start")
        if seq[-1] != inst.goals[i]:
            problems.append(f"agent {i} does not end at its goal")
        for t in range(len(seq) - 1):
            if not is_valid_move(inst.graph, seq[t], seq[t + 1]):
                problems.append(f"agent {i} illegal move at t={t}")
    for c in detect_collisions(p):
        problems.append(f"{c.kind} collision {c.agents} at t={c.timestep}")
    return problems
