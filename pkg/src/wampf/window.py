"""Window algebra: rectangles on grids, k-hop balls on general graphs."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .domain import Collision, GlobalPath, Graph, GridMap, JointGoal, JointState


@dataclass(frozen=True)
class RectWindow:
    agents: tuple
    lo: tuple  # (x, y) inclusive
    hi: tuple  # (x, y) inclusive
    width: int
    height: int
    generation: int = 0
    cells: frozenset = field(default=frozenset(), compare=False, repr=False, hash=False)

    def __post_init__(self):
        (x0, y0), (x1, y1) = self.lo, self.hi
        if x0 > x1 or y0 > y1:
            raise ValueError("empty rectangle")
        w = self.width
        object.__setattr__(self, "cells", frozenset(
            y * w + x for y in range(y0, y1 + 1) for x in range(x0, x1 + 1)))

    def contains(self, s) -> bool:
        cells = self.cells
        for v in (s.pos if hasattr(s, "pos") else s):
            if v not in cells:
                return False
        return True

    def contains_vertex(self, v: int) -> bool:
        return v in self.cells

    def saturated(self) -> bool:
        return self.lo == (0, 0) and self.hi == (self.width - 1, self.height - 1)

    def grown(self, step: int) -> "RectWindow":
        lo = (max(0, self.lo[0] - step), max(0, self.lo[1] - step))
        hi = (min(self.width - 1, self.hi[0] + step), min(self.height - 1, self.hi[1] + step))
        return RectWindow(self.agents, lo, hi, self.width, self.height, self.generation + 1)

    def region_overlaps(self, other: "RectWindow") -> bool:
        return (self.lo[0] <= other.hi[0] and other.lo[0] <= self.hi[0]
                and self.lo[1] <= other.hi[1] and other.lo[1] <= self.hi[1])

    def merged(self, other: "RectWindow") -> "RectWindow":
        agents = tuple(sorted(set(self.agents) | set(other.agents)))
        lo = (min(self.lo[0], other.lo[0]), min(self.lo[1], other.lo[1]))
        hi = (max(self.hi[0], other.hi[0]), max(self.hi[1], other.hi[1]))
        return RectWindow(agents, lo, hi, self.width, self.height,
                          max(self.generation, other.generation))

    def describe(self) -> str:
        return (f"rect agents={list(self.agents)} lo={self.lo} hi={self.hi} "
                f"gen={self.generation}")


@dataclass(frozen=True)
class HopWindow:
    agents: tuple
    centers: frozenset
    radius: int
    graph: Graph = field(compare=False, repr=False, hash=False)
    generation: int = 0
    cells: frozenset = field(default=frozenset(), compare=False, repr=False, hash=False)

    def __post_init__(self):
        g = self.graph
        dist = {c: 0 for c in self.centers}
        q = deque(self.centers)
        while q:
            u = q.popleft()
            if dist[u] == self.radius:
                continue
            for w in g.adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        object.__setattr__(self, "cells", frozenset(dist))

    def contains(self, s) -> bool:
        cells = self.cells
        for v in (s.pos if hasattr(s, "pos") else s):
            if v not in cells:
                return False
        return True

    def contains_vertex(self, v: int) -> bool:
        return v in self.cells

    def saturated(self) -> bool:
        # the ball stops growing once it covers every component it touches
        return self.grown(1).cells == self.cells

    def grown(self, step: int) -> "HopWindow":
        return HopWindow(self.agents, self.centers, self.radius + step, self.graph,
                         self.generation + 1)

    def region_overlaps(self, other: "HopWindow") -> bool:
        return not self.cells.isdisjoint(other.cells)

    def merged(self, other: "HopWindow") -> "HopWindow":
        agents = tuple(sorted(set(self.agents) | set(other.agents)))
        # a single radius over the union of centers covers both balls
        return HopWindow(agents, self.centers | other.centers,
                         max(self.radius, other.radius), self.graph,
                         max(self.generation, other.generation))

    def describe(self) -> str:
        cs = ",".join(self.graph.label(c) for c in sorted(self.centers))
        return (f"hop agents={list(self.agents)} centers=[{cs}] k={self.radius} "
                f"gen={self.generation}")


class Goalposts(NamedTuple):
    start: JointState
    goal: JointGoal
    start_time: int
    goal_time: int


def make_window(c: Collision, radius: int, graph: Graph):
    if radius < 1:
        raise ValueError("radius must be >= 1")
    verts = c.location
    if isinstance(graph, GridMap):
        xs = [graph.cell(v)[0] for v in verts]
        ys = [graph.cell(v)[1] for v in verts]
        lo = (max(0, min(xs) - radius), max(0, min(ys) - radius))
        hi = (min(graph.width - 1, max(xs) + radius), min(graph.height - 1, max(ys) + radius))
        return RectWindow(tuple(sorted(c.agents)), lo, hi, graph.width, graph.height, 0)
    return HopWindow(tuple(sorted(c.agents)), frozenset(verts), radius, graph, 0)


def grow(w, step: int = 1):
    if step < 1:
        raise ValueError("step must be >= 1")
    return w.grown(step)


def overlaps(w, v) -> bool:
    if set(w.agents).isdisjoint(v.agents):
        return False
    return w.region_overlaps(v)


def merge(w, v):
    return w.merged(v)


def contains(w, s) -> bool:
    return w.contains(s)


def extract_goalposts(w, p: GlobalPath, goals) -> Goalposts | None:
    """First and last timestep at which every window agent is inside w.

    `goals` are the global goals (indexed by agent id); an agent may rest at
    the goalpost only if it is its global goal and its old path stays there.
    Returns None when the filtered path never lies fully inside w.
    """
    agents = w.agents
    T = p.horizon(agents)
    first = None
    for t in range(T + 1):
        if all(w.contains_vertex(p.at(a, t)) for a in agents):
            first = t
            break
    if first is None:
        return None
    last = first
    for t in range(T, first - 1, -1):
        if all(w.contains_vertex(p.at(a, t)) for a in agents):
            last = t
            break
    start = p.joint_at(agents, first)
    gpos = p.joint_at(agents, last).pos
    rest_ok = 0
    for i, a in enumerate(agents):
        if gpos[i] == goals[a] and len(p.paths[a]) - 1 <= last:
            rest_ok |= 1 << i
    return Goalposts(start, JointGoal(gpos, rest_ok), first, last)


def render_window(w, graph: GridMap | None = None) -> str:
    """Small text rendering used in logs: header line plus an ASCII box for grids."""
    lines = [w.describe()]
    if isinstance(w, RectWindow) and graph is not None:
        for y in range(graph.height):
            row = []
            for x in range(graph.width):
                v = y * graph.width + x
                if graph.blocked[v]:
                    row.append("@")
                elif v in w.cells:
                    row.append("#")
                else:
                    row.append(".")
            lines.append("".join(row))
    return "\n".join(lines) + "\n"
