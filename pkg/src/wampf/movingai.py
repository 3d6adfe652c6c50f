"""movingai .map/.scen reading and writing, plus seeded random scenarios."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .domain import GridMap, NoSolution, ProblemInstance
from .framework import plan_independently

PASSABLE = set(".G")
BLOCKED = set("@OTW")


class ParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class GenerationError(RuntimeError):
    pass


@dataclass
class ParsedMap:
    grid: GridMap
    rows: list  # raw character rows (kept so rendering round-trips)


@dataclass
class ScenEntry:
    bucket: int
    map_name: str
    width: int
    height: int
    start: tuple
    goal: tuple
    reference_length: float


def _text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        return data.decode("ascii")
    return data


def parse_map_text(data) -> ParsedMap:
    lines = _text(data).split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]

    def header(idx, key):
        if idx >= len(lines):
            raise ParseError(idx + 1, f"missing '{key}' header")
        parts = lines[idx].split()
        if not parts or parts[0] != key:
            raise ParseError(idx + 1, f"expected '{key}'")
        return parts

    parts = header(0, "type")
    if len(parts) != 2 or parts[1] != "octile":
        raise ParseError(1, "expected 'type octile'")
    dims = {}
    for idx, key in ((1, "height"), (2, "width")):
        parts = header(idx, key)
        if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) <= 0:
            raise ParseError(idx + 1, f"bad {key} value")
        dims[key] = int(parts[1])
    parts = header(3, "map")
    if len(parts) != 1:
        raise ParseError(4, "expected 'map'")
    h, w = dims["height"], dims["width"]
    rows = lines[4:]
    if len(rows) != h:
        raise ParseError(min(len(lines), 4 + h) + (1 if len(rows) < h else 0),
                         f"expected {h} map rows, found {len(rows)}")
    blocked = []
    for y, row in enumerate(rows):
        ln = 5 + y
        if len(row) != w:
            raise ParseError(ln, f"row {y} has {len(row)} cells, expected {w}")
        for x, ch in enumerate(row):
            if ch in PASSABLE:
                blocked.append(False)
            elif ch in BLOCKED:
                blocked.append(True)
            else:
                raise ParseError(ln, f"unknown map character {ch!r} at column {x}")
    if all(blocked):
        raise ParseError(5, "map has no passable cell")
    return ParsedMap(GridMap(w, h, blocked), rows)


def parse_map(data) -> GridMap:
    return parse_map_text(data).grid


def render_map(grid: GridMap, rows=None) -> str:
    """movingai text; with the original rows the output is byte-identical."""
    out = ["type octile", f"height {grid.height}", f"width {grid.width}", "map"]
    if rows is not None:
        out.extend(rows)
    else:
        for y in range(grid.height):
            out.append("".join("@" if grid.blocked[y * grid.width + x] else "."
                               for x in range(grid.width)))
    return "\n".join(out) + "\n"


def parse_scen(data, grid: GridMap | None = None) -> list:
    lines = _text(data).split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]
    if not lines:
        raise ParseError(1, "empty scenario")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "version":
        raise ParseError(1, "expected 'version 1'")
    if head[1] not in ("1", "1.0"):
        raise ParseError(1, f"unsupported version {head[1]}")
    out = []
    for i, ln in enumerate(lines[1:], start=2):
        if not ln.strip():
            continue
        f = ln.split("\t")
        if len(f) != 9:
            raise ParseError(i, f"expected 9 tab-separated fields, found {len(f)}")
        try:
            bucket, w, h, sx, sy, gx, gy = (int(f[k]) for k in (0, 2, 3, 4, 5, 6, 7))
            ref = float(f[8])
        except ValueError:
            raise ParseError(i, "non-numeric field") from None
        for (x, y) in ((sx, sy), (gx, gy)):
            if not (0 <= x < w and 0 <= y < h):
                raise ParseError(i, f"cell ({x},{y}) outside {w}x{h}")
            if grid is not None:
                if not grid.in_bounds(x, y):
                    raise ParseError(i, f"cell ({x},{y}) outside the map")
                if grid.blocked[grid.vertex(x, y)]:
                    raise ParseError(i, f"cell ({x},{y}) is blocked")
        out.append(ScenEntry(bucket, f[1], w, h, (sx, sy), (gx, gy), ref))
    return out


def render_scen(entries, raw_refs=None) -> str:
    out = ["version 1"]
    for k, e in enumerate(entries):
        ref = raw_refs[k] if raw_refs is not None else _fmt_ref(e.reference_length)
        out.append("\t".join([str(e.bucket), e.map_name, str(e.width), str(e.height),
                              str(e.start[0]), str(e.start[1]), str(e.goal[0]),
                              str(e.goal[1]), ref]))
    return "\n".join(out) + "\n"


def _fmt_ref(v: float) -> str:
    return f"{v:.8f}"


def instance_from_scen(grid: GridMap, entries, n_agents: int) -> ProblemInstance:
    if n_agents > len(entries):
        raise ValueError(f"scenario has {len(entries)} rows, {n_agents} agents requested")
    rows = entries[:n_agents]
    return ProblemInstance.on_grid(grid, [e.start for e in rows], [e.goal for e in rows])


def random_grid(w: int, h: int, density: float, rng: random.Random) -> GridMap:
    if not 0 <= density < 1:
        raise ValueError("density must be in [0, 1)")
    n = w * h
    k = int(density * n)
    blocked = [False] * n
    for v in rng.sample(range(n), k):
        blocked[v] = True
    return GridMap(w, h, blocked)


def gen_random_scenario(w: int, h: int, density: float, n_agents: int, seed: int,
                        max_tries: int = 1000) -> ProblemInstance:
    """Random map and endpoints, redrawn until every agent can reach its goal."""
    if n_agents < 1:
        raise ValueError("need at least one agent")
    rng = random.Random(seed)
    for _ in range(max_tries):
        grid = random_grid(w, h, density, rng)
        free = [v for v in range(w * h) if not grid.blocked[v]]
        if len(free) < 2 * n_agents:
            raise GenerationError("not enough passable cells for distinct endpoints")
        pick = rng.sample(free, 2 * n_agents)
        inst = ProblemInstance(grid, pick[:n_agents], pick[n_agents:],
                               name=f"random-{w}x{h}-{density}-{n_agents}-{seed}")
        try:
            plan_independently(inst)
        except NoSolution:
            continue
        return inst
    raise GenerationError(f"no feasible scenario after {max_tries} tries")


def cross_instance(size: int = 20) -> ProblemInstance:
    """Open grid; one agent at the middle of each edge heading to the opposite edge."""
    grid = GridMap(size, size)
    m = size // 2
    e = size - 1
    starts = [(m, 0), (m, e), (0, m), (e, m)]
    goals = [(m, e), (m, 0), (e, m), (0, m)]
    return ProblemInstance.on_grid(grid, starts, goals, name=f"cross-{size}")
