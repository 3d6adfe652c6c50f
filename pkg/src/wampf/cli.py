"""Command line solver: movingai or random scenarios in, NDJSON events out."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import random
import statistics
import sys
import time
from dataclasses import dataclass, field

from .domain import NoSolution, ProblemInstance
from .framework import SolutionEvent, StopCondition, solve
from .movingai import (GenerationError, ParseError, cross_instance, gen_random_scenario,
                       instance_from_scen, parse_map, parse_scen)
from .oracle import TooManyAgents, solve_joint
from .planners import PLANNERS
from .search import BudgetExceeded, SearchTimeout

log = logging.getLogger("wampf")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TIMEOUT = 2  # timed out, best-so-far valid path reported
EXIT_NO_SOLUTION = 3
EXIT_TIMEOUT_NO_PATH = 4  # timed out before any valid path existed


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class ScenarioSpec:
    instance: ProblemInstance
    source: str
    seed: int | None = None


@dataclass
class RunRecord:
    scenario_hash: str
    planner: str
    events: list = field(default_factory=list)
    status: str = ""
    time_to_valid: float | None = None
    time_to_optimal: float | None = None
    cost: int | None = None
    oracle_cost: int | None = None
    lnaiaw: int = 0
    initial_cost: int | None = None
    iterations: int = 0

    def summary(self) -> dict:
        return {"event": "summary", "status": self.status, "planner": self.planner,
                "scenario": self.scenario_hash, "cost": self.cost,
                "initial_cost": self.initial_cost, "iterations": self.iterations,
                "time_to_valid_us": _us(self.time_to_valid),
                "time_to_optimal_us": _us(self.time_to_optimal),
                "lnaiaw": self.lnaiaw}


def _us(t):
    return None if t is None else int(t * 1e6)


def scenario_hash(inst: ProblemInstance) -> str:
    h = hashlib.sha256()
    g = inst.graph
    h.update(repr((getattr(g, "width", g.n), getattr(g, "height", 1))).encode())
    h.update(bytes(1 if b else 0 for b in g.blocked))
    h.update(repr((list(inst.starts), list(inst.goals))).encode())
    return h.hexdigest()[:16]


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wampf", description="Windowed anytime multi-agent path finding.")
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--map", help="movingai .map file")
    src.add_argument("--random", metavar="WxH:DENSITY[:SEED]",
                     help="random grid; seed falls back to $WAMPF_SEED")
    src.add_argument("--cross", type=int, nargs="?", const=20, metavar="SIZE",
                     help="four agents crossing an open SIZE x SIZE grid")
    ap.add_argument("--scen", help="movingai .scen file (starts and goals)")
    ap.add_argument("--agents", type=int, help="number of agents")
    ap.add_argument("--planner", choices=["xstar", "nwa", "joint-astar", "oracle"],
                    default="xstar")
    ap.add_argument("--radius", type=int, default=2)
    ap.add_argument("--step", type=int, default=1)
    ap.add_argument("--timeout-ms", type=int, default=None)
    ap.add_argument("--mode", choices=["first", "optimal", "anytime"], default="anytime")
    ap.add_argument("--out", default="-", help="output path, '-' for stdout")
    ap.add_argument("--bench-cross", type=int, metavar="TRIALS",
                    help="run the cross benchmark instead of a single solve")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _seed_from_env():
    raw = os.environ.get("WAMPF_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"WAMPF_SEED is not an integer: {raw!r}") from None


def _parse_random(spec: str):
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise UsageError("--random expects WxH:DENSITY[:SEED]")
    try:
        w, h = (int(v) for v in parts[0].lower().split("x"))
        density = float(parts[1])
        seed = int(parts[2]) if len(parts) == 3 else _seed_from_env()
    except ValueError:
        raise UsageError(f"bad --random value {spec!r}") from None
    if w <= 0 or h <= 0:
        raise UsageError("grid dimensions must be positive")
    return w, h, density, seed


def _random_endpoints(grid, n, seed):
    rng = random.Random(seed)
    free = [v for v in range(grid.n) if not grid.blocked[v]]
    if len(free) < 2 * n:
        raise UsageError(f"map has {len(free)} free cells, {2 * n} endpoints needed")
    pick = rng.sample(free, 2 * n)
    return pick[:n], pick[n:]


def load_scenario(args) -> ScenarioSpec:
    if args.agents is not None and args.agents < 1:
        raise UsageError("--agents must be positive")
    if args.cross is not None:
        return ScenarioSpec(cross_instance(args.cross), f"cross:{args.cross}")
    if args.random is not None:
        w, h, density, seed = _parse_random(args.random)
        if args.agents is None:
            raise UsageError("--random needs --agents")
        try:
            inst = gen_random_scenario(w, h, density, args.agents, seed)
        except ValueError as e:
            raise UsageError(str(e)) from None
        return ScenarioSpec(inst, f"random:{args.random}", seed)
    if args.map is None:
        raise UsageError("one of --map, --random or --cross is required")
    with open(args.map, "rb") as f:
        grid = parse_map(f.read())
    if args.scen is not None:
        with open(args.scen, "rb") as f:
            entries = parse_scen(f.read(), grid)
        n = args.agents if args.agents is not None else len(entries)
        if n > len(entries):
            raise UsageError(f"scenario has {len(entries)} rows, {n} agents requested")
        for e in entries[:n]:
            log.info("scen row %s -> %s reference length %s (not used)",
                     e.start, e.goal, e.reference_length)
        return ScenarioSpec(instance_from_scen(grid, entries, n), args.map)
    if args.agents is None:
        raise UsageError("--map without --scen needs --agents")
    seed = _seed_from_env()
    starts, goals = _random_endpoints(grid, args.agents, seed)
    return ScenarioSpec(ProblemInstance(grid, starts, goals), args.map, seed)


def run_joint(inst, planner, timeout_s, sink, cap):
    """Joint-space A* as a one-shot planner: a single optimal event."""
    rec = RunRecord(scenario_hash(inst), planner, lnaiaw=inst.n_agents)
    t0 = time.perf_counter()
    deadline = None if timeout_s is None else t0 + timeout_s
    try:
        res = solve_joint(inst, limit=None, agent_cap=cap, deadline=deadline)
    except SearchTimeout:
        rec.status = "timeout"
        return rec
    dt = time.perf_counter() - t0
    ev = SolutionEvent(1, res.optimal_cost, 1.0, int(dt * 1e6), True)
    rec.events.append(ev)
    sink(ev)
    rec.status, rec.cost, rec.iterations = "optimal", res.optimal_cost, 1
    rec.time_to_valid = rec.time_to_optimal = dt
    rec.oracle_cost = res.optimal_cost
    return rec


def run_windowed(inst, planner, radius, step, timeout_s, mode, sink):
    hooks = PLANNERS[planner](inst, radius=radius, step=step)
    stop = StopCondition(timeout_s=timeout_s, first_valid=(mode == "first"))
    held = []
    # optimal mode only reports the final answer
    res = solve(inst, hooks, sink=(held.append if mode == "optimal" else sink), stop=stop)
    if mode == "optimal" and held and held[-1].optimal:
        sink(held[-1])
    rec = RunRecord(scenario_hash(inst), planner, list(res.events), res.status,
                    res.time_to_valid, res.time_to_optimal, res.cost,
                    lnaiaw=res.lnaiaw, initial_cost=res.initial_cost,
                    iterations=res.iterations)
    return rec


def solve_spec(spec: ScenarioSpec, args, sink) -> RunRecord:
    timeout_s = None if args.timeout_ms is None else args.timeout_ms / 1000.0
    if args.planner in ("joint-astar", "oracle"):
        cap = None if args.planner == "joint-astar" else 4
        return run_joint(spec.instance, args.planner, timeout_s, sink, cap)
    return run_windowed(spec.instance, args.planner, args.radius, args.step, timeout_s,
                        args.mode, sink)


def _exit_code(rec: RunRecord) -> int:
    if rec.status == "no_solution":
        return EXIT_NO_SOLUTION
    if rec.status == "timeout":
        return EXIT_TIMEOUT if rec.events else EXIT_TIMEOUT_NO_PATH
    return EXIT_OK


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"wampf: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.radius < 0 or args.step < 1:
        print("wampf: error: --radius must be >= 0 and --step >= 1", file=sys.stderr)
        return EXIT_USAGE
    out = sys.stdout if args.out == "-" else None
    try:
        if args.bench_cross is not None:
            report = bench_cross(args.bench_cross, size=args.cross or 20)
            _open_out(args, out).write(json.dumps(report) + "\n")
            return EXIT_OK
        spec = load_scenario(args)
        if args.planner == "oracle" and spec.instance.n_agents > 4:
            raise TooManyAgents(f"{spec.instance.n_agents} agents exceeds the oracle cap of 4")
        stream = _open_out(args, out)

        def sink(ev):
            stream.write(json.dumps(ev.as_dict()) + "\n")
            stream.flush()

        try:
            rec = solve_spec(spec, args, sink)
        except NoSolution:
            rec = RunRecord(scenario_hash(spec.instance), args.planner, status="no_solution")
        except BudgetExceeded:
            rec = RunRecord(scenario_hash(spec.instance), args.planner, status="timeout")
        stream.write(json.dumps(rec.summary()) + "\n")
        stream.flush()
        if stream is not sys.stdout:
            stream.close()
        return _exit_code(rec)
    except (UsageError, TooManyAgents, ParseError, GenerationError, OSError) as e:
        print(f"wampf: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def _open_out(args, out):
    if out is not None:
        return out
    return open(args.out, "w")


def bench_cross(trials: int, size: int = 20, radius: int = 2) -> dict:
    """Time X*, NWA* and joint A* on the cross scenario.

    Times are reported as medians and as percentages of the joint A* median
    time to optimal.
    """
    inst = cross_instance(size)
    runs = {"xstar": [], "nwa": [], "joint-astar": []}
    costs = {}
    for _ in range(trials):
        for name in ("xstar", "nwa"):
            t0 = time.perf_counter()
            res = solve(inst, PLANNERS[name](inst, radius=radius))
            runs[name].append((res.time_to_valid, time.perf_counter() - t0))
            costs.setdefault(name, set()).add((res.events[0].cost, res.cost))
        t0 = time.perf_counter()
        opt = solve_joint(inst, limit=None, agent_cap=None)
        dt = time.perf_counter() - t0
        runs["joint-astar"].append((dt, dt))
        costs.setdefault("joint-astar", set()).add((opt.optimal_cost, opt.optimal_cost))
    joint = statistics.median(t for _, t in runs["joint-astar"])
    report = {"event": "bench", "scenario": f"cross-{size}", "trials": trials,
              "joint_median_s": joint}
    for name, rows in runs.items():
        tv = statistics.median(r[0] for r in rows)
        to = statistics.median(r[1] for r in rows)
        report[name] = {"time_to_valid_s": tv, "time_to_optimal_s": to,
                        "valid_pct_of_joint": 100.0 * tv / joint,
                        "optimal_pct_of_joint": 100.0 * to / joint,
                        "costs": sorted(costs[name])}
    return report


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
