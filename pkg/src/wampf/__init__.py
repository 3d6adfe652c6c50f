"""Windowed anytime multi-agent path finding (NWA* and X* window planners)."""
from .domain import (Collision, GlobalPath, Graph, GridMap, JointGoal, JointState,
                     NoSolution, ProblemInstance, detect_collisions, heuristic,
                     joint_neighbors, path_cost)
from .framework import (FrameworkState, SolutionEvent, SolveResult, StopCondition,
                        merge_colliding_windows, plan_independently, rec_wampf, solve)
from .oracle import OracleResult, solve_joint
from .planners import NWAStar, XStar, splice_and_pad
from .window import (HopWindow, RectWindow, extract_goalposts, grow, make_window, merge,
                     overlaps)

__all__ = [
    "Collision", "GlobalPath", "Graph", "GridMap", "JointGoal", "JointState",
    "NoSolution", "ProblemInstance", "detect_collisions", "heuristic",
    "joint_neighbors", "path_cost", "FrameworkState", "SolutionEvent",
    "SolveResult", "StopCondition", "merge_colliding_windows",
    "plan_independently", "rec_wampf", "solve", "OracleResult", "solve_joint",
    "NWAStar", "XStar", "splice_and_pad", "HopWindow", "RectWindow",
    "extract_goalposts", "grow", "make_window", "merge", "overlaps",
]
