"""Worked-example instances shared by the integration and acceptance tests."""
from wampf import GlobalPath, GridMap, ProblemInstance


def single_window_example():
    # a runs left to right, b top to bottom, both reach (4, 5) at t=3
    g = GridMap(10, 10)
    return ProblemInstance.on_grid(g, [(1, 5), (4, 8)], [(7, 5), (4, 2)], "single-window")


def cascade_example():
    # a/b collide at t=1; delaying a makes it meet c at (6, 1) at t=7.
    # d shares b's column at row 3 but is one step clear of b even when b waits.
    g = GridMap(10, 10)
    return ProblemInstance.on_grid(g, [(0, 1), (1, 0), (6, 8), (6, 3)],
                                   [(9, 1), (1, 5), (6, 0), (0, 3)], "cascade")


SLOT_BLOCKED = ({(x, 4) for x in (0, 1, 2, 3, 5, 6, 7)} | {(4, 3)}
                | {(x, 6) for x in (3, 4, 5, 6)})


def slot_example():
    """Corridor on row 5 with a one-cell slot at (4, 4) and a wall on row 6.

    Returns (instance, corridor path).  The corridor path is one of the
    optimal independent plans, chosen so that a and b meet head-on.
    """
    rows = ["".join("@" if (x, y) in SLOT_BLOCKED else "." for x in range(14))
            for y in range(10)]
    g = GridMap.from_rows(rows)
    inst = ProblemInstance.on_grid(g, [(8, 5), (1, 5), (2, 2)],
                                   [(2, 7), (12, 7), (11, 8)], "slot")
    a = [(x, 5) for x in range(8, 1, -1)] + [(2, 6), (2, 7)]
    b = [(x, 5) for x in range(1, 8)] + [(7, 6)] + [(x, 7) for x in range(7, 13)]
    c = [(x, 2) for x in range(2, 12)] + [(11, y) for y in range(3, 9)]
    path = GlobalPath([[g.vertex(*q) for q in seq] for seq in (a, b, c)])
    return inst, path


# canonical malformed movingai inputs with the line the error must name
MALFORMED_MAPS = [
    # (text, offending line)
    ("type tile\nheight 1\nwidth 1\nmap\n.\n", 1),
    ("type octile\nheight x\nwidth 1\nmap\n.\n", 2),
    ("type octile\nheight 2\nwidth 3\nmap\n...\n..\n", 6),
    ("type octile\nheight 1\nwidth 3\nmap\n.?.\n", 5),
]

MALFORMED_SCENS = [
    ("version 2\n0\tm.map\t4\t4\t0\t0\t3\t3\t6\n", 1),
    ("version 1\n0\tm.map\t4\t4\t0\t0\t3\t3\t6\n0\tm.map\t4\t4\t0\t0\t3\t9\t6\n", 3),
]
