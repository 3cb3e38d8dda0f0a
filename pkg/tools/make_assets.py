#!/usr/bin/env python3
"""Regenerate the shipped network assets under src/routelogit/data/.

Run from the repository root:  python3 tools/make_assets.py
"""
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from routelogit.network import Network, expand_links, save_network

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "routelogit" / "data"


def toy_deadline():
    """Six-node deadline toy: four routes totalling 3, 2, 2.5, 3 hours.

    States are 0-based; 0 is the origin, 1 the destination. Costs equal
    travel times in 0.5 h quanta, so a 2.5 h budget is alpha = 5.
    """
    edges = [
        (0, 1, [3.0], [6]),
        (0, 2, [1.0], [2]),
        (2, 3, [0.5], [1]),
        (2, 4, [0.5], [1]),
        (3, 4, [0.5], [1]),
        (3, 5, [0.5], [1]),
        (4, 1, [0.5], [1]),
        (5, 1, [1.0], [2]),
    ]
    return Network(6, 1, edges, ["tt"], 1, cost_quantum=0.5)


def toy_recharge():
    """Seven-node recharge toy with stations at states 3 and 6.

    Edge times were chosen so that, with utility -2*tt and unit scale, the
    four route totals are (4.5, 5.0, 6.0, 5.5) hours -- pairwise offsets
    (0, +0.5, +1.5, +1.0) -- and, treating time as energy with stations
    resetting the accumulator on arrival:

      * budget 5: all four routes feasible,
      * budget 4: the direct route 0->1 (4.5 > 4) drops out,
      * budget 3: only the station-hopping route 0-2-3-4-5-6-1 survives
        (max inter-station leg 2.5), while 0-2-3-4-1 fails on the final
        3.5 leg and 0-2-5-6-1 on the 3.5 prefix before state 6.
    """
    edges = [
        (0, 1, [4.5], [9]),
        (0, 2, [0.5], [1]),
        (2, 3, [1.0], [2]),
        (2, 5, [2.5], [5]),
        (3, 4, [1.5], [3]),
        (4, 1, [2.0], [4]),
        (4, 5, [0.5], [1]),
        (5, 6, [0.5], [1]),
        (6, 1, [2.0], [4]),
    ]
    return Network(7, 1, edges, ["tt"], 1, cost_quantum=0.5,
                   resets=[(3, 0), (6, 0)])


def grid_recharge():
    """5x5 grid, unit travel times, four recharge stations off the diagonal.

    Node (r, c) has id 5r + c; 0 (bottom-left) is the origin and 24
    (top-right) the absorbing destination (its outgoing edges are
    removed). All edges are bidirectional otherwise. With an energy
    budget below the 8-step shortest route, feasible routes must detour
    through a station; the stations sit near the off-diagonal corners.
    """
    n = 5
    dest = n * n - 1
    edges = []
    for r in range(n):
        for c in range(n):
            s = 5 * r + c
            for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < n and 0 <= cc < n and s != dest:
                    edges.append((s, 5 * rr + cc, [1.0], [1]))
    stations = [3, 9, 15, 21]
    return Network(25, dest, edges, ["tt"], 1, cost_quantum=1.0,
                   resets=[(s, 0) for s in stations])


# Standard 24-node / 76-link benchmark topology: (tail, head, capacity
# veh/h, free-flow minutes). Capacities rounded to the nearest 10.
SIOUX_LINKS = [
    (1, 2, 25900, 6), (1, 3, 23400, 4), (2, 1, 25900, 6), (2, 6, 4960, 5),
    (3, 1, 23400, 4), (3, 4, 17110, 4), (3, 12, 23400, 4), (4, 3, 17110, 4),
    (4, 5, 17780, 2), (4, 11, 4910, 6), (5, 4, 17780, 2), (5, 6, 4950, 4),
    (5, 9, 10000, 5), (6, 2, 4960, 5), (6, 5, 4950, 4), (6, 8, 4900, 2),
    (7, 8, 7840, 3), (7, 18, 23400, 2), (8, 6, 4900, 2), (8, 7, 7840, 3),
    (8, 9, 5050, 10), (8, 16, 5050, 5), (9, 5, 10000, 5), (9, 8, 5050, 10),
    (9, 10, 13920, 3), (10, 9, 13920, 3), (10, 11, 10000, 5),
    (10, 15, 13510, 6), (10, 16, 4850, 4), (10, 17, 4990, 8),
    (11, 4, 4910, 6), (11, 10, 10000, 5), (11, 12, 4910, 6),
    (11, 14, 4880, 4), (12, 3, 23400, 4), (12, 11, 4910, 6),
    (12, 13, 25900, 3), (13, 12, 25900, 3), (13, 24, 5090, 4),
    (14, 11, 4880, 4), (14, 15, 5130, 5), (14, 23, 4920, 4),
    (15, 10, 13510, 6), (15, 14, 5130, 5), (15, 19, 14560, 3),
    (15, 22, 9600, 3), (16, 8, 5050, 5), (16, 10, 4850, 4),
    (16, 17, 5230, 2), (16, 18, 19680, 3), (17, 10, 4990, 8),
    (17, 16, 5230, 2), (17, 19, 4820, 2), (18, 7, 23400, 2),
    (18, 16, 19680, 3), (18, 20, 23400, 4), (19, 15, 14560, 3),
    (19, 17, 4820, 2), (19, 20, 5000, 4), (20, 18, 23400, 4),
    (20, 19, 5000, 4), (20, 21, 5060, 6), (20, 22, 5080, 5),
    (21, 20, 5060, 6), (21, 22, 5230, 2), (21, 24, 4890, 3),
    (22, 15, 9600, 3), (22, 20, 5080, 5), (22, 21, 5230, 2),
    (22, 23, 5000, 4), (23, 14, 4920, 4), (23, 22, 5000, 4),
    (23, 24, 5080, 2), (24, 13, 5090, 4), (24, 21, 4890, 3),
    (24, 23, 5080, 2),
]

SIOUX_XY = {
    1: (50000, 510000), 2: (320000, 510000), 3: (50000, 440000),
    4: (130000, 440000), 5: (220000, 440000), 6: (320000, 440000),
    7: (420000, 380000), 8: (320000, 380000), 9: (220000, 380000),
    10: (220000, 320000), 11: (130000, 320000), 12: (50000, 320000),
    13: (50000, 50000), 14: (130000, 190000), 15: (220000, 190000),
    16: (320000, 320000), 17: (320000, 260000), 18: (420000, 320000),
    19: (320000, 190000), 20: (320000, 50000), 21: (220000, 50000),
    22: (220000, 130000), 23: (130000, 130000), 24: (130000, 50000),
}


def sioux_falls(origin_node=1, dest_node=20):
    """Link-based state network over the 24/76 benchmark topology.

    Attributes per transition, in order: capacity (10,000 veh/h), link
    length (coordinate units / 1e5), travel time (10-minute units), and
    left/right/u-turn dummies from link bearings. With a positive travel
    time coefficient of order one, some transition utilities exceed zero,
    which breaks the unconstrained solve on this cyclic network. Each
    transition costs 1 quantum, so the constraint dimension counts links.
    """
    xy = np.zeros((25, 2))
    for node, (x, y) in SIOUX_XY.items():
        xy[node] = (x, y)
    node_edges = [(i, j) for (i, j, _, _) in SIOUX_LINKS]
    times = {}
    extra = {}
    for (i, j, cap, fft) in SIOUX_LINKS:
        times[(i, j)] = fft / 10.0
        length = float(np.hypot(*(xy[j] - xy[i]))) / 1e5
        extra[(i, j)] = (cap / 10000.0, length)
    net, _, _ = expand_links(
        xy, node_edges, origin_node, dest_node, times, quantum=1.0,
        extra_attrs=extra, extra_names=("cap", "len"), extra_first=True,
        link_cost=lambda link: 1)
    return net


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    for name, builder in [
        ("toy_deadline", toy_deadline),
        ("toy_recharge", toy_recharge),
        ("grid_recharge", grid_recharge),
        ("sioux_falls", sioux_falls),
    ]:
        net = builder()
        path = DATA / f"{name}.net"
        save_network(net, path)
        print(f"wrote {path} ({net.n_states} states, {net.n_edges} edges)")


if __name__ == "__main__":
    main()
