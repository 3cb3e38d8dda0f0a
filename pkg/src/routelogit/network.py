"""Network data model, file I/O, and synthetic network generators.

A :class:`Network` is a directed graph over integer states with a single
absorbing destination. Each edge carries a real attribute vector (used to
build utilities) and an integer cost vector in units of ``cost_quantum``
(used by the constrained model). States may carry per-dimension reset
flags: arriving at a flagged state zeroes the accumulated cost in that
dimension, after the arrival edge's cost has been added and checked.

States can represent nodes or links of a road network. The geometric
generator emits link-based networks (one state per link, plus a virtual
origin state and the absorbing destination) so that turn attributes, which
depend on consecutive links, are well defined per state transition.
"""
import math
from functools import cached_property

import numpy as np

from .errors import ParseError

DEFAULT_TIME_QUANTUM = 0.1


class Network:
    """Immutable directed state network.

    Parameters
    ----------
    n_states : int
        Number of states, ids 0..n_states-1.
    destination : int
        Absorbing destination state; must have no outgoing edges.
    edges : sequence of (src, dst, attrs, costs)
        ``attrs`` is a sequence of floats (length = attribute arity),
        ``costs`` a sequence of ints in cost quanta (length = constraint
        arity; values may be negative).
    attribute_names : sequence of str
    constraint_arity : int
        Number of constraint dimensions K (may be 0).
    cost_quantum : float
        Positive real unit represented by one integer cost step.
    resets : sequence of (state, dim), optional
        Reset flags: arrival at ``state`` zeroes accumulated cost in ``dim``.

    The adjacency is stored CSR-style; treat all arrays as read-only.
    """

    def __init__(self, n_states, destination, edges, attribute_names,
                 constraint_arity, cost_quantum=1.0, resets=()):
        if n_states < 1:
            raise ValueError("network needs at least one state")
        if not 0 <= destination < n_states:
            raise ValueError(f"destination {destination} out of range")
        if cost_quantum <= 0:
            raise ValueError("cost_quantum must be positive")
        if constraint_arity < 0:
            raise ValueError("constraint_arity must be >= 0")

        self.n_states = int(n_states)
        self.destination = int(destination)
        self.attribute_names = tuple(attribute_names)
        self.n_attrs = len(self.attribute_names)
        self.constraint_arity = int(constraint_arity)
        self.cost_quantum = float(cost_quantum)

        edges = list(edges)
        seen = set()
        for src, dst, attrs, costs in edges:
            if not (0 <= src < n_states and 0 <= dst < n_states):
                raise ValueError(f"edge ({src},{dst}) references unknown state")
            if src == self.destination:
                raise ValueError(
                    f"destination {self.destination} must be absorbing but has "
                    f"outgoing edge to {dst}")
            if (src, dst) in seen:
                raise ValueError(f"duplicate edge ({src},{dst})")
            seen.add((src, dst))
            if len(attrs) != self.n_attrs:
                raise ValueError(
                    f"edge ({src},{dst}) has {len(attrs)} attributes, "
                    f"expected {self.n_attrs}")
            if len(costs) != self.constraint_arity:
                raise ValueError(
                    f"edge ({src},{dst}) has {len(costs)} costs, "
                    f"expected {self.constraint_arity}")

        order = sorted(range(len(edges)), key=lambda e: (edges[e][0], edges[e][1]))
        self.n_edges = len(edges)
        self.edge_src = np.array([edges[e][0] for e in order], dtype=np.int64)
        self.edge_dst = np.array([edges[e][1] for e in order], dtype=np.int64)
        self.edge_attrs = np.array(
            [[float(a) for a in edges[e][2]] for e in order],
            dtype=np.float64).reshape(self.n_edges, self.n_attrs)
        self.edge_costs = np.array(
            [[int(c) for c in edges[e][3]] for e in order],
            dtype=np.int64).reshape(self.n_edges, self.constraint_arity)

        counts = np.bincount(self.edge_src, minlength=self.n_states)
        self.indptr = np.concatenate(
            ([0], np.cumsum(counts))).astype(np.int64)
        self._edge_index = {
            (int(s), int(t)): e
            for e, (s, t) in enumerate(zip(self.edge_src, self.edge_dst))
        }

        self.reset_flags = np.zeros(
            (self.n_states, self.constraint_arity), dtype=bool)
        for state, dim in resets:
            if not 0 <= state < self.n_states:
                raise ValueError(f"reset flag on unknown state {state}")
            if not 0 <= dim < self.constraint_arity:
                raise ValueError(f"reset flag on unknown dimension {dim}")
            self.reset_flags[state, dim] = True

        for arr in (self.edge_src, self.edge_dst, self.edge_attrs,
                    self.edge_costs, self.indptr, self.reset_flags):
            arr.setflags(write=False)

    def out_edges(self, state):
        """Range of edge ids leaving ``state`` (CSR slice)."""
        return range(self.indptr[state], self.indptr[state + 1])

    def edge_index(self, src, dst):
        """Edge id for (src, dst), or None if absent."""
        return self._edge_index.get((src, dst))

    @cached_property
    def topological_order(self):
        """States in topological order, or None if the graph is cyclic."""
        indeg = np.bincount(self.edge_dst, minlength=self.n_states)
        stack = [s for s in range(self.n_states) if indeg[s] == 0]
        order = []
        while stack:
            s = stack.pop()
            order.append(s)
            for e in self.out_edges(s):
                t = int(self.edge_dst[e])
                indeg[t] -= 1
                if indeg[t] == 0:
                    stack.append(t)
        return np.array(order, dtype=np.int64) if len(order) == self.n_states else None

    @property
    def is_acyclic(self):
        return self.topological_order is not None

    def validate_path(self, path):
        """Check a state sequence is a destination-terminated walk; return edge ids."""
        path = list(path)
        if len(path) < 1:
            raise ValueError("empty path")
        if path[-1] != self.destination:
            raise ValueError(
                f"path must end at destination {self.destination}, got {path[-1]}")
        edge_ids = []
        for a, b in zip(path[:-1], path[1:]):
            e = self.edge_index(int(a), int(b))
            if e is None:
                raise ValueError(f"({a},{b}) is not an edge of the network")
            edge_ids.append(e)
        return np.array(edge_ids, dtype=np.int64)

    def path_attr_totals(self, path):
        """Sum of edge attribute vectors along a valid path."""
        edge_ids = self.validate_path(path)
        if len(edge_ids) == 0:
            return np.zeros(self.n_attrs)
        return self.edge_attrs[edge_ids].sum(axis=0)

    def stepwise_feasible(self, path, alpha):
        """True if every prefix of ``path`` keeps accumulated cost within alpha.

        Edge costs are added first, the bound checked, then arrival resets
        applied, per constraint dimension.
        """
        alpha = np.asarray(alpha, dtype=np.int64).reshape(-1)
        if alpha.shape[0] != self.constraint_arity:
            raise ValueError("alpha arity mismatch")
        edge_ids = self.validate_path(path)
        acc = np.zeros(self.constraint_arity, dtype=np.int64)
        for e in edge_ids:
            acc = acc + self.edge_costs[e]
            if np.any(acc > alpha):
                return False
            dst = int(self.edge_dst[e])
            acc = np.where(self.reset_flags[dst], 0, acc)
        return True


# ---------------------------------------------------------------------------
# file format


def _parse_lines(lines):
    n_states = None
    destination = None
    attr_names = None
    arity = None
    quantum = 1.0
    resets = []
    edges = []
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        try:
            if kind == "states":
                n_states = int(tok[1])
            elif kind == "destination":
                destination = int(tok[1])
            elif kind == "attrs":
                attr_names = tok[1:]
            elif kind == "constraints":
                if len(tok) != 4 or tok[2] != "quantum":
                    raise ValueError("expected 'constraints <K> quantum <q>'")
                arity = int(tok[1])
                quantum = float(tok[3])
            elif kind == "reset":
                resets.append((int(tok[1]), int(tok[2])))
            elif kind == "edge":
                if n_states is None or attr_names is None or arity is None:
                    raise ValueError("edge line before header lines")
                want = 3 + len(attr_names) + arity
                if len(tok) != want:
                    raise ValueError(
                        f"expected {want - 1} fields after 'edge', got {len(tok) - 1}")
                src, dst = int(tok[1]), int(tok[2])
                if not (0 <= src < n_states and 0 <= dst < n_states):
                    raise ValueError(f"edge ({src},{dst}) references unknown state")
                attrs = [float(x) for x in tok[3:3 + len(attr_names)]]
                costs = [int(x) for x in tok[3 + len(attr_names):]]
                edges.append((src, dst, attrs, costs))
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except ParseError:
            raise
        except (ValueError, IndexError) as exc:
            raise ParseError(f"line {ln}: {exc}") from exc
    if n_states is None:
        raise ParseError("missing 'states' header")
    if destination is None:
        raise ParseError("missing 'destination' header")
    if attr_names is None:
        raise ParseError("missing 'attrs' header")
    if arity is None:
        raise ParseError("missing 'constraints' header")
    return Network(n_states, destination, edges, attr_names, arity,
                   cost_quantum=quantum, resets=resets)


def load_network(source):
    """Load a network from a path, file object, or raw text.

    The format is line oriented: ``states <n>``, ``destination <id>``,
    ``attrs <name>...``, ``constraints <K> quantum <q>``, optional
    ``reset <state> <dim>`` lines, and ``edge <from> <to> <attrs...>
    <costs...>`` lines. ``#`` starts a comment.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        source = str(source)
        if "\n" in source:
            text = source
        else:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
    return _parse_lines(text.splitlines())


def save_network(net, target=None):
    """Serialize ``net`` to the text format; write to ``target`` if given."""
    out = [
        f"states {net.n_states}",
        f"destination {net.destination}",
        "attrs " + " ".join(net.attribute_names),
        f"constraints {net.constraint_arity} quantum {float(net.cost_quantum)!r}",
    ]
    for s, k in zip(*np.nonzero(net.reset_flags)):
        out.append(f"reset {s} {k}")
    for e in range(net.n_edges):
        # shortest representation that round-trips exactly
        attrs = " ".join(repr(float(a)) for a in net.edge_attrs[e])
        costs = " ".join(str(int(c)) for c in net.edge_costs[e])
        parts = [f"edge {net.edge_src[e]} {net.edge_dst[e]}"]
        if attrs:
            parts.append(attrs)
        if costs:
            parts.append(costs)
        out.append(" ".join(parts))
    text = "\n".join(out) + "\n"
    if target is not None:
        if hasattr(target, "write"):
            target.write(text)
        else:
            with open(target, "w", encoding="utf-8") as fh:
                fh.write(text)
    return text


def load_observations(source):
    """Read one whitespace-separated state path per line."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    paths = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            paths.append(tuple(int(x) for x in line.split()))
        except ValueError as exc:
            raise ParseError(f"line {ln}: {exc}") from exc
    return paths


def save_observations(paths, target):
    text = "\n".join(" ".join(str(s) for s in p) for p in paths) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# turn geometry and the link-state expansion

LEFT_TURN_DEG = 10.0
UTURN_DEG = 170.0


def turn_dummies(bearing_in, bearing_out):
    """(left, right, uturn) dummies from consecutive link bearings (radians).

    Left turn for signed deltas in (10, 170) degrees, right turn in
    (-170, -10), u-turn for |delta| >= 170.
    """
    d = math.degrees(bearing_out - bearing_in)
    while d > 180.0:
        d -= 360.0
    while d <= -180.0:
        d += 360.0
    if abs(d) >= UTURN_DEG:
        return 0.0, 0.0, 1.0
    if d > LEFT_TURN_DEG:
        return 1.0, 0.0, 0.0
    if d < -LEFT_TURN_DEG:
        return 0.0, 1.0, 0.0
    return 0.0, 0.0, 0.0


def expand_links(node_xy, node_edges, origin_node, dest_node, edge_time,
                 quantum=DEFAULT_TIME_QUANTUM, extra_attrs=None,
                 extra_names=(), extra_first=False, link_cost=None,
                 station_nodes=()):
    """Build a link-based state network from a node graph.

    States: 0 is a virtual origin (standing at ``origin_node``, no previous
    link), one state per link not entering ``dest_node``, and the absorbing
    destination last. A transition carries the attributes of the link being
    traversed: travel time, left/right/u-turn dummies from the bearings of
    the consecutive links, and any ``extra_attrs`` of the link (placed
    before the others when ``extra_first``). The single cost dimension is
    the traversed link's time in quanta, or ``link_cost(link)`` if given
    (e.g. a constant 1 for link-count bounds).

    ``station_nodes`` mark recharge nodes: every state representing arrival
    at such a node gets a reset flag in dimension 0.

    Returns (network, state_of_link, head_node_of_state) where
    ``state_of_link`` maps a node-graph edge (i, j) to its state id (entries
    for links into ``dest_node`` map to the destination state).
    """
    node_xy = np.asarray(node_xy, dtype=float)
    links = sorted(node_edges)
    times = {e: float(edge_time[e]) for e in links}
    extra_attrs = extra_attrs or {}
    extra_names = tuple(extra_names)

    interior = [e for e in links if e[1] != dest_node]
    state_of_link = {}
    for idx, e in enumerate(interior):
        state_of_link[e] = 1 + idx
    n_states = 2 + len(interior)
    dest_state = n_states - 1
    for e in links:
        if e[1] == dest_node:
            state_of_link[e] = dest_state

    out_by_node = {}
    for i, j in links:
        out_by_node.setdefault(i, []).append((i, j))

    def bearing(e):
        (i, j) = e
        return math.atan2(node_xy[j, 1] - node_xy[i, 1],
                          node_xy[j, 0] - node_xy[i, 0])

    def attrs_for(prev, link):
        t = times[link]
        if prev is None:
            lt = rt = ut = 0.0
        else:
            lt, rt, ut = turn_dummies(bearing(prev), bearing(link))
        extra = [float(x) for x in extra_attrs.get(link, ())]
        base = [t, lt, rt, ut]
        return extra + base if extra_first else base + extra

    def cost_for(link):
        if link_cost is not None:
            return [int(link_cost(link))]
        return [int(round(times[link] / quantum))]

    edges = []
    for link in out_by_node.get(origin_node, []):
        edges.append((0, state_of_link[link], attrs_for(None, link),
                      cost_for(link)))
    for prev in interior:
        j = prev[1]
        src = state_of_link[prev]
        for link in out_by_node.get(j, []):
            edges.append((src, state_of_link[link],
                          attrs_for(prev, link), cost_for(link)))

    head_of_state = np.full(n_states, -1, dtype=np.int64)
    head_of_state[0] = origin_node
    for e, s in state_of_link.items():
        if s != dest_state:
            head_of_state[s] = e[1]
    head_of_state[dest_state] = dest_node

    stations = set(station_nodes)
    resets = [(s, 0) for s in range(1, dest_state)
              if int(head_of_state[s]) in stations]

    base_names = ("tt", "lt", "rt", "ut")
    names = (extra_names + base_names) if extra_first else (base_names + extra_names)
    net = Network(n_states, dest_state, edges, names, 1,
                  cost_quantum=quantum, resets=resets)
    return net, state_of_link, head_of_state


def generate_geometric_dag(n_nodes, seed, station_nodes=()):
    """Random geometric DAG, expanded to a link-based state network.

    ``n_nodes`` points are placed uniformly in the unit square; an edge
    joins two points when their Euclidean distance is below 2/sqrt(n),
    oriented from the smaller to the larger index. If the smallest-index
    node (the origin) cannot reach the largest-index node (the
    destination), the single edge (origin, destination) is added. Link
    travel times are the Euclidean lengths, snapped to the cost quantum
    grid so the integer cost of a link equals its time exactly.

    Deterministic for a fixed seed. ``station_nodes`` (base node ids)
    become reset states in the expanded network.
    """
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    rng = np.random.default_rng(seed)
    xy = rng.random((n_nodes, 2))
    radius = 2.0 / math.sqrt(n_nodes)
    edges = set()
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if math.dist(xy[i], xy[j]) < radius:
                edges.add((i, j))

    # reachability 0 -> n-1 along increasing indices
    reach = {0}
    for i in range(n_nodes):
        if i in reach:
            for (a, b) in edges:
                if a == i:
                    reach.add(b)
    if (n_nodes - 1) not in reach:
        edges.add((0, n_nodes - 1))

    # utilities keep the continuous times; only the constraint costs are
    # rounded to the quantum grid
    times = {e: math.dist(xy[e[0]], xy[e[1]]) for e in sorted(edges)}
    net, _, _ = expand_links(xy, edges, 0, n_nodes - 1, times,
                             quantum=DEFAULT_TIME_QUANTUM,
                             station_nodes=station_nodes)
    return net


def longest_travel_time(net, origin=0, attr=0):
    """Longest total of ``attr`` over origin-to-destination paths (hours).

    Requires an acyclic network; computed by dynamic programming in
    topological order.
    """
    order = net.topological_order
    if order is None:
        raise ValueError("cycle detected: longest path is undefined")
    best = np.full(net.n_states, -np.inf)
    best[origin] = 0.0
    for s in order:
        if best[s] == -np.inf:
            continue
        for e in net.out_edges(s):
            t = int(net.edge_dst[e])
            cand = best[s] + net.edge_attrs[e, attr]
            if cand > best[t]:
                best[t] = cand
    if best[net.destination] == -np.inf:
        raise ValueError("destination unreachable from origin")
    return float(best[net.destination])


def threshold_from_percent(net, percent, origin=0):
    """Cost bound in quanta: floor(percent * T_max / quantum).

    ``percent`` is the ratio of the bound to the longest feasible travel
    time; must be positive. A 1e-9 guard absorbs float dust before the
    floor so grid-aligned products round as intended.
    """
    if percent <= 0:
        raise ValueError("percent must be positive")
    t_max = longest_travel_time(net, origin=origin)
    return int(math.floor(percent * t_max / net.cost_quantum + 1e-9))
