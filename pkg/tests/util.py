"""Independent oracles and random-network builders for the test suite.

Everything here is deliberately written from scratch (plain dicts and
recursion) so it cannot share bugs with the package's implementations.
"""
import numpy as np

from routelogit.network import Network


def kahn_topo_order(n_states, edge_pairs):
    """Topological order via Kahn's algorithm, or None on a cycle."""
    succ = {s: [] for s in range(n_states)}
    indeg = {s: 0 for s in range(n_states)}
    for a, b in edge_pairs:
        succ[a].append(b)
        indeg[b] += 1
    frontier = [s for s in range(n_states) if indeg[s] == 0]
    order = []
    while frontier:
        s = frontier.pop()
        order.append(s)
        for t in succ[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                frontier.append(t)
    return order if len(order) == n_states else None


def dfs_paths(n_states, edge_pairs, origin, dest, limit=10_000_000):
    """All simple-walk paths origin->dest by recursive DFS (DAG inputs)."""
    succ = {s: [] for s in range(n_states)}
    for a, b in edge_pairs:
        succ[a].append(b)
    out = []

    def rec(node, path):
        if len(out) > limit:
            raise RuntimeError("too many paths")
        if node == dest:
            out.append(tuple(path))
            return
        for t in succ[node]:
            rec(t, path + [t])

    rec(origin, [origin])
    return out


def dp_path_count(n_states, edge_pairs, origin, dest):
    """Number of origin->dest paths by dynamic programming over a DAG."""
    order = kahn_topo_order(n_states, edge_pairs)
    assert order is not None
    count = {s: 0 for s in range(n_states)}
    count[origin] = 1
    succ = {s: [] for s in range(n_states)}
    for a, b in edge_pairs:
        succ[a].append(b)
    for s in order:
        for t in succ[s]:
            count[t] += count[s]
    return count[dest]


def prefix_feasible(path, cost_of, resets, alpha):
    """Walk a path accumulating per-dimension costs with arrival resets.

    ``cost_of`` maps (a, b) to a cost tuple, ``resets`` maps state -> set
    of dimensions reset on arrival, ``alpha`` is the bound tuple.
    """
    k = len(alpha)
    acc = [0] * k
    for a, b in zip(path[:-1], path[1:]):
        c = cost_of[(a, b)]
        for d in range(k):
            acc[d] += c[d]
        if any(acc[d] > alpha[d] for d in range(k)):
            return False
        for d in resets.get(b, ()):
            acc[d] = 0
    return True


def softmax_oracle(utilities, mu):
    u = np.asarray(utilities, dtype=float) / mu
    w = np.exp(u - u.max())
    return w / w.sum()


def central_diff_gradient(fun, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.empty(x.shape[0])
    for j in range(x.shape[0]):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        g[j] = (fun(xp) - fun(xm)) / (2 * h)
    return g


def random_dag_net(rng, n_states=8, n_attrs=2, k=1, cost_lo=-3, cost_hi=5,
                   with_resets=False, edge_prob=0.5):
    """Random node-based DAG network with mixed-sign integer costs.

    State 0 is the conventional origin and n-1 the destination; an edge
    (0, n-1) guarantees at least one path. Edges go from lower to higher
    index, so the network is acyclic by construction.
    """
    edges = []
    for i in range(n_states - 1):
        for j in range(i + 1, n_states):
            if j == n_states - 1 and i == 0:
                keep = True  # guarantee one origin-destination path
            else:
                keep = rng.random() < edge_prob
            if keep:
                attrs = rng.normal(0.5, 0.5, size=n_attrs).tolist()
                costs = rng.integers(cost_lo, cost_hi + 1, size=k).tolist()
                edges.append((i, j, attrs, costs))
    resets = []
    if with_resets:
        for s in range(1, n_states - 1):
            for d in range(k):
                if rng.random() < 0.25:
                    resets.append((s, d))
    names = [f"x{a}" for a in range(n_attrs)]
    return Network(n_states, n_states - 1, edges, names, k,
                   cost_quantum=1.0, resets=resets)


def random_cyclic_net(rng, n_core=6, n_attrs=1):
    """Strongly cyclic network: a directed ring with chords, unit costs.

    Every core state also links to the destination. Travel-time attribute
    positive, so a positive coefficient makes every matrix entry >= 1 and
    the unconstrained solve must fail.
    """
    dest = n_core
    edges = []
    for i in range(n_core):
        attrs = [float(rng.uniform(0.2, 1.0)) for _ in range(n_attrs)]
        edges.append((i, (i + 1) % n_core, attrs, [1]))
    for i in range(n_core):
        if i != (i + 1) % n_core:
            attrs = [float(rng.uniform(0.2, 1.0)) for _ in range(n_attrs)]
            edges.append((i, dest, attrs, [1]))
    # a few chords to densify the cycles
    for _ in range(n_core // 2):
        a, b = rng.integers(0, n_core, size=2)
        if a != b and all(not (e[0] == a and e[1] == b) for e in edges):
            attrs = [float(rng.uniform(0.2, 1.0)) for _ in range(n_attrs)]
            edges.append((int(a), int(b), attrs, [1]))
    names = [f"x{a}" for a in range(n_attrs)]
    return Network(n_core + 1, dest, edges, names, 1, cost_quantum=1.0)
