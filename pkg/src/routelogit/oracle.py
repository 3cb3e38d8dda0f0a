"""Brute-force path enumeration and path-based logit probabilities.

This module is the ground truth for equivalence checks: the recursive
models must agree with a multinomial logit over the explicitly enumerated
(and explicitly restricted) path set. It is meant for desk-scale networks;
enumeration on cyclic networks requires an explicit hop limit.
"""
from dataclasses import dataclass

import numpy as np

from .errors import PathOverflowError
from .rl import edge_utilities


@dataclass(frozen=True)
class PathSet:
    """Enumerated paths with utilities and per-path feasibility flags."""

    paths: tuple
    edge_ids: tuple
    utilities: np.ndarray
    feasible: np.ndarray
    net: object = None

    def __len__(self):
        return len(self.paths)

    def subset(self, mask):
        mask = np.asarray(mask, dtype=bool)
        keep = np.nonzero(mask)[0]
        return PathSet(
            paths=tuple(self.paths[i] for i in keep),
            edge_ids=tuple(self.edge_ids[i] for i in keep),
            utilities=self.utilities[keep],
            feasible=self.feasible[keep],
            net=self.net,
        )

    def index_of(self, path):
        path = tuple(path)
        for i, p in enumerate(self.paths):
            if p == path:
                return i
        return None


def enumerate_paths(net, origin, u, max_paths=100_000, hop_limit=None):
    """All origin-to-destination paths with their total utilities.

    Cyclic networks require ``hop_limit`` (the choice set is infinite
    without one); exceeding ``max_paths`` raises PathOverflowError rather
    than silently truncating.
    """
    if hop_limit is None:
        if not net.is_acyclic:
            raise ValueError(
                "network is cyclic: enumeration requires an explicit hop_limit")
        hop_limit = net.n_states
    v_edge = edge_utilities(net, u)
    dest = net.destination
    paths = []
    edge_lists = []

    stack = [(int(origin), [int(origin)], [])]
    while stack:
        state, path, edges = stack.pop()
        if state == dest:
            if len(paths) >= max_paths:
                raise PathOverflowError(
                    f"more than {max_paths} paths from {origin}")
            paths.append(tuple(path))
            edge_lists.append(np.array(edges, dtype=np.int64))
            continue
        if len(edges) >= hop_limit:
            continue
        for e in net.out_edges(state):
            t = int(net.edge_dst[e])
            stack.append((t, path + [t], edges + [e]))

    utilities = np.array([v_edge[e].sum() if len(e) else 0.0
                          for e in edge_lists])
    return PathSet(paths=tuple(paths), edge_ids=tuple(edge_lists),
                   utilities=utilities,
                   feasible=np.ones(len(paths), dtype=bool), net=net)


def restrict_total(ps, alpha, net=None):
    """Keep paths whose total cost is within alpha in every dimension.

    Only defined for nonnegative edge costs (with mixed signs a total
    within the bound can hide an infeasible prefix); use
    :func:`restrict_stepwise` in that case.
    """
    net = ps.net if net is None else net
    if np.any(net.edge_costs < 0):
        raise ValueError(
            "restrict_total requires nonnegative edge costs; "
            "use restrict_stepwise for mixed-sign costs")
    alpha = np.asarray(alpha, dtype=np.int64).reshape(-1)
    mask = np.empty(len(ps), dtype=bool)
    for i, edges in enumerate(ps.edge_ids):
        total = (net.edge_costs[edges].sum(axis=0) if len(edges)
                 else np.zeros(net.constraint_arity, dtype=np.int64))
        mask[i] = bool(np.all(total <= alpha))
    return ps.subset(mask)


def restrict_stepwise(ps, alpha, net=None):
    """Keep paths whose accumulated cost stays within alpha at every step,
    applying arrival resets; handles negative costs."""
    net = ps.net if net is None else net
    mask = np.array([net.stepwise_feasible(p, alpha) for p in ps.paths],
                    dtype=bool)
    return ps.subset(mask)


def mnl_over(ps, mu):
    """Multinomial logit probabilities over the path set.

    Computed with a max-shifted log-sum-exp so large utilities do not
    overflow. Raises on an empty set (no feasible route).
    """
    if len(ps) == 0:
        raise ValueError("no feasible route: the path set is empty")
    if mu <= 0:
        raise ValueError("mu must be positive")
    scaled = ps.utilities / mu
    top = scaled.max()
    weights = np.exp(scaled - top)
    return weights / weights.sum()
