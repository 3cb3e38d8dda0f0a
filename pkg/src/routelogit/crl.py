"""Constrained model on the extended state space.

Each extended state pairs a network state with the vector of accumulated
constraint costs reached so far; expansion starts from (origin, 0) and
prunes any successor whose accumulated cost would exceed the bound in any
dimension, so infeasible states are never stored. Reset flags zero the
accumulated cost on arrival (after the bound check). Value recursion,
choice probabilities, and path probabilities then take the standard
recursive-logit form on the extended graph.

With strictly positive costs in some dimension (and no resets there) the
extended graph is acyclic and the solve is exact backward induction,
regardless of the utility scale -- the stability property the constrained
model is built around.
"""
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import SolveFailure, StateSpaceCapError
from .rl import DEFAULT_OPTIONS, edge_utilities, solve_linear_z

DEFAULT_STATE_CAP = 5_000_000


@dataclass(frozen=True)
class ExtendedState:
    base: int
    acc: tuple


class ExtendedStateSpace:
    """Reachable extended states with CSR successor structure.

    Arrays: ``base_of`` and ``acc_of`` describe states; extended edge e goes
    from the state owning slice position e (via ``indptr``) to ``succ[e]``
    and traverses base edge ``edge_of[e]``. ``rev_topo`` is a
    reverse-topological order when the extended graph is acyclic.
    """

    def __init__(self, net, origin, alpha, base_of, acc_of, indptr, succ,
                 edge_of, index):
        self.net = net
        self.origin = int(origin)
        self.alpha = alpha
        self.base_of = base_of
        self.acc_of = acc_of
        self.indptr = indptr
        self.succ = succ
        self.edge_of = edge_of
        self._index = index
        self.n_states = base_of.shape[0]
        self.n_edges = succ.shape[0]
        self.origin_index = 0
        self.destination_indices = np.nonzero(base_of == net.destination)[0]
        self.is_dest = base_of == net.destination
        self.rev_topo = self._reverse_topological()
        self.acyclic = self.rev_topo is not None

    def _reverse_topological(self):
        indeg = np.zeros(self.n_states, dtype=np.int64)
        np.add.at(indeg, self.succ, 1)
        stack = [s for s in range(self.n_states) if indeg[s] == 0]
        order = []
        while stack:
            s = stack.pop()
            order.append(s)
            for e in range(self.indptr[s], self.indptr[s + 1]):
                t = int(self.succ[e])
                indeg[t] -= 1
                if indeg[t] == 0:
                    stack.append(t)
        if len(order) != self.n_states:
            return None
        return np.array(order[::-1], dtype=np.int64)

    def state(self, idx):
        return ExtendedState(int(self.base_of[idx]), tuple(self.acc_of[idx]))

    def index_of(self, base, acc):
        """Index of extended state (base, acc), or None if not stored."""
        return self._index.get((int(base), tuple(int(a) for a in acc)))

    def stats(self):
        return {
            "extended_states": self.n_states,
            "extended_edges": self.n_edges,
            "acyclic": self.acyclic,
            "destination_states": int(self.destination_indices.shape[0]),
        }


def _check_alpha(net, alpha):
    alpha = np.asarray(alpha, dtype=np.int64).reshape(-1)
    if alpha.shape[0] != net.constraint_arity:
        raise ValueError(
            f"alpha has {alpha.shape[0]} dimensions, network has "
            f"{net.constraint_arity}")
    if np.any(alpha < 0):
        raise ValueError("alpha must be nonnegative in every dimension")
    return alpha


def build_extended(net, origin, alpha, state_cap=DEFAULT_STATE_CAP):
    """Breadth-first expansion of the extended state space from (origin, 0).

    A successor is created only if the accumulated cost after adding the
    edge cost stays within ``alpha`` in every dimension; reset flags on the
    arrival state are applied afterwards. States that cannot reach the
    destination are kept (their value becomes zero naturally). Raises
    StateSpaceCapError past ``state_cap`` states.
    """
    alpha = _check_alpha(net, alpha)
    if not 0 <= origin < net.n_states:
        raise ValueError(f"origin {origin} out of range")
    k = net.constraint_arity
    zero = tuple(0 for _ in range(k))
    index = {(int(origin), zero): 0}
    base_list = [int(origin)]
    acc_list = [zero]
    succ_lists = [[]]
    queue = deque([0])
    costs = net.edge_costs
    resets = net.reset_flags
    while queue:
        idx = queue.popleft()
        s = base_list[idx]
        if s == net.destination:
            continue
        acc = acc_list[idx]
        for e in net.out_edges(s):
            t = int(net.edge_dst[e])
            nxt = tuple(acc[d] + int(costs[e, d]) for d in range(k))
            if any(nxt[d] > alpha[d] for d in range(k)):
                continue
            if k:
                row = resets[t]
                nxt = tuple(0 if row[d] else nxt[d] for d in range(k))
            key = (t, nxt)
            j = index.get(key)
            if j is None:
                j = len(base_list)
                if j >= state_cap:
                    raise StateSpaceCapError(
                        f"extended space exceeded {state_cap} states "
                        f"(base states {net.n_states}, alpha {alpha.tolist()}, "
                        f"{k} constraint dimensions)")
                index[key] = j
                base_list.append(t)
                acc_list.append(nxt)
                succ_lists.append([])
                queue.append(j)
            succ_lists[idx].append((e, j))

    n = len(base_list)
    counts = np.array([len(s) for s in succ_lists], dtype=np.int64)
    indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    succ = np.empty(indptr[-1], dtype=np.int64)
    edge_of = np.empty(indptr[-1], dtype=np.int64)
    pos = 0
    for lst in succ_lists:
        for e, j in lst:
            succ[pos] = j
            edge_of[pos] = e
            pos += 1
    base_of = np.array(base_list, dtype=np.int64)
    acc_of = np.array(acc_list, dtype=np.int64).reshape(n, k)
    return ExtendedStateSpace(net, origin, alpha, base_of, acc_of, indptr,
                              succ, edge_of, index)


@dataclass(frozen=True)
class ExtendedValueTable:
    """Values on the extended space: z = exp(V/mu_state) per state.

    ``mu_state`` is constant for the plain constrained model and
    state-dependent for the nested variant (where z is not stored).
    """

    v_values: np.ndarray
    mu_state: np.ndarray
    z: np.ndarray = None

    def __post_init__(self):
        self.v_values.setflags(write=False)
        if self.z is not None:
            self.z.setflags(write=False)


def solve_erl(xs, net, u, options=DEFAULT_OPTIONS):
    """Value solve on the extended space.

    Exact backward induction when the extended graph is acyclic; otherwise
    the same direct-solve / value-iteration path (and failure semantics)
    as the unconstrained model.
    """
    w = np.exp(edge_utilities(net, u)[xs.edge_of] / u.mu)
    b = np.zeros(xs.n_states)
    b[xs.is_dest] = 1.0
    z = solve_linear_z(xs.indptr, xs.succ, w, b, xs.rev_topo, options)
    with np.errstate(divide="ignore"):
        v = u.mu * np.log(z)
    return ExtendedValueTable(v_values=v, mu_state=np.full(xs.n_states, u.mu), z=z)


def erl_link_probs(xs, net, u, evt):
    """Choice probability per stored extended edge.

    Successors pruned by the constraint were never stored and have
    probability exactly zero; rows of states with a surviving successor
    sum to one.
    """
    src = np.repeat(np.arange(xs.n_states), np.diff(xs.indptr))
    v_edge = edge_utilities(net, u)[xs.edge_of]
    probs = np.zeros(xs.n_edges)
    if evt.z is not None:
        ok = evt.z[src] > 0
        w = np.exp(v_edge / evt.mu_state[src])
        probs[ok] = w[ok] * evt.z[xs.succ[ok]] / evt.z[src[ok]]
    else:
        mu = evt.mu_state[src]
        fin = (np.isfinite(evt.v_values[xs.succ])
               & np.isfinite(evt.v_values[src]))
        probs[fin] = np.exp(
            (v_edge[fin] + evt.v_values[xs.succ[fin]] - evt.v_values[src[fin]])
            / mu[fin])
    return probs


def lift_path(xs, net, obs):
    """Extended-state indices for an observed base path, or None if any
    prefix is infeasible (pruned from the space)."""
    edge_ids = net.validate_path(obs)
    if int(obs[0]) != xs.origin:
        raise ValueError(
            f"observation starts at {obs[0]} but the extended space was "
            f"built for origin {xs.origin}")
    k = net.constraint_arity
    acc = tuple(0 for _ in range(k))
    idx = xs.origin_index
    out = [idx]
    for e in edge_ids:
        t = int(net.edge_dst[e])
        acc = tuple(acc[d] + int(net.edge_costs[e, d]) for d in range(k))
        if any(acc[d] > xs.alpha[d] for d in range(k)):
            return None
        if k:
            row = net.reset_flags[t]
            acc = tuple(0 if row[d] else acc[d] for d in range(k))
        idx = xs.index_of(t, acc)
        if idx is None:
            return None
        out.append(idx)
    return out


def path_prob_crl(xs, net, u, evt, obs):
    """Probability of an observed path under the constrained model.

    Exactly zero when any prefix violates a constraint; otherwise the
    product of extended-edge choice probabilities along the unique lift of
    the path.
    """
    lifted = lift_path(xs, net, obs)
    if lifted is None:
        return 0.0
    probs = erl_link_probs(xs, net, u, evt)
    out = 1.0
    for a, b in zip(lifted[:-1], lifted[1:]):
        e = _find_ext_edge(xs, a, b)
        if e is None:
            return 0.0
        out *= probs[e]
    return float(out)


def _find_ext_edge(xs, src_idx, dst_idx):
    for e in range(xs.indptr[src_idx], xs.indptr[src_idx + 1]):
        if xs.succ[e] == dst_idx:
            return e
    return None


@dataclass(frozen=True)
class NestedSpec:
    """State-dependent dispersion for the nested variant.

    ``mu_of`` may be a positive scalar, an array over base states, or a
    callable base-state -> mu. The plain model is the constant case.
    """

    mu_of: object = 1.0

    def mu_array(self, xs):
        if callable(self.mu_of):
            mu = np.array([float(self.mu_of(int(b))) for b in xs.base_of])
        elif np.ndim(self.mu_of) == 0:
            mu = np.full(xs.n_states, float(self.mu_of))
        else:
            per_base = np.asarray(self.mu_of, dtype=float)
            if per_base.shape[0] != xs.net.n_states:
                raise ValueError("mu_of array must have one entry per base state")
            mu = per_base[xs.base_of]
        if np.any(mu <= 0):
            raise ValueError("all dispersion parameters must be positive")
        return mu


def solve_nested(xs, net, u, nested, options=DEFAULT_OPTIONS):
    """Value solve with state-dependent dispersion.

    The recursion V(s)/mu_s = log sum exp((v + V(s'))/mu_s) has no linear
    form, so the acyclic case uses exact backward induction in V-space and
    the cyclic case fixed-point iteration to the value-iteration tolerance.
    """
    mu = nested.mu_array(xs)
    v_edge = edge_utilities(net, u)[xs.edge_of]
    b_dest = xs.is_dest

    def sweep(v, order):
        for i in order:
            if b_dest[i]:
                v[i] = 0.0
                continue
            lo, hi = xs.indptr[i], xs.indptr[i + 1]
            if hi == lo:
                v[i] = -np.inf
                continue
            vals = (v_edge[lo:hi] + v[xs.succ[lo:hi]]) / mu[i]
            top = vals.max()
            if not np.isfinite(top):
                v[i] = -np.inf
                continue
            v[i] = mu[i] * (top + np.log(np.exp(vals - top).sum()))
        return v

    if xs.acyclic:
        v = np.full(xs.n_states, -np.inf)
        v = sweep(v, xs.rev_topo)
    else:
        v = np.full(xs.n_states, -np.inf)
        v[b_dest] = 0.0
        order = np.arange(xs.n_states)
        for it in range(options.vi_max_iter):
            prev = v.copy()
            v = sweep(v, order)
            fin = np.isfinite(v) & np.isfinite(prev)
            if np.any(np.isfinite(v) != np.isfinite(prev)):
                continue
            delta = np.abs(v[fin] - prev[fin]).max() if fin.any() else 0.0
            if np.any(v[fin] > np.log(options.divergence_cap) * mu[fin].max()):
                raise SolveFailure("nested value iteration diverged")
            if delta <= options.vi_tol:
                break
        else:
            raise SolveFailure(
                f"nested value iteration did not converge within "
                f"{options.vi_max_iter} iterations")
    return ExtendedValueTable(v_values=v, mu_state=mu)
