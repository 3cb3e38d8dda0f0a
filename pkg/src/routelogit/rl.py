"""Unconstrained recursive route choice model.

The expected downstream utility V satisfies, with z = exp(V/mu),

    z(d) = 1,    z(s) = sum_{s' in N(s)} exp(v(s'|s)/mu) * z(s'),

a linear fixed point z = Mz + b with b the destination indicator. On
acyclic networks the system is solved exactly by backward induction; on
cyclic networks by a sparse direct solve (below a state-count cutoff) or
value iteration. A system with no valid solution -- negative or
non-finite entries, divergence, or a failed residual check -- raises
:class:`SolveFailure`; this is the documented failure mode of the
unconstrained model on cyclic networks with large utilities.
"""
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import SolveFailure


@dataclass(frozen=True)
class UtilitySpec:
    """Linear-in-attributes utility: v(s'|s) = beta . attrs(s,s'), scale mu."""

    beta: np.ndarray
    mu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float).reshape(-1))
        if self.mu <= 0:
            raise ValueError("mu must be positive")

    def validate(self, net):
        if self.beta.shape[0] != net.n_attrs:
            raise ValueError(
                f"beta has {self.beta.shape[0]} coefficients, network has "
                f"{net.n_attrs} attributes")


@dataclass(frozen=True)
class SolveOptions:
    """Solver controls; defaults follow the library-wide conventions."""

    direct_cutoff: int = 20_000
    vi_tol: float = 1e-10
    vi_max_iter: int = 10_000
    divergence_cap: float = 1e30
    residual_tol: float = 1e-8


DEFAULT_OPTIONS = SolveOptions()


@dataclass(frozen=True)
class ValueTable:
    """Per-state z = exp(V/mu) and V values (-inf where z = 0)."""

    z: np.ndarray
    mu: float
    v_values: np.ndarray = field(init=False)

    def __post_init__(self):
        with np.errstate(divide="ignore"):
            v = self.mu * np.log(self.z)
        v.setflags(write=False)
        self.z.setflags(write=False)
        object.__setattr__(self, "v_values", v)


def edge_utilities(net, u):
    """Deterministic utility per edge under ``u``."""
    u.validate(net)
    return net.edge_attrs @ u.beta


def solve_linear_z(indptr, succ, w, b, rev_topo, options=DEFAULT_OPTIONS):
    """Solve z = Mz + b for the CSR system (shared by both models).

    ``rev_topo`` is a reverse-topological state order for exact backward
    induction, or None for cyclic systems (direct sparse solve below the
    cutoff, value iteration above). Raises SolveFailure when no valid
    solution exists.
    """
    n = b.shape[0]
    if rev_topo is not None:
        z = backend.dag_backward(rev_topo, indptr, succ, w, b)
    elif n <= options.direct_cutoff:
        import warnings

        from scipy import sparse
        from scipy.sparse.linalg import MatrixRankWarning, spsolve

        rows = np.repeat(np.arange(n), np.diff(indptr))
        m = sparse.csr_matrix((w, (rows, succ)), shape=(n, n))
        a = (sparse.identity(n, format="csr") - m).tocsc()
        try:
            with np.errstate(all="ignore"), warnings.catch_warnings():
                warnings.simplefilter("error", MatrixRankWarning)
                z = np.asarray(spsolve(a, b)).reshape(-1)
        except (Exception, MatrixRankWarning) as exc:
            raise SolveFailure(f"direct solve failed: {exc}") from exc
    else:
        z, status, iters = backend.value_iteration(
            indptr, succ, w, b, options.vi_tol, options.vi_max_iter,
            options.divergence_cap)
        if status == 2:
            raise SolveFailure(f"value iteration diverged after {iters} iterations")
        if status == 1:
            raise SolveFailure(
                f"value iteration did not converge within {iters} iterations")

    if not np.all(np.isfinite(z)):
        raise SolveFailure("solution has non-finite entries")
    if np.any(z < 0):
        raise SolveFailure("solution has negative entries")
    resid = np.abs(z - backend.matvec_plus(indptr, succ, w, z, b)).max()
    scale = max(1.0, float(np.abs(z).max()))
    if resid > options.residual_tol * scale:
        raise SolveFailure(f"fixed-point residual {resid:.3e} exceeds tolerance")
    return z


def _system_arrays(net, u):
    w = np.exp(edge_utilities(net, u) / u.mu)
    b = np.zeros(net.n_states)
    b[net.destination] = 1.0
    return w, b


def solve_rl(net, u, options=DEFAULT_OPTIONS):
    """Solve the value system for ``net`` under utility ``u``.

    Returns a :class:`ValueTable`; z is 0 (V = -inf) at states from which
    the destination is unreachable. Raises SolveFailure when the system
    has no valid solution.
    """
    w, b = _system_arrays(net, u)
    order = net.topological_order
    rev = order[::-1].copy() if order is not None else None
    z = solve_linear_z(net.indptr, net.edge_dst, w, b, rev, options)
    return ValueTable(z=z, mu=u.mu)


def link_probs(net, u, vt):
    """Per-edge next-state choice probabilities.

    P(s'|s) is proportional to exp((v(s'|s) + V(s'))/mu); rows of states
    with positive z sum to 1, rows of dead states are all zero.
    """
    w = np.exp(edge_utilities(net, u) / u.mu)
    src = net.edge_src
    dst = net.edge_dst
    probs = np.zeros(net.n_edges)
    ok = vt.z[src] > 0
    probs[ok] = w[ok] * vt.z[dst[ok]] / vt.z[src[ok]]
    return probs


def path_prob_rl(net, u, vt, obs):
    """Probability of an observed path: product of link probabilities.

    Equals exp((v(path) - V(start))/mu) up to rounding. Raises ValueError
    if the observation contains a non-edge.
    """
    edge_ids = net.validate_path(obs)
    probs = link_probs(net, u, vt)
    out = 1.0
    for e in edge_ids:
        out *= probs[e]
    return float(out)
