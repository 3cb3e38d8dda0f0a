"""Maximum-likelihood estimation via the nested fixed-point procedure.

The inner loop solves the value system for the current coefficients; the
outer loop maximizes the average log-likelihood with BFGS and an Armijo
backtracking line search. Gradients are analytic for the plain models:
differentiating z = Mz + b gives (I - M) dz = (dM/db_j) z, after which

    dLL_i/db_j = x_j(path_i)/mu - dz(start_i)/db_j / z(start_i),

with x_j the path total of attribute j. Standard errors come from the
inverse of the negative numerical Hessian of the total log-likelihood at
the optimum.

Extended spaces, observation attribute totals, and feasibility checks are
fixed once per dataset (they depend on costs, not coefficients) and reused
across outer iterations; only the matrix entries are recomputed per beta.
"""
from dataclasses import dataclass

import numpy as np

from . import backend
from .crl import build_extended, erl_link_probs, lift_path, solve_erl, solve_nested
from .errors import InfeasibleObservationError, SolveFailure
from .rl import DEFAULT_OPTIONS, UtilitySpec, solve_linear_z

MODELS = ("rl", "crl", "cnrl")


@dataclass(frozen=True)
class EstimationConfig:
    """Controls for :func:`estimate`.

    ``alpha`` (cost bound in quanta) is required for the constrained
    models. ``gradient_mode`` is 'analytic' or 'finite-difference'; the
    nested model always uses finite differences.
    """

    model: str = "rl"
    mu: float = 1.0
    beta0: np.ndarray = None
    alpha: object = None
    gradient_mode: str = "analytic"
    tol_grad: float = 1e-6
    max_outer_iters: int = 200
    nested: object = None
    options: object = DEFAULT_OPTIONS

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.tol_grad <= 0:
            raise ValueError("tol_grad must be positive")
        if self.gradient_mode not in ("analytic", "finite-difference"):
            raise ValueError("gradient_mode must be 'analytic' or 'finite-difference'")
        if self.model == "cnrl" and self.gradient_mode == "analytic":
            object.__setattr__(self, "gradient_mode", "finite-difference")
        if self.beta0 is not None:
            object.__setattr__(
                self, "beta0", np.asarray(self.beta0, dtype=float).reshape(-1))


@dataclass(frozen=True)
class EstimationResult:
    beta: np.ndarray
    std_err: np.ndarray
    t_stat: np.ndarray
    avg_loglik: float
    converged: bool
    outer_iters: int
    n_obs: int
    failure: str = None

    def table(self, names=None):
        """Plain-text coefficient table."""
        p = self.beta.shape[0]
        names = list(names) if names else [f"beta{j}" for j in range(p)]
        width = max(10, max(len(n) for n in names) + 2)
        rows = [
            "".join(f"{n:>{width}}" for n in [""] + names),
            "".join(f"{x:>{width}}" for x in ["estimate"]
                    + [f"{b:.4f}" for b in self.beta]),
            "".join(f"{x:>{width}}" for x in ["std err"]
                    + [f"{s:.4f}" for s in self.std_err]),
            "".join(f"{x:>{width}}" for x in ["t-test(0)"]
                    + [f"{t:.2f}" for t in self.t_stat]),
        ]
        rows.append(f"avg log-likelihood: {self.avg_loglik:.6f}   "
                    f"converged: {self.converged}   iterations: {self.outer_iters}")
        return "\n".join(rows)

    def key_values(self):
        """Machine-readable key=value lines."""
        lines = []
        for j, b in enumerate(self.beta):
            lines.append(f"beta.{j}={float(b)!r}")
        for j, s in enumerate(self.std_err):
            lines.append(f"std_err.{j}={float(s)!r}")
        for j, t in enumerate(self.t_stat):
            lines.append(f"t_stat.{j}={float(t)!r}")
        lines.append(f"avg_loglik={float(self.avg_loglik)!r}")
        lines.append(f"n_obs={self.n_obs}")
        lines.append(f"converged={self.converged}")
        lines.append(f"outer_iters={self.outer_iters}")
        if self.failure:
            lines.append(f"failure={self.failure}")
        return "\n".join(lines) + "\n"


class ModelContext:
    """Per-dataset solver state shared across outer iterations.

    Holds the extended spaces (one per observation origin for the
    constrained models), per-observation attribute totals and start
    indices, and a small per-beta cache of inner solves. Infeasible
    observations are detected here, once, since feasibility depends only
    on costs and the bound.
    """

    def __init__(self, net, model, obs_set, mu, alpha=None, nested=None,
                 options=DEFAULT_OPTIONS):
        if model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if model in ("crl", "cnrl") and alpha is None:
            raise ValueError(f"model {model!r} requires alpha")
        if model == "cnrl" and nested is None:
            raise ValueError("model 'cnrl' requires a NestedSpec")
        self.net = net
        self.model = model
        self.mu = float(mu)
        self.nested = nested
        self.options = options
        self.obs_set = [tuple(int(s) for s in p) for p in obs_set]
        self.n_obs = len(self.obs_set)
        self.x_totals = np.zeros((self.n_obs, net.n_attrs))
        for i, p in enumerate(self.obs_set):
            self.x_totals[i] = net.path_attr_totals(p)
        self._cache = {}

        if model == "rl":
            self.start_state = np.array([p[0] for p in self.obs_set],
                                        dtype=np.int64)
            order = net.topological_order
            self.rev_topo = order[::-1].copy() if order is not None else None
            self.b = np.zeros(net.n_states)
            self.b[net.destination] = 1.0
        else:
            self.alpha = np.asarray(alpha, dtype=np.int64).reshape(-1)
            self.spaces = {}
            self.obs_origin = []
            self.obs_ext_edges = []
            bad = []
            for i, p in enumerate(self.obs_set):
                o = p[0]
                if o not in self.spaces:
                    self.spaces[o] = build_extended(net, o, self.alpha)
                xs = self.spaces[o]
                lifted = lift_path(xs, net, p)
                if lifted is None:
                    bad.append(i)
                    self.obs_ext_edges.append(None)
                else:
                    edges = []
                    for a, b in zip(lifted[:-1], lifted[1:]):
                        for e in range(xs.indptr[a], xs.indptr[a + 1]):
                            if xs.succ[e] == b:
                                edges.append(e)
                                break
                    self.obs_ext_edges.append(np.array(edges, dtype=np.int64))
                self.obs_origin.append(o)
            if bad:
                raise InfeasibleObservationError(bad)

    # -- inner solves -----------------------------------------------------

    def _key(self, beta):
        return np.asarray(beta, dtype=float).tobytes()

    def _solved(self, beta):
        key = self._key(beta)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        u = UtilitySpec(beta=beta, mu=self.mu)
        if self.model == "rl":
            w = np.exp((self.net.edge_attrs @ u.beta) / self.mu)
            z = solve_linear_z(self.net.indptr, self.net.edge_dst, w, self.b,
                               self.rev_topo, self.options)
            sol = {"u": u, "w": w, "z": z}
        elif self.model == "crl":
            sol = {"u": u, "z": {}, "w": {}}
            for o, xs in self.spaces.items():
                evt = solve_erl(xs, self.net, u, self.options)
                sol["z"][o] = evt
                sol["w"][o] = np.exp(
                    (self.net.edge_attrs @ u.beta)[xs.edge_of] / self.mu)
        else:
            sol = {"u": u, "probs": {}}
            for o, xs in self.spaces.items():
                nvt = solve_nested(xs, self.net, u, self.nested, self.options)
                sol["probs"][o] = erl_link_probs(xs, self.net, u, nvt)
        if len(self._cache) > 8:
            self._cache.clear()
        self._cache[key] = sol
        return sol

    def loglik(self, beta):
        """(total log-likelihood, per-observation vector) at ``beta``."""
        if self.n_obs == 0:
            return 0.0, np.zeros(0)
        sol = self._solved(beta)
        beta = np.asarray(beta, dtype=float)
        if self.model == "rl":
            z0 = sol["z"][self.start_state]
            per = self.x_totals @ beta / self.mu - np.log(z0)
        elif self.model == "crl":
            lnz0 = np.array([np.log(sol["z"][o].z[0]) for o in self.obs_origin])
            per = self.x_totals @ beta / self.mu - lnz0
        else:
            per = np.empty(self.n_obs)
            for i, o in enumerate(self.obs_origin):
                with np.errstate(divide="ignore"):
                    per[i] = np.log(sol["probs"][o][self.obs_ext_edges[i]]).sum()
        return float(per.sum()), per

    def gradient(self, beta, mode="analytic"):
        """Gradient of the total log-likelihood with respect to beta."""
        if self.n_obs == 0:
            return np.zeros(self.net.n_attrs)
        if mode == "finite-difference" or self.model == "cnrl":
            return self._fd_gradient(beta)
        sol = self._solved(beta)
        if self.model == "rl":
            dz = self._dz(self.net.indptr, self.net.edge_dst, sol["w"],
                          self.net.edge_attrs, sol["z"], self.rev_topo, self.b)
            ratio = dz[self.start_state] / sol["z"][self.start_state, None]
            return self.x_totals.sum(axis=0) / self.mu - ratio.sum(axis=0)
        grad = self.x_totals.sum(axis=0) / self.mu
        counts = {}
        for o in self.obs_origin:
            counts[o] = counts.get(o, 0) + 1
        for o, n_o in counts.items():
            xs = self.spaces[o]
            evt = sol["z"][o]
            dz = self._dz(xs.indptr, xs.succ, sol["w"][o],
                          self.net.edge_attrs[xs.edge_of], evt.z,
                          xs.rev_topo, self._b_ext(xs))
            grad -= n_o * dz[0] / evt.z[0]
        return grad

    @staticmethod
    def _b_ext(xs):
        b = np.zeros(xs.n_states)
        b[xs.is_dest] = 1.0
        return b

    def _dz(self, indptr, succ, w, attrs, z, rev_topo, b):
        xw = attrs * (w / self.mu)[:, None]
        if rev_topo is not None:
            return backend.dag_backward_grad(rev_topo, indptr, succ, w, xw, z)
        # cyclic: solve (I - M) dz = (dM/db_j) z column by column
        from scipy import sparse
        from scipy.sparse.linalg import splu

        n = z.shape[0]
        rows = np.repeat(np.arange(n), np.diff(indptr))
        m = sparse.csr_matrix((w, (rows, succ)), shape=(n, n))
        lu = splu((sparse.identity(n, format="csr") - m).tocsc())
        dz = np.empty((n, attrs.shape[1]))
        for p in range(attrs.shape[1]):
            rhs = np.zeros(n)
            np.add.at(rhs, rows, xw[:, p] * z[succ])
            dz[:, p] = lu.solve(rhs)
        return dz

    def _fd_gradient(self, beta, h=1e-5):
        beta = np.asarray(beta, dtype=float)
        grad = np.empty(beta.shape[0])
        for j in range(beta.shape[0]):
            bp = beta.copy()
            bp[j] += h
            bm = beta.copy()
            bm[j] -= h
            grad[j] = (self.loglik(bp)[0] - self.loglik(bm)[0]) / (2 * h)
        return grad


def loglik(net, model, beta, mu, obs_set, alpha=None, nested=None,
           options=DEFAULT_OPTIONS):
    """Total and per-observation log-likelihood of ``obs_set``.

    Raises InfeasibleObservationError (with the offending indices) if any
    observation has probability exactly zero under the constrained model,
    and propagates SolveFailure from the inner solver.
    """
    ctx = ModelContext(net, model, obs_set, mu, alpha=alpha, nested=nested,
                       options=options)
    return ctx.loglik(beta)


def loglik_gradient(net, model, beta, mu, obs_set, alpha=None, nested=None,
                    mode="analytic", options=DEFAULT_OPTIONS):
    """Gradient of the total log-likelihood with respect to beta."""
    ctx = ModelContext(net, model, obs_set, mu, alpha=alpha, nested=nested,
                       options=options)
    return ctx.gradient(beta, mode=mode)


def percent_improve(ll_crl, ll_rl):
    """Relative likelihood gain of the constrained model, in percent."""
    if ll_rl == 0:
        raise ValueError("reference log-likelihood is zero")
    return 100.0 * (ll_crl - ll_rl) / abs(ll_rl)


def estimate(net, obs_set, cfg):
    """Maximize the log-likelihood over beta; returns EstimationResult.

    BFGS ascent with Armijo backtracking from ``cfg.beta0`` (zeros by
    default). A SolveFailure at the starting point is a hard error (for
    the unconstrained model on cyclic networks the constrained model with
    positive costs is the remedy); SolveFailures at trial points during
    the line search are recorded and stepped around. Convergence is
    declared when the gradient infinity-norm of the average log-likelihood
    drops below ``cfg.tol_grad``.
    """
    if len(obs_set) == 0:
        raise ValueError("obs_set must be nonempty")
    ctx = ModelContext(net, cfg.model, obs_set, cfg.mu, alpha=cfg.alpha,
                       nested=cfg.nested, options=cfg.options)
    n = ctx.n_obs
    beta = (np.zeros(net.n_attrs) if cfg.beta0 is None
            else cfg.beta0.astype(float).copy())
    if beta.shape[0] != net.n_attrs:
        raise ValueError("beta0 length must equal the attribute arity")

    failures = []

    def f_and_g(b):
        ll = ctx.loglik(b)[0] / n
        g = ctx.gradient(b, mode=cfg.gradient_mode) / n
        return ll, g

    try:
        ll, g = f_and_g(beta)
    except SolveFailure as exc:
        raise SolveFailure(
            f"value solve failed at the starting coefficients ({exc}); "
            "on cyclic networks consider the constrained model with "
            "strictly positive costs") from exc

    p = beta.shape[0]
    h_inv = np.eye(p)
    converged = bool(np.abs(g).max() < cfg.tol_grad)
    iters = 0
    restarted = False
    c1 = 1e-4
    while not converged and iters < cfg.max_outer_iters:
        iters += 1
        d = h_inv @ g
        if d @ g <= 0:
            h_inv = np.eye(p)
            d = g.copy()
        step = 1.0
        accepted = False
        for _ in range(40):
            trial = beta + step * d
            try:
                ll_new = ctx.loglik(trial)[0] / n
            except SolveFailure as exc:
                failures.append(str(exc))
                step *= 0.5
                continue
            if np.isfinite(ll_new) and ll_new >= ll + c1 * step * (g @ d):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if restarted:
                break
            # restart with a scaled identity so the next step is modest
            h_inv = np.eye(p) / max(1.0, float(np.abs(g).max()))
            restarted = True
            continue
        restarted = False
        g_new = ctx.gradient(trial, mode=cfg.gradient_mode) / n
        s = trial - beta
        y = g - g_new  # gradient change of the negated objective
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            eye = np.eye(p)
            left = eye - rho * np.outer(s, y)
            h_inv = left @ h_inv @ left.T + rho * np.outer(s, s)
        beta, ll, g = trial, ll_new, g_new
        converged = bool(np.abs(g).max() < cfg.tol_grad)

    std_err, t_stat = _standard_errors(ctx, beta, cfg)
    return EstimationResult(
        beta=beta, std_err=std_err, t_stat=t_stat, avg_loglik=float(ll),
        converged=converged, outer_iters=iters, n_obs=n,
        failure=failures[-1] if failures else None)


def _standard_errors(ctx, beta, cfg):
    """Inverse negative numerical Hessian of the total log-likelihood."""
    p = beta.shape[0]
    hess = np.zeros((p, p))
    try:
        for j in range(p):
            h = 1e-4 * max(1.0, abs(beta[j]))
            bp = beta.copy()
            bp[j] += h
            bm = beta.copy()
            bm[j] -= h
            gp = ctx.gradient(bp, mode=cfg.gradient_mode)
            gm = ctx.gradient(bm, mode=cfg.gradient_mode)
            hess[:, j] = (gp - gm) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        cov = np.linalg.inv(-hess)
        diag = np.diag(cov)
        std_err = np.where(diag > 0, np.sqrt(np.abs(diag)), np.nan)
    except (SolveFailure, np.linalg.LinAlgError):
        std_err = np.full(p, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stat = beta / std_err
    return std_err, t_stat
