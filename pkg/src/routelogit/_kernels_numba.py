"""Numba implementations of the hot inner loops.

All kernels operate on CSR-style successor arrays: ``indptr[i]:indptr[i+1]``
slices ``succ``/``w`` for state ``i``. The pure-numpy twin of this module is
``_kernels_numpy``; both must produce bit-identical results because the walk
kernel's draws feed deterministic simulation streams.
"""
import numpy as np
from numba import njit

HAVE_NUMBA = True


@njit(cache=True)
def dag_backward(rev_order, indptr, succ, w, b):
    # rev_order lists every state, successors before predecessors
    z = b.copy()
    for k in range(rev_order.shape[0]):
        i = rev_order[k]
        acc = b[i]
        for e in range(indptr[i], indptr[i + 1]):
            acc += w[e] * z[succ[e]]
        z[i] = acc
    return z


@njit(cache=True)
def dag_backward_grad(rev_order, indptr, succ, w, xw, z):
    # xw[e, p] holds d w[e] / d beta_p; returns dz with shape (n, P)
    n = z.shape[0]
    n_par = xw.shape[1]
    dz = np.zeros((n, n_par))
    for k in range(rev_order.shape[0]):
        i = rev_order[k]
        for e in range(indptr[i], indptr[i + 1]):
            j = succ[e]
            for p in range(n_par):
                dz[i, p] += xw[e, p] * z[j] + w[e] * dz[j, p]
    return dz


@njit(cache=True)
def value_iteration(indptr, succ, w, b, tol, max_iter, cap):
    """Iterate z <- Mz + b from z = b. Returns (z, status, iters).

    status: 0 converged, 1 iteration cap reached, 2 diverged past ``cap``.
    """
    n = b.shape[0]
    z = b.copy()
    zn = np.empty(n)
    for it in range(max_iter):
        delta = 0.0
        mx = 0.0
        for i in range(n):
            acc = b[i]
            for e in range(indptr[i], indptr[i + 1]):
                acc += w[e] * z[succ[e]]
            zn[i] = acc
            d = acc - z[i]
            if d < 0.0:
                d = -d
            if d > delta:
                delta = d
            if acc > mx:
                mx = acc
        for i in range(n):
            z[i] = zn[i]
        if mx > cap or not np.isfinite(mx):
            return z, 2, it + 1
        scale = mx if mx > 1.0 else 1.0
        if delta <= tol * scale:
            return z, 0, it + 1
    return z, 1, max_iter


@njit(cache=True)
def matvec_plus(indptr, succ, w, z, b):
    # returns Mz + b; used for residual checks
    n = b.shape[0]
    out = np.empty(n)
    for i in range(n):
        acc = b[i]
        for e in range(indptr[i], indptr[i + 1]):
            acc += w[e] * z[succ[e]]
        out[i] = acc
    return out


@njit(cache=True)
def walk_batch(indptr, succ, prob, starts, terminal, uniforms, out_nodes,
               out_len, out_used, status):
    """Sample one trajectory per row of ``uniforms`` by inverse-CDF draws.

    Rows are walked independently; row i starts at ``starts[i]`` and stops on
    a terminal state. status: 0 reached terminal, 2 ran out of uniforms,
    3 stuck at a state with no positive-probability successor.
    """
    n_obs = uniforms.shape[0]
    chunk = uniforms.shape[1]
    for i in range(n_obs):
        cur = starts[i]
        out_nodes[i, 0] = cur
        length = 1
        used = 0
        st = 2
        while True:
            if terminal[cur]:
                st = 0
                break
            if used >= chunk:
                st = 2
                break
            lo = indptr[cur]
            hi = indptr[cur + 1]
            total = 0.0
            for e in range(lo, hi):
                total += prob[e]
            if total <= 0.0:
                st = 3
                break
            u = uniforms[i, used]
            used += 1
            c = 0.0
            nxt = -1
            for e in range(lo, hi):
                c += prob[e]
                if u < c:
                    nxt = succ[e]
                    break
            if nxt < 0:
                # rounding left u >= total: take the last positive-prob successor
                for e in range(hi - 1, lo - 1, -1):
                    if prob[e] > 0.0:
                        nxt = succ[e]
                        break
            cur = nxt
            out_nodes[i, length] = cur
            length += 1
        out_len[i] = length
        out_used[i] = used
        status[i] = st
