"""Pure-numpy fallbacks for the hot kernels.

Selected with ``ROUTELOGIT_BACKEND=numpy``. Loops mirror the numba twins
step for step so both backends produce bit-identical output (the walk
kernel in particular must consume uniforms in the same order).
"""
import numpy as np

HAVE_NUMBA = False


def dag_backward(rev_order, indptr, succ, w, b):
    z = b.copy()
    for i in rev_order:
        lo, hi = indptr[i], indptr[i + 1]
        if hi > lo:
            z[i] = b[i] + w[lo:hi] @ z[succ[lo:hi]]
        else:
            z[i] = b[i]
    return z


def dag_backward_grad(rev_order, indptr, succ, w, xw, z):
    n = z.shape[0]
    dz = np.zeros((n, xw.shape[1]))
    for i in rev_order:
        lo, hi = indptr[i], indptr[i + 1]
        if hi > lo:
            js = succ[lo:hi]
            dz[i, :] = xw[lo:hi, :].T @ z[js] + w[lo:hi] @ dz[js, :]
    return dz


def value_iteration(indptr, succ, w, b, tol, max_iter, cap):
    from scipy import sparse

    n = b.shape[0]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    m = sparse.csr_matrix((w, (rows, succ)), shape=(n, n))
    z = b.copy()
    for it in range(max_iter):
        zn = m @ z + b
        mx = zn.max() if n else 0.0
        delta = np.abs(zn - z).max() if n else 0.0
        z = zn
        if mx > cap or not np.isfinite(mx):
            return z, 2, it + 1
        if delta <= tol * max(1.0, mx):
            return z, 0, it + 1
    return z, 1, max_iter


def matvec_plus(indptr, succ, w, z, b):
    out = b.copy()
    for i in range(b.shape[0]):
        lo, hi = indptr[i], indptr[i + 1]
        if hi > lo:
            out[i] = b[i] + w[lo:hi] @ z[succ[lo:hi]]
    return out


def walk_batch(indptr, succ, prob, starts, terminal, uniforms, out_nodes,
               out_len, out_used, status):
    n_obs, chunk = uniforms.shape
    for i in range(n_obs):
        cur = int(starts[i])
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
            lo, hi = indptr[cur], indptr[cur + 1]
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
                for e in range(hi - 1, lo - 1, -1):
                    if prob[e] > 0.0:
                        nxt = succ[e]
                        break
            cur = int(nxt)
            out_nodes[i, length] = cur
            length += 1
        out_len[i] = length
        out_used[i] = used
        status[i] = st
