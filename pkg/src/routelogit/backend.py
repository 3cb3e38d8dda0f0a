"""Kernel backend selection.

The hot loops (backward induction, value iteration, trajectory sampling)
have a numba implementation and a pure-numpy fallback. The active backend
is chosen once at import time from the ``ROUTELOGIT_BACKEND`` environment
variable: ``numba`` (default) or ``numpy``. If numba is requested but not
importable, the numpy fallback is used silently.

``benchmarks/bench_backends.py`` compares the two.
"""
import os

_requested = os.environ.get("ROUTELOGIT_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(
        f"ROUTELOGIT_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numba":
    try:
        from . import _kernels_numba as _impl
    except ImportError:
        from . import _kernels_numpy as _impl
else:
    from . import _kernels_numpy as _impl

dag_backward = _impl.dag_backward
dag_backward_grad = _impl.dag_backward_grad
value_iteration = _impl.value_iteration
matvec_plus = _impl.matvec_plus
walk_batch = _impl.walk_batch


def active_backend():
    """Name of the kernel backend in use: 'numba' or 'numpy'."""
    return "numba" if _impl.HAVE_NUMBA else "numpy"


def warm_up():
    """Trigger JIT compilation of all kernels on tiny inputs.

    No-op on the numpy backend. Useful before timing-sensitive runs so
    compile time is not attributed to the first real call.
    """
    import numpy as np

    indptr = np.array([0, 1, 1], dtype=np.int64)
    succ = np.array([1], dtype=np.int64)
    w = np.array([0.5])
    b = np.array([0.0, 1.0])
    order = np.array([1, 0], dtype=np.int64)
    dag_backward(order, indptr, succ, w, b)
    dag_backward_grad(order, indptr, succ, w, np.array([[0.1]]), b)
    value_iteration(indptr, succ, w, b, 1e-10, 50, 1e30)
    matvec_plus(indptr, succ, w, b, b)
    walk_batch(
        indptr, succ, np.array([1.0]), np.array([0], dtype=np.int64),
        np.array([False, True]), np.full((1, 4), 0.5),
        np.zeros((1, 5), dtype=np.int64), np.zeros(1, dtype=np.int64),
        np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64),
    )
