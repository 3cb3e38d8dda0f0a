"""The numba kernels and their numpy twins must agree.

The walk kernel must agree exactly (it drives seeded simulation streams);
the solvers to tight tolerances.
"""
import numpy as np
import pytest

from routelogit import _kernels_numpy, backend
from routelogit.network import generate_geometric_dag
from routelogit.rl import UtilitySpec, edge_utilities

try:
    from routelogit import _kernels_numba
    HAVE_NUMBA = True
except ImportError:
    _kernels_numba = None
    HAVE_NUMBA = False

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")


def _random_dag_system(seed, n_nodes=30):
    net = generate_geometric_dag(n_nodes, seed=seed)
    u = UtilitySpec(beta=[-4.0, -0.1, -0.05, -0.3])
    w = np.exp(edge_utilities(net, u))
    b = np.zeros(net.n_states)
    b[net.destination] = 1.0
    rev = net.topological_order[::-1].copy()
    return net, w, b, rev


@needs_numba
def test_dag_backward_agrees():
    for seed in (0, 1, 2):
        net, w, b, rev = _random_dag_system(seed)
        a = _kernels_numba.dag_backward(rev, net.indptr, net.edge_dst, w, b)
        c = _kernels_numpy.dag_backward(rev, net.indptr, net.edge_dst, w, b)
        np.testing.assert_allclose(a, c, rtol=1e-13)


@needs_numba
def test_dag_backward_grad_agrees():
    net, w, b, rev = _random_dag_system(5)
    z = _kernels_numba.dag_backward(rev, net.indptr, net.edge_dst, w, b)
    xw = net.edge_attrs * w[:, None]
    a = _kernels_numba.dag_backward_grad(rev, net.indptr, net.edge_dst, w, xw, z)
    c = _kernels_numpy.dag_backward_grad(rev, net.indptr, net.edge_dst, w, xw, z)
    np.testing.assert_allclose(a, c, rtol=1e-12, atol=1e-300)


@needs_numba
def test_value_iteration_agrees():
    net, w, b, _ = _random_dag_system(7)
    a, sa, ia = _kernels_numba.value_iteration(net.indptr, net.edge_dst, w, b,
                                               1e-12, 5000, 1e30)
    c, sc, ic = _kernels_numpy.value_iteration(net.indptr, net.edge_dst, w, b,
                                               1e-12, 5000, 1e30)
    assert sa == sc == 0
    assert ia == ic
    np.testing.assert_allclose(a, c, rtol=1e-12, atol=1e-300)


@needs_numba
def test_walk_batch_bitwise_identical():
    net, w, b, rev = _random_dag_system(9)
    z = _kernels_numba.dag_backward(rev, net.indptr, net.edge_dst, w, b)
    probs = np.zeros(net.n_edges)
    ok = z[net.edge_src] > 0
    probs[ok] = w[ok] * z[net.edge_dst[ok]] / z[net.edge_src[ok]]
    terminal = np.zeros(net.n_states, dtype=bool)
    terminal[net.destination] = True

    rng = np.random.default_rng(0)
    n, chunk = 200, 40
    uniforms = rng.random((n, chunk))
    starts = np.zeros(n, dtype=np.int64)
    results = []
    for impl in (_kernels_numba, _kernels_numpy):
        nodes = np.zeros((n, chunk + 1), dtype=np.int64)
        length = np.zeros(n, dtype=np.int64)
        used = np.zeros(n, dtype=np.int64)
        status = np.zeros(n, dtype=np.int64)
        impl.walk_batch(net.indptr, net.edge_dst, probs, starts, terminal,
                        uniforms, nodes, length, used, status)
        results.append((nodes.copy(), length.copy(), used.copy(), status.copy()))
    for a, c in zip(*results):
        np.testing.assert_array_equal(a, c)


def test_selected_backend_reported():
    assert backend.active_backend() in ("numba", "numpy")


def test_numpy_backend_env_flag(tmp_path):
    import subprocess
    import sys

    code = ("import routelogit.backend as b; print(b.active_backend())")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"PATH": "/usr/bin:/bin",
                              "ROUTELOGIT_BACKEND": "numpy"},
                         capture_output=True, text=True, cwd="/")
    assert out.stdout.strip() == "numpy"


def test_simulation_identical_across_backends(tmp_path):
    import subprocess
    import sys

    code = """
import os
from routelogit import datasets
from routelogit.rl import UtilitySpec
from routelogit.simulation import SimConfig, simulate
net = datasets.toy_recharge()
obs = simulate(net, UtilitySpec(beta=[-2.0]), [8],
               SimConfig(model="crl", n_obs=200, seed=77))
print(hash(tuple(obs)))
"""
    outs = []
    for backend_name in ("numba", "numpy"):
        out = subprocess.run(
            [sys.executable, "-c", code],
            env={"PATH": "/usr/bin:/bin", "PYTHONHASHSEED": "0",
                 "ROUTELOGIT_BACKEND": backend_name},
            capture_output=True, text=True, cwd="/")
        assert out.returncode == 0, out.stderr
        outs.append(out.stdout.strip())
    assert outs[0] == outs[1]
