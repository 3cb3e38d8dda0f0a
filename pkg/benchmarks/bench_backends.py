#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the three hot paths on a mid-size problem: backward induction and
the gradient pass over an extended state space, value iteration on the
cyclic grid, and batched trajectory sampling.

    python3 benchmarks/bench_backends.py [--nodes 50] [--threshold 0.9]
                                         [--walks 20000] [--repeat 5]

JIT compilation is excluded by a warm-up call per kernel.
"""
import argparse
import time

import numpy as np

from routelogit import _kernels_numpy, datasets
from routelogit.crl import build_extended, erl_link_probs, solve_erl
from routelogit.network import generate_geometric_dag, threshold_from_percent
from routelogit.rl import UtilitySpec, edge_utilities

try:
    from routelogit import _kernels_numba
except ImportError:
    _kernels_numba = None


def build_cases(n_nodes, threshold, n_walks):
    net = generate_geometric_dag(n_nodes, seed=1)
    u = UtilitySpec(beta=[-4.0, -0.1, -0.05, -0.3])
    alpha = [threshold_from_percent(net, threshold)]
    xs = build_extended(net, 0, alpha)
    w = np.exp(edge_utilities(net, u)[xs.edge_of])
    b = np.zeros(xs.n_states)
    b[xs.is_dest] = 1.0
    rev = xs.rev_topo
    xw = net.edge_attrs[xs.edge_of] * w[:, None]

    grid = datasets.grid_recharge()
    ug = UtilitySpec(beta=[-2.0])
    gx = build_extended(grid, 0, [7])
    gw = np.exp(edge_utilities(grid, ug)[gx.edge_of])
    gb = np.zeros(gx.n_states)
    gb[gx.is_dest] = 1.0

    evt = solve_erl(xs, net, u)
    probs = erl_link_probs(xs, net, u, evt)
    terminal = xs.is_dest.copy()
    rng = np.random.default_rng(0)
    uniforms = rng.random((n_walks, 64))
    starts = np.zeros(n_walks, dtype=np.int64)

    def case_backward(impl):
        impl.dag_backward(rev, xs.indptr, xs.succ, w, b)

    def case_gradient(impl):
        z = impl.dag_backward(rev, xs.indptr, xs.succ, w, b)
        impl.dag_backward_grad(rev, xs.indptr, xs.succ, w, xw, z)

    def case_value_iteration(impl):
        impl.value_iteration(gx.indptr, gx.succ, gw, gb, 1e-10, 10_000, 1e30)

    def case_walks(impl):
        nodes = np.zeros((n_walks, 65), dtype=np.int64)
        length = np.zeros(n_walks, dtype=np.int64)
        used = np.zeros(n_walks, dtype=np.int64)
        status = np.zeros(n_walks, dtype=np.int64)
        impl.walk_batch(xs.indptr, xs.succ, probs, starts, terminal,
                        uniforms, nodes, length, used, status)

    label = (f"extended space: {xs.n_states} states / {xs.n_edges} edges, "
             f"{n_walks} walks")
    return label, [
        ("dag_backward", case_backward),
        ("dag_backward_grad", case_gradient),
        ("value_iteration(grid)", case_value_iteration),
        ("walk_batch", case_walks),
    ]


def best_of(case, impl, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        case(impl)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=50)
    ap.add_argument("--threshold", type=float, default=0.9)
    ap.add_argument("--walks", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    label, cases = build_cases(args.nodes, args.threshold, args.walks)
    print(label)
    impls = [("numpy", _kernels_numpy)]
    if _kernels_numba is not None:
        impls.append(("numba", _kernels_numba))
    else:
        print("numba unavailable; timing the fallback only")

    print(f"{'kernel':<24}" + "".join(f"{name:>12}" for name, _ in impls)
          + ("     speedup" if len(impls) == 2 else ""))
    for kernel_name, case in cases:
        times = []
        for _, impl in impls:
            case(impl)  # warm-up (and JIT for numba)
            times.append(best_of(case, impl, args.repeat))
        row = f"{kernel_name:<24}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2 and times[1] > 0:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
