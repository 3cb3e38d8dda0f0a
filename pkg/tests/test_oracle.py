import numpy as np
import pytest

from routelogit.errors import PathOverflowError
from routelogit.network import Network, generate_geometric_dag
from routelogit.oracle import (enumerate_paths, mnl_over, restrict_stepwise,
                               restrict_total)
from routelogit.rl import UtilitySpec

from util import dp_path_count, prefix_feasible, random_dag_net, softmax_oracle


def test_toy_enumeration(toy_deadline, u_minus2):
    ps = enumerate_paths(toy_deadline, 0, u_minus2)
    assert sorted(ps.paths) == sorted([
        (0, 1), (0, 2, 4, 1), (0, 2, 3, 4, 1), (0, 2, 3, 5, 1)])
    # utilities are -2 * total time
    for p, v in zip(ps.paths, ps.utilities):
        assert v == pytest.approx(-2 * toy_deadline.path_attr_totals(p)[0])


def test_single_edge_enumeration():
    net = Network(2, 1, [(0, 1, [1.0], [1])], ["tt"], 1)
    ps = enumerate_paths(net, 0, UtilitySpec(beta=[-1.0]))
    assert ps.paths == ((0, 1),)
    assert mnl_over(ps, 1.0) == pytest.approx([1.0])


def test_path_count_matches_dp_oracle():
    for seed in range(6):
        net = generate_geometric_dag(12, seed=seed)
        ps = enumerate_paths(net, 0, UtilitySpec(beta=[-1, 0, 0, 0]),
                             max_paths=1_000_000)
        pairs = list(zip(net.edge_src.tolist(), net.edge_dst.tolist()))
        assert len(ps) == dp_path_count(net.n_states, pairs, 0, net.destination)


def test_max_paths_overflow_is_loud(toy_deadline, u_minus2):
    with pytest.raises(PathOverflowError):
        enumerate_paths(toy_deadline, 0, u_minus2, max_paths=3)


def test_cyclic_enumeration_requires_hop_limit():
    net = Network(3, 2, [(0, 1, [1.0], [1]), (1, 0, [1.0], [1]),
                         (0, 2, [1.0], [1])], ["tt"], 1)
    with pytest.raises(ValueError, match="hop_limit"):
        enumerate_paths(net, 0, UtilitySpec(beta=[-1.0]))
    ps = enumerate_paths(net, 0, UtilitySpec(beta=[-1.0]), hop_limit=5)
    assert (0, 2) in ps.paths
    assert (0, 1, 0, 2) in ps.paths


def test_restrict_total_table_case(toy_deadline, u_minus2):
    ps = enumerate_paths(toy_deadline, 0, u_minus2)
    kept = restrict_total(ps, [5])  # 2.5 h
    assert sorted(kept.paths) == sorted([(0, 2, 4, 1), (0, 2, 3, 4, 1)])
    # generous and impossible bounds
    assert len(restrict_total(ps, [100])) == len(ps)
    assert len(restrict_total(ps, [1])) == 0


def test_restrict_total_rejects_negative_costs():
    net = Network(3, 2, [(0, 1, [1.0], [-1]), (1, 2, [1.0], [2])], ["tt"], 1)
    ps = enumerate_paths(net, 0, UtilitySpec(beta=[-1.0]))
    with pytest.raises(ValueError, match="restrict_stepwise"):
        restrict_total(ps, [5])


def test_restrict_stepwise_equals_total_when_costs_nonnegative():
    rng = np.random.default_rng(11)
    for _ in range(10):
        net = random_dag_net(rng, n_states=9, cost_lo=0, cost_hi=4)
        ps = enumerate_paths(net, 0, UtilitySpec(beta=[-1.0, 0.5]))
        alpha = [int(rng.integers(0, 15))]
        a = restrict_total(ps, alpha)
        b = restrict_stepwise(ps, alpha)
        assert a.paths == b.paths
        np.testing.assert_array_equal(a.utilities, b.utilities)


def test_restrict_stepwise_catches_interior_violation():
    # +5, -3, +1 with bound 4: the total is 3 but the first prefix is 5
    net = Network(4, 3, [(0, 1, [1.0], [5]), (1, 2, [1.0], [-3]),
                         (2, 3, [1.0], [1])], ["tt"], 1)
    ps = enumerate_paths(net, 0, UtilitySpec(beta=[-1.0]))
    kept = restrict_stepwise(ps, [4])
    assert len(kept) == 0


def test_restrict_stepwise_energy_toy(toy_recharge, u_minus2):
    ps = enumerate_paths(toy_recharge, 0, u_minus2)
    kept = restrict_stepwise(ps, [6])  # 3 h budget
    assert kept.paths == ((0, 2, 3, 4, 5, 6, 1),)


def test_restrict_stepwise_matches_independent_walk():
    rng = np.random.default_rng(5)
    for _ in range(20):
        k = int(rng.integers(1, 3))
        net = random_dag_net(rng, n_states=8, k=k, with_resets=True)
        ps = enumerate_paths(net, 0, UtilitySpec(beta=[-1.0, 0.5]))
        alpha = rng.integers(0, 9, size=k).tolist()
        cost_of = {(int(a), int(b)): tuple(net.edge_costs[e])
                   for e, (a, b) in enumerate(zip(net.edge_src, net.edge_dst))}
        resets = {s: {d for d in range(k) if net.reset_flags[s, d]}
                  for s in range(net.n_states)}
        expected = tuple(p for p in ps.paths
                         if prefix_feasible(p, cost_of, resets, alpha))
        assert restrict_stepwise(ps, alpha).paths == expected


def test_mnl_over_table_values(toy_deadline, u_minus2):
    ps = enumerate_paths(toy_deadline, 0, u_minus2)
    probs = dict(zip(ps.paths, mnl_over(ps, 1.0)))
    assert probs[(0, 1)] == pytest.approx(0.083, abs=1e-3)
    assert probs[(0, 2, 4, 1)] == pytest.approx(0.610, abs=1e-3)
    assert probs[(0, 2, 3, 4, 1)] == pytest.approx(0.224, abs=1e-3)
    assert probs[(0, 2, 3, 5, 1)] == pytest.approx(0.083, abs=1e-3)
    kept = restrict_total(ps, [5])
    rprobs = dict(zip(kept.paths, mnl_over(kept, 1.0)))
    assert rprobs[(0, 2, 4, 1)] == pytest.approx(0.731, abs=1e-3)
    assert rprobs[(0, 2, 3, 4, 1)] == pytest.approx(0.269, abs=1e-3)


def test_mnl_over_empty_set_errors(toy_deadline, u_minus2):
    ps = enumerate_paths(toy_deadline, 0, u_minus2)
    with pytest.raises(ValueError, match="feasible"):
        mnl_over(restrict_total(ps, [1]), 1.0)


def test_mnl_sums_to_one_and_positive():
    rng = np.random.default_rng(3)
    for _ in range(20):
        net = random_dag_net(rng, n_states=9)
        beta = rng.normal(0, 3, size=2)
        ps = enumerate_paths(net, 0, UtilitySpec(beta=beta))
        probs = mnl_over(ps, float(rng.uniform(0.3, 2.0)))
        assert abs(probs.sum() - 1.0) < 1e-12
        assert np.all(probs > 0)


def test_mnl_shift_invariance(toy_deadline, u_minus2):
    import dataclasses

    ps = enumerate_paths(toy_deadline, 0, u_minus2)
    shifted = dataclasses.replace(ps, utilities=ps.utilities + 123.456)
    np.testing.assert_allclose(mnl_over(ps, 1.0), mnl_over(shifted, 1.0),
                               atol=1e-12)


def test_mnl_overflow_guard_large_utilities():
    net = Network(3, 2, [(0, 1, [1.0], [1]), (1, 2, [1.0], [1]),
                         (0, 2, [2.0], [1])], ["tt"], 1)
    ps = enumerate_paths(net, 0, UtilitySpec(beta=[500.0]))
    probs = mnl_over(ps, 1.0)
    assert np.all(np.isfinite(probs))
    assert abs(probs.sum() - 1.0) < 1e-12


def test_mnl_matches_independent_softmax():
    rng = np.random.default_rng(9)
    net = random_dag_net(rng, n_states=10)
    ps = enumerate_paths(net, 0, UtilitySpec(beta=[-2.0, 1.0]))
    np.testing.assert_allclose(mnl_over(ps, 0.7),
                               softmax_oracle(ps.utilities, 0.7), rtol=1e-12)


def test_loglik_dominance_over_subsets(toy_deadline, u_minus2):
    # restricting the set can only raise the probability of surviving paths
    ps = enumerate_paths(toy_deadline, 0, u_minus2)
    full = dict(zip(ps.paths, mnl_over(ps, 1.0)))
    kept = restrict_total(ps, [5])
    sub = dict(zip(kept.paths, mnl_over(kept, 1.0)))
    for p, pr in sub.items():
        assert np.log(pr) >= np.log(full[p])
        assert np.log(pr) > np.log(full[p])  # strict: two paths were removed
