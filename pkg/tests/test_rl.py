import numpy as np
import pytest

from routelogit.errors import SolveFailure
from routelogit.network import Network
from routelogit.oracle import enumerate_paths
from routelogit.rl import (SolveOptions, UtilitySpec, link_probs, path_prob_rl,
                           solve_rl)

from util import random_dag_net


def test_toy_origin_value_matches_path_sum(toy_deadline, u_minus2):
    # z at the origin must equal the sum of exp(path utility) over all paths
    vt = solve_rl(toy_deadline, u_minus2)
    expected = np.exp(-6) + np.exp(-4) + np.exp(-5) + np.exp(-6)
    assert vt.z[0] == pytest.approx(expected, rel=1e-12)
    assert vt.z[0] == pytest.approx(0.0300111, abs=1e-6)


def test_destination_boundary(toy_deadline, u_minus2):
    vt = solve_rl(toy_deadline, u_minus2)
    assert vt.z[toy_deadline.destination] == pytest.approx(1.0, rel=1e-12)
    assert vt.v_values[toy_deadline.destination] == pytest.approx(0.0, abs=1e-12)


def test_unreachable_state_gets_zero_value():
    # state 1 is a dead end: no route to the destination
    net = Network(4, 3, [(0, 1, [1.0], [1]), (0, 2, [1.0], [1]),
                         (2, 3, [1.0], [1])], ["tt"], 1)
    vt = solve_rl(net, UtilitySpec(beta=[-1.0]))
    assert vt.z[1] == 0.0
    assert vt.v_values[1] == -np.inf
    assert vt.z[0] > 0


def test_cyclic_zero_utility_fails():
    # two states feeding each other with v = 0: the fixed point diverges
    net = Network(3, 2, [(0, 1, [0.0], [1]), (1, 0, [0.0], [1]),
                         (1, 2, [0.0], [1])], ["tt"], 1)
    with pytest.raises(SolveFailure):
        solve_rl(net, UtilitySpec(beta=[1.0]))


def test_cyclic_with_small_utilities_solves():
    net = Network(3, 2, [(0, 1, [1.0], [1]), (1, 0, [1.0], [1]),
                         (1, 2, [1.0], [1])], ["tt"], 1)
    vt = solve_rl(net, UtilitySpec(beta=[-2.0]))
    # z(1) = e^-2 z(0) + e^-2; z(0) = e^-2 z(1)
    e2 = np.exp(-2)
    assert vt.z[0] == pytest.approx(e2 * e2 / (1 - e2 * e2), rel=1e-10)


def test_link_probs_toy_node_values(toy_deadline, u_minus2):
    vt = solve_rl(toy_deadline, u_minus2)
    probs = link_probs(toy_deadline, u_minus2, vt)
    p_direct = probs[toy_deadline.edge_index(0, 1)]
    p_detour = probs[toy_deadline.edge_index(0, 2)]
    assert p_direct == pytest.approx(0.083, abs=1e-3)
    assert p_detour == pytest.approx(0.610 + 0.224 + 0.083, abs=1e-3)


def test_link_probs_single_successor_state(toy_deadline, u_minus2):
    vt = solve_rl(toy_deadline, u_minus2)
    probs = link_probs(toy_deadline, u_minus2, vt)
    assert probs[toy_deadline.edge_index(5, 1)] == pytest.approx(1.0, rel=1e-12)


def test_link_prob_rows_sum_to_one():
    rng = np.random.default_rng(0)
    net = random_dag_net(rng, n_states=10)
    u = UtilitySpec(beta=[-1.0, 0.3])
    vt = solve_rl(net, u)
    probs = link_probs(net, u, vt)
    for s in range(net.n_states):
        row = probs[net.indptr[s]:net.indptr[s + 1]]
        if vt.z[s] > 0 and s != net.destination and len(row):
            assert row.sum() == pytest.approx(1.0, abs=1e-12)


def test_downstream_mass_ratios_match_enumeration(toy_deadline, u_minus2):
    # at the fork after the first move, the two branches split in
    # proportion to their downstream path weight
    ps = enumerate_paths(toy_deadline, 0, u_minus2)
    w = {p: np.exp(v) for p, v in zip(ps.paths, ps.utilities)}
    via_34 = w[(0, 2, 3, 4, 1)] + w[(0, 2, 3, 5, 1)]
    via_4 = w[(0, 2, 4, 1)]
    vt = solve_rl(toy_deadline, u_minus2)
    probs = link_probs(toy_deadline, u_minus2, vt)
    ratio = probs[toy_deadline.edge_index(2, 3)] / probs[toy_deadline.edge_index(2, 4)]
    assert ratio == pytest.approx(via_34 / via_4, rel=1e-10)


def test_path_prob_table_values(toy_deadline, u_minus2):
    vt = solve_rl(toy_deadline, u_minus2)
    assert path_prob_rl(toy_deadline, u_minus2, vt, (0, 2, 4, 1)) == \
        pytest.approx(0.610, abs=1e-3)
    total = sum(path_prob_rl(toy_deadline, u_minus2, vt, p)
                for p in [(0, 1), (0, 2, 4, 1), (0, 2, 3, 4, 1), (0, 2, 3, 5, 1)])
    assert total == pytest.approx(1.0, abs=1e-9)


def test_path_prob_single_path_network():
    net = Network(3, 2, [(0, 1, [1.0], [1]), (1, 2, [1.0], [1])], ["tt"], 1)
    u = UtilitySpec(beta=[-3.0])
    vt = solve_rl(net, u)
    assert path_prob_rl(net, u, vt, (0, 1, 2)) == pytest.approx(1.0, rel=1e-12)


def test_path_prob_rejects_non_edge(toy_deadline, u_minus2):
    vt = solve_rl(toy_deadline, u_minus2)
    with pytest.raises(ValueError, match="not an edge"):
        path_prob_rl(toy_deadline, u_minus2, vt, (0, 3, 1))


def test_product_form_equals_closed_form():
    rng = np.random.default_rng(21)
    for _ in range(5):
        net = random_dag_net(rng, n_states=9)
        u = UtilitySpec(beta=rng.normal(-1, 1, size=2), mu=float(rng.uniform(0.5, 2)))
        vt = solve_rl(net, u)
        ps = enumerate_paths(net, 0, u)
        for p, v in zip(ps.paths, ps.utilities):
            prod = path_prob_rl(net, u, vt, p)
            closed = np.exp((v - vt.v_values[0]) / u.mu)
            assert prod == pytest.approx(closed, rel=1e-10)


def test_origin_value_is_path_sum_identity():
    rng = np.random.default_rng(33)
    for _ in range(8):
        net = random_dag_net(rng, n_states=int(rng.integers(5, 13)))
        u = UtilitySpec(beta=rng.normal(0, 2, size=2), mu=1.0)
        vt = solve_rl(net, u)
        ps = enumerate_paths(net, 0, u)
        assert vt.z[0] == pytest.approx(np.exp(ps.utilities).sum(), rel=1e-10)


def test_residual_soundness_on_success():
    rng = np.random.default_rng(4)
    from routelogit import backend

    for _ in range(5):
        net = random_dag_net(rng, n_states=12)
        u = UtilitySpec(beta=rng.normal(0, 1.5, size=2))
        vt = solve_rl(net, u)
        w = np.exp((net.edge_attrs @ u.beta) / u.mu)
        b = np.zeros(net.n_states)
        b[net.destination] = 1.0
        resid = np.abs(vt.z - backend.matvec_plus(
            net.indptr, net.edge_dst, w, vt.z, b)).max()
        assert resid <= 1e-8 * max(1.0, np.abs(vt.z).max())


def test_value_iteration_path_agrees_with_direct(grid_recharge):
    # the grid base graph is cyclic, so the cutoff genuinely switches solvers
    u = UtilitySpec(beta=[-2.0])
    direct = solve_rl(grid_recharge, u)
    forced_vi = solve_rl(grid_recharge, u, SolveOptions(direct_cutoff=0))
    # value iteration stops on an absolute criterion, so allow absolute slack
    np.testing.assert_allclose(forced_vi.z, direct.z, rtol=1e-4, atol=1e-9)


def test_value_iteration_divergence_detected():
    net = Network(3, 2, [(0, 1, [0.0], [1]), (1, 0, [0.0], [1]),
                         (1, 2, [0.0], [1])], ["tt"], 1)
    with pytest.raises(SolveFailure):
        solve_rl(net, UtilitySpec(beta=[1.0]), SolveOptions(direct_cutoff=0))
