"""Command-line interface.

Subcommands: paths, solve, probs, crl {solve,probs,pathprob}, simulate,
estimate, repro {toy,sweep,recharge,stability}, export dot. Run
``routelogit <command> -h`` for options. Alphas are integer cost quanta;
coefficient vectors are comma-separated (e.g. ``--beta=-2`` or
``--beta=-4,-0.1,-0.05,-0.3``).
"""
import argparse
import sys

import numpy as np

from . import datasets, experiments
from .crl import build_extended, erl_link_probs, path_prob_crl, solve_erl
from .errors import RouteLogitError
from .estimation import EstimationConfig, estimate
from .network import (load_network, load_observations, save_observations)
from .oracle import enumerate_paths, mnl_over, restrict_stepwise
from .rl import UtilitySpec, link_probs, solve_rl
from .simulation import SimConfig, simulate

ASSETS = {
    "toy-deadline": datasets.toy_deadline,
    "toy-recharge": datasets.toy_recharge,
    "grid-recharge": datasets.grid_recharge,
    "sioux-falls": datasets.sioux_falls,
}


def _net(arg):
    if arg in ASSETS:
        return ASSETS[arg]()
    return load_network(arg)


def _floats(text):
    return [float(x) for x in text.split(",")]


def _ints(text):
    return [int(x) for x in text.split(",")]


def _utility(args):
    return UtilitySpec(beta=_floats(args.beta), mu=args.mu)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _add_net(p):
    p.add_argument("network",
                   help="network file, or one of: " + ", ".join(ASSETS))


def _add_utility(p):
    p.add_argument("--beta", required=True, help="comma-separated coefficients")
    p.add_argument("--mu", type=float, default=1.0)


def build_parser():
    top = argparse.ArgumentParser(prog="routelogit", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paths", help="enumerate origin-destination paths")
    _add_net(p)
    _add_utility(p)
    p.add_argument("--origin", type=int, default=0)
    p.add_argument("--max-paths", type=int, default=100_000)
    p.add_argument("--hop-limit", type=int, default=None)
    p.add_argument("--alpha", type=_ints, default=None,
                   help="restrict stepwise to this quanta bound")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("solve", help="value table of the unconstrained model")
    _add_net(p)
    _add_utility(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("probs", help="edge choice probabilities (unconstrained)")
    _add_net(p)
    _add_utility(p)
    p.set_defaults(func=cmd_probs)

    crl = sub.add_parser("crl", help="constrained model").add_subparsers(
        dest="crl_command", required=True)
    for name, fn in (("solve", cmd_crl_solve), ("probs", cmd_crl_probs),
                     ("pathprob", cmd_crl_pathprob)):
        p = crl.add_parser(name)
        _add_net(p)
        _add_utility(p)
        p.add_argument("--alpha", type=_ints, required=True,
                       help="comma-separated quanta bounds, one per dimension")
        p.add_argument("--origin", type=int, default=0)
        if name == "pathprob":
            p.add_argument("--path", required=True,
                           help="space- or comma-separated state ids")
        p.set_defaults(func=fn)

    p = sub.add_parser("simulate", help="draw observations from a model")
    _add_net(p)
    _add_utility(p)
    p.add_argument("--model", choices=("rl", "crl", "cnrl"), default="crl")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=_ints, default=None)
    p.add_argument("--origin", type=int, default=0)
    p.add_argument("--rejection", action="store_true",
                   help="unconstrained draws filtered to the feasible support")
    p.add_argument("--nest-mu", default=None,
                   help="state:mu overrides for the nested model, e.g. 2:0.5,7:0.8")
    p.add_argument("--out", default=None, help="observation file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="maximum-likelihood estimation")
    _add_net(p)
    p.add_argument("observations", help="observation file")
    p.add_argument("--model", choices=("rl", "crl", "cnrl"), default="rl")
    p.add_argument("--alpha", type=_ints, default=None)
    p.add_argument("--beta0", type=_floats, default=None)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--nest-mu", default=None,
                   help="state:mu overrides for the nested model")
    p.add_argument("--tol-grad", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--out", default=None, help="write key=value results here")
    p.set_defaults(func=cmd_estimate)

    repro = sub.add_parser("repro", help="scripted studies").add_subparsers(
        dest="repro_command", required=True)
    p = repro.add_parser("toy")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_repro_toy)
    p = repro.add_parser("sweep")
    p.add_argument("--sizes", type=_ints, default=[20, 30, 40, 50])
    p.add_argument("--graphs", type=int, default=5)
    p.add_argument("--thresholds", type=_floats,
                   default=[0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--n-in", type=int, default=3000)
    p.add_argument("--n-out", type=int, default=1000)
    p.add_argument("--generator", choices=("rl", "crl"), default="crl")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_repro_sweep)
    p = repro.add_parser("recharge")
    p.add_argument("--sizes", type=_ints, default=[20, 30, 40, 50])
    p.add_argument("--graphs", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--n-in", type=int, default=3000)
    p.add_argument("--n-out", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_repro_recharge)
    p = repro.add_parser("stability")
    p.add_argument("--network", default="sioux-falls")
    p.add_argument("--beta", default="-0.5,0,1,-0.1,-0.05,-0.3")
    p.add_argument("--alphas", type=_ints, default=[10, 15, 20, 25])
    p.add_argument("--n-obs", type=int, default=3000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_repro_stability)

    exp = sub.add_parser("export", help="exporters").add_subparsers(
        dest="export_command", required=True)
    p = exp.add_parser("dot", help="graph text with probability-scaled widths")
    _add_net(p)
    _add_utility(p)
    p.add_argument("--model", choices=("rl", "crl"), default="rl")
    p.add_argument("--alpha", type=_ints, default=None)
    p.add_argument("--origin", type=int, default=0)
    p.add_argument("--dashed-below", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export_dot)

    return top


def cmd_paths(args):
    net = _net(args.network)
    u = _utility(args)
    ps = enumerate_paths(net, args.origin, u, max_paths=args.max_paths,
                         hop_limit=args.hop_limit)
    if args.alpha is not None:
        ps = restrict_stepwise(ps, args.alpha, net)
    lines = [f"{len(ps)} path(s)"]
    if len(ps):
        probs = mnl_over(ps, u.mu)
        for p, v, pr in zip(ps.paths, ps.utilities, probs):
            lines.append(f"P={pr:.6f}  v={v:.4f}  " + " ".join(map(str, p)))
    print("\n".join(lines))
    return 0


def cmd_solve(args):
    net = _net(args.network)
    vt = solve_rl(net, _utility(args))
    for s in range(net.n_states):
        print(f"state {s}: z={vt.z[s]:.10g} V={vt.v_values[s]:.6f}")
    return 0


def cmd_probs(args):
    net = _net(args.network)
    u = _utility(args)
    probs = link_probs(net, u, solve_rl(net, u))
    for e in range(net.n_edges):
        print(f"{net.edge_src[e]} -> {net.edge_dst[e]}: {probs[e]:.6f}")
    return 0


def cmd_crl_solve(args):
    net = _net(args.network)
    u = _utility(args)
    xs = build_extended(net, args.origin, args.alpha)
    evt = solve_erl(xs, net, u)
    for key, val in xs.stats().items():
        print(f"{key}: {val}")
    print(f"z(origin): {evt.z[0]:.10g}")
    print(f"V(origin): {evt.v_values[0]:.6f}")
    return 0


def cmd_crl_probs(args):
    net = _net(args.network)
    u = _utility(args)
    xs = build_extended(net, args.origin, args.alpha)
    probs = erl_link_probs(xs, net, u, solve_erl(xs, net, u))
    src = np.repeat(np.arange(xs.n_states), np.diff(xs.indptr))
    for e in range(xs.n_edges):
        a = xs.state(int(src[e]))
        b = xs.state(int(xs.succ[e]))
        print(f"({a.base},{list(a.acc)}) -> ({b.base},{list(b.acc)}): "
              f"{probs[e]:.6f}")
    return 0


def cmd_crl_pathprob(args):
    net = _net(args.network)
    u = _utility(args)
    path = [int(x) for x in args.path.replace(",", " ").split()]
    xs = build_extended(net, path[0], args.alpha)
    prob = path_prob_crl(xs, net, u, solve_erl(xs, net, u), path)
    print(f"{prob:.10g}")
    return 0


def _nested_spec(net, text, mu):
    if text is None:
        return None
    import numpy as np

    from .crl import NestedSpec

    per_state = np.full(net.n_states, mu)
    for item in text.split(","):
        state, value = item.split(":")
        per_state[int(state)] = float(value)
    return NestedSpec(mu_of=per_state)


def cmd_simulate(args):
    net = _net(args.network)
    cfg = SimConfig(model=args.model, n_obs=args.n, seed=args.seed,
                    rejection=args.rejection)
    obs = simulate(net, _utility(args), args.alpha, cfg, origin=args.origin,
                   nested=_nested_spec(net, args.nest_mu, args.mu))
    text = save_observations(obs, args.out) if args.out else \
        "\n".join(" ".join(map(str, p)) for p in obs)
    if not args.out:
        print(text)
    return 0


def cmd_estimate(args):
    net = _net(args.network)
    obs = load_observations(args.observations)
    cfg = EstimationConfig(model=args.model, mu=args.mu, beta0=args.beta0,
                           alpha=args.alpha, tol_grad=args.tol_grad,
                           max_outer_iters=args.max_iters,
                           nested=_nested_spec(net, args.nest_mu, args.mu))
    res = estimate(net, obs, cfg)
    print(res.table(names=net.attribute_names))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(res.key_values())
    return 0


def _finish_report(rep, csv):
    print(rep.to_text())
    if csv:
        rep.write_csv(csv)
    return 0 if rep.passed else 1


def cmd_repro_toy(args):
    return _finish_report(experiments.run_toy_tables(), args.csv)


def cmd_repro_sweep(args):
    spec = experiments.SweepSpec(
        dag_sizes=tuple(args.sizes), graphs_per_size=args.graphs,
        thresholds=tuple(args.thresholds), trials=args.trials,
        n_insample=args.n_in, n_outsample=args.n_out,
        generator_model=args.generator, seed=args.seed)
    return _finish_report(experiments.run_threshold_sweep(spec), args.csv)


def cmd_repro_recharge(args):
    spec = experiments.SweepSpec(
        dag_sizes=tuple(args.sizes), graphs_per_size=args.graphs,
        n_insample=args.n_in, n_outsample=args.n_out, seed=args.seed)
    rep = experiments.run_recharge_study(spec, threshold=args.threshold)
    return _finish_report(rep, args.csv)


def cmd_repro_stability(args):
    net = _net(args.network)
    rep = experiments.run_stability_contrast(
        net, _floats(args.beta), alphas=tuple(args.alphas),
        n_obs=args.n_obs, seed=args.seed)
    return _finish_report(rep, args.csv)


def cmd_export_dot(args):
    net = _net(args.network)
    u = _utility(args)
    if args.model == "rl":
        flows = experiments.rl_edge_flows(net, u, solve_rl(net, u),
                                          origin=args.origin)
    else:
        if args.alpha is None:
            raise RouteLogitError("--alpha is required for the constrained model")
        xs = build_extended(net, args.origin, args.alpha)
        flows = experiments.crl_edge_flows(xs, net, u, solve_erl(xs, net, u))
    text = experiments.export_dot(net, np.minimum(flows, 1.0),
                                  threshold_for_dashed=args.dashed_below)
    _emit(text, args.out)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RouteLogitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
