"""Synthetic route observations drawn from the fitted models.

Each observation is sampled by walking the successor-choice distribution
from the origin until the destination absorbs the trajectory. Observation
``i`` draws its uniforms from a counter-based Philox stream keyed by
``(seed, i)``, so a given observation is reproducible regardless of batch
size or how many observations precede it. Rejection mode draws from the
unconstrained model and redraws (from the same per-observation stream)
until the sample is stepwise-feasible under the bound.
"""
from dataclasses import dataclass

import numpy as np

from . import backend
from .crl import build_extended, erl_link_probs, solve_erl, solve_nested
from .errors import SimulationError
from .rl import link_probs, solve_rl

_REJECTION_WINDOW = 10_000
_MIN_ACCEPT_RATE = 1e-4


@dataclass(frozen=True)
class SimConfig:
    model: str = "crl"
    n_obs: int = 1000
    seed: int = 0
    rejection: bool = False
    max_hops: int = 10_000

    def __post_init__(self):
        if self.model not in ("rl", "crl", "cnrl"):
            raise ValueError("model must be 'rl', 'crl', or 'cnrl'")
        if self.n_obs <= 0:
            raise ValueError("n_obs must be positive")
        if self.max_hops <= 0:
            raise ValueError("max_hops must be positive")


def _obs_stream(seed, index):
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(index)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _walk_graph(indptr, succ, probs, terminal, start, cfg, indices,
                feasible=None):
    """Walk the chain once per entry of ``indices``; returns node paths.

    ``feasible`` (optional) maps a finished path to bool; rejected paths
    are redrawn from the same stream, with a starvation guard over a
    sliding draw window.
    """
    n = len(indices)
    # walks that outrun the chunk resume from the same stream, so the chunk
    # size never changes which uniforms a given observation consumes
    chunk = int(min(cfg.max_hops, 64))
    out = [None] * n
    pending = [(k, _obs_stream(cfg.seed, indices[k]), 0) for k in range(n)]
    draws = accepts = 0
    starts = np.full(len(pending), start, dtype=np.int64)
    while pending:
        u = np.empty((len(pending), chunk))
        for r, (_, gen, _) in enumerate(pending):
            u[r] = gen.random(chunk)
        nodes = np.zeros((len(pending), chunk + 1), dtype=np.int64)
        lengths = np.zeros(len(pending), dtype=np.int64)
        used = np.zeros(len(pending), dtype=np.int64)
        status = np.zeros(len(pending), dtype=np.int64)
        backend.walk_batch(indptr, succ, probs, starts[:len(pending)],
                           terminal, u, nodes, lengths, used, status)
        nxt = []
        for r, (k, gen, hops) in enumerate(pending):
            if status[r] == 3:
                raise SimulationError(
                    f"observation {indices[k]}: no successor with positive "
                    f"probability from state {nodes[r, lengths[r] - 1]}")
            if status[r] == 2:
                hops += int(lengths[r]) - 1
                if hops >= cfg.max_hops:
                    raise SimulationError(
                        f"observation {indices[k]} exceeded the hop cap "
                        f"{cfg.max_hops} (cyclic wandering)")
                # resume from where the walk ran out of uniforms
                nxt.append((k, gen, hops))
                starts[len(nxt) - 1] = nodes[r, lengths[r] - 1]
                if out[k] is None:
                    out[k] = []
                out[k].extend(int(x) for x in nodes[r, :lengths[r] - 1])
                continue
            prefix = out[k] or []
            path = prefix + [int(x) for x in nodes[r, :lengths[r]]]
            out[k] = None
            draws += 1
            if feasible is None or feasible(path):
                accepts += 1
                out[k] = path
            else:
                nxt.append((k, gen, 0))
                starts[len(nxt) - 1] = start
            if feasible is not None and draws % _REJECTION_WINDOW == 0:
                if accepts / draws < _MIN_ACCEPT_RATE:
                    raise SimulationError(
                        f"rejection acceptance rate {accepts / draws:.2e} "
                        f"below {_MIN_ACCEPT_RATE} over {draws} draws: "
                        "the constraint is too tight for unconstrained "
                        "generation")
                draws = accepts = 0
        pending = nxt
    return out


def simulate(net, u, alpha, cfg, origin=0, nested=None):
    """Draw ``cfg.n_obs`` observations from the configured model.

    Deterministic for fixed inputs. Under the constrained models every
    sample is stepwise-feasible by construction; in rejection mode the
    unconstrained samples are filtered to the same support.
    """
    indices = list(range(cfg.n_obs))
    if cfg.model == "rl":
        vt = solve_rl(net, u)
        probs = link_probs(net, u, vt)
        terminal = np.zeros(net.n_states, dtype=bool)
        terminal[net.destination] = True
        feasible = None
        if cfg.rejection:
            if alpha is None:
                raise ValueError("rejection mode requires alpha")
            feasible = lambda p: net.stepwise_feasible(p, alpha)
        paths = _walk_graph(net.indptr, net.edge_dst, probs, terminal,
                            origin, cfg, indices, feasible=feasible)
        return [tuple(p) for p in paths]

    if alpha is None:
        raise ValueError(f"model {cfg.model!r} requires alpha")
    xs = build_extended(net, origin, alpha)
    if cfg.model == "crl":
        evt = solve_erl(xs, net, u)
    else:
        if nested is None:
            raise ValueError("model 'cnrl' requires a NestedSpec")
        evt = solve_nested(xs, net, u, nested)
    probs = erl_link_probs(xs, net, u, evt)
    if not np.isfinite(evt.v_values[0]):
        raise SimulationError("no feasible path from the origin under alpha")
    terminal = xs.is_dest.copy()
    ext_paths = _walk_graph(xs.indptr, xs.succ, probs, terminal, 0, cfg,
                            indices)
    return [tuple(int(xs.base_of[idx]) for idx in p) for p in ext_paths]
