"""Recursive logit route choice models, with and without feasibility constraints.

Core pieces: :mod:`routelogit.network` (data model, file format,
generators), :mod:`routelogit.rl` (unconstrained model),
:mod:`routelogit.crl` (extended-state-space constrained model),
:mod:`routelogit.oracle` (brute-force path-set ground truth),
:mod:`routelogit.estimation` (maximum likelihood),
:mod:`routelogit.simulation` (observation sampling), and
:mod:`routelogit.experiments` (scripted studies and the DOT exporter).
"""
from .errors import (InfeasibleObservationError, ParseError, PathOverflowError,
                     RouteLogitError, SimulationError, SolveFailure,
                     StateSpaceCapError)
from .network import (Network, generate_geometric_dag, load_network,
                      load_observations, longest_travel_time, save_network,
                      save_observations, threshold_from_percent)
from .rl import UtilitySpec, ValueTable, link_probs, path_prob_rl, solve_rl
from .crl import (ExtendedStateSpace, ExtendedValueTable, NestedSpec,
                  build_extended, erl_link_probs, path_prob_crl, solve_erl,
                  solve_nested)
from .oracle import PathSet, enumerate_paths, mnl_over, restrict_stepwise, restrict_total
from .estimation import (EstimationConfig, EstimationResult, loglik,
                         loglik_gradient, estimate, percent_improve)
from .simulation import SimConfig, simulate

__version__ = "0.1.0"
