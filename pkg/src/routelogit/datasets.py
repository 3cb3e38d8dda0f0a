"""Shipped network assets.

Loaded from the package's ``data/`` directory; regenerate with
``tools/make_assets.py``. See that script for the derivations of the toy
edge values (route-total offsets, station placement, feasibility windows)
and the provenance of the 24-node/76-link benchmark topology.
"""
from importlib import resources

from .network import load_network


def _load(name):
    ref = resources.files("routelogit").joinpath("data").joinpath(f"{name}.net")
    if not ref.is_file():
        raise FileNotFoundError(
            f"missing network asset {name!r}; run tools/make_assets.py")
    return load_network(ref.read_text(encoding="utf-8"))


def toy_deadline():
    """Six-state travel-time toy; origin 0, destination 1, quantum 0.5 h.

    Four routes with totals 3, 2, 2.5, 3 hours; a 2.5 h deadline is
    alpha = 5 quanta.
    """
    return _load("toy_deadline")


def toy_recharge():
    """Seven-state energy toy with recharge stations at states 3 and 6.

    Energy equals travel time; budgets of 5, 4, 3 hours are alpha = 10,
    8, 6 quanta.
    """
    return _load("toy_recharge")


def grid_recharge():
    """5x5 grid with unit times and stations at states 3, 9, 15, 21.

    Origin 0 (bottom-left), destination 24 (top-right); an energy budget
    of 7 forces detours through stations.
    """
    return _load("grid_recharge")


def sioux_falls():
    """Link-based state network over the 24/76 benchmark topology.

    Origin state 0 stands at node 1; the destination absorbs arrivals at
    node 20. Attributes: cap, len, tt, lt, rt, ut. Every transition costs
    one quantum (link count).
    """
    return _load("sioux_falls")
