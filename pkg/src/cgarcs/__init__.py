"""Column generation for the VRPTW linear relaxation with learned arc selection in pricing."""

from .colgen import CgConfig, run_baseline, run_collect, run_ml, run_redcost
from .instance import VrptwInstance, parse_instance, read_instance, tighten_windows
from .network import Network, build_network, reduce_network
from .pricing import BACKEND, price_arcs, solve_pricing

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CgConfig",
    "Network",
    "VrptwInstance",
    "build_network",
    "parse_instance",
    "price_arcs",
    "read_instance",
    "reduce_network",
    "run_baseline",
    "run_collect",
    "run_ml",
    "run_redcost",
    "solve_pricing",
    "tighten_windows",
]
