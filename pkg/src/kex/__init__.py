"""Kidney-exchange ILP toolkit: cycle and chain formulations, their combinations, and a brute-force oracle."""

from .assembly import SolveConfig, Method, build, method_ids, solve
from .chain_models import UNBOUNDED, TauMode
from .enumeration import PsMethod
from .instance import Instance, appendix_example, load_instance, make_instance, parse_instance, serialize_instance
from .oracle import brute_force_optimum
from .solution import ExchangeSet, validate_solution

__version__ = "0.1.0"

__all__ = [
    "Instance", "make_instance", "parse_instance", "load_instance", "serialize_instance", "appendix_example",
    "SolveConfig", "Method", "TauMode", "PsMethod", "UNBOUNDED", "build", "solve", "method_ids",
    "ExchangeSet", "validate_solution", "brute_force_optimum",
]
