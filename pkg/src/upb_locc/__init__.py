"""Unextendible product bases and their LOCC discrimination with entanglement."""

__version__ = "0.1.0"

from .families import UPBSet, build_family, build_gentiles, build_odd_family, build_paper_5x5
from .locc import Resource, attach, ebit_cost, evaluate, run_protocol, validate
from .verify import check_orthogonality, check_ppt, check_unextendible, one_party_distinguishable

__all__ = [
    "Resource",
    "UPBSet",
    "attach",
    "build_family",
    "build_gentiles",
    "build_odd_family",
    "build_paper_5x5",
    "check_orthogonality",
    "check_ppt",
    "check_unextendible",
    "ebit_cost",
    "evaluate",
    "one_party_distinguishable",
    "run_protocol",
    "validate",
]
