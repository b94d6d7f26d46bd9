"""Finite valuation rings, their sum-product graphs, and exact checks of the
spectral expansion machinery for two-variable functions."""

from .graph import SPGraph, SpectralCert, build_graph, certify, edge_count, mixing_check
from .harness import ExpansionReport, construct_ST, evaluate_theorem, sharpness_probe, vinh_field_check
from .rings import RingElem, RingSpec, make_ring, parse_ring
from .sets import ElemSet, FuncTable, apply_f, multiplicity, product_set, subgroup_generate, sum_set

__all__ = [
    "ElemSet",
    "ExpansionReport",
    "FuncTable",
    "RingElem",
    "RingSpec",
    "SPGraph",
    "SpectralCert",
    "apply_f",
    "build_graph",
    "certify",
    "construct_ST",
    "edge_count",
    "evaluate_theorem",
    "make_ring",
    "mixing_check",
    "multiplicity",
    "parse_ring",
    "product_set",
    "sharpness_probe",
    "subgroup_generate",
    "sum_set",
    "vinh_field_check",
]
