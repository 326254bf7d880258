"""Desk-scale laboratory for monotone clique circuits, robust sunflowers and
the approximation method."""

from .seeding import SeedSpec
from .stats import Estimate
from .graphs import Graph, contains_clique
from .distributions import (
    NegDistParams,
    PosDistParams,
    clique_prob_negative,
    clique_prob_positive,
    edge_probability,
    sample_negative,
    sample_positive,
)
from .circuits import (
    CircuitBuilder,
    ComparatorNetwork,
    MonotoneCircuit,
    build_clique_indicator,
    build_sorting_network,
    build_threshold,
    evaluate,
    parse_circuit,
    serialize_circuit,
)
from .acceptance import estimate_acceptance, exact_acceptance

__version__ = "0.1.0"
