"""
Monotone circuits
=================
"""

from fractions import Fraction

from cliquelab import (
    CircuitBuilder,
    Graph,
    NegDistParams,
    PosDistParams,
    build_clique_indicator,
    build_sorting_network,
    estimate_acceptance,
    evaluate,
    exact_acceptance,
    parse_circuit,
    serialize_circuit,
)
from cliquelab.circuits import threshold_wiring

# a triangle indicator on vertices 1,2,3 (0-based 0,1,2)
k123 = build_clique_indicator([0, 1, 2], 3)
print(serialize_circuit(k123))
assert parse_circuit(serialize_circuit(k123)) == k123

# --- Sorting networks and thresholds ---
net = build_sorting_network(8)
print("Batcher network on 8 wires:", len(net), "comparators, depth", net.depth())
print(net.apply([0, 1, 1, 0, 1, 0, 0, 1]))

b = CircuitBuilder(5)
ins = [b.input(0, 1), b.input(1, 2), b.input(2, 3), b.input(3, 4), b.input(0, 4)]
at_least_3 = b.build(threshold_wiring(b, ins, 3))
g = Graph.from_edges(5, [(0, 1), (2, 3), (3, 4)])
print("3 of the 5 ring edges present ->", evaluate(at_least_3, g))

# --- Acceptance: exact versus sampled ---
c = build_clique_indicator([0, 1, 2], 6)
for dist in (NegDistParams(6, p=Fraction(1, 2)), PosDistParams(6, 4)):
    exact = exact_acceptance(c, dist)
    est = estimate_acceptance(c, dist, trials=20_000, seed=3)
    print(f"{dist.kind:8s} exact {exact} = {float(exact):.4f}, sampled {est.value:.4f} +- {est.half_width:.4f}")
