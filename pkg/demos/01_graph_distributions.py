"""
The two test distributions
==========================

Sparse random graphs with no large clique on one side, a single planted
clique on the other.
"""

from fractions import Fraction

import numpy as np

from cliquelab import (
    NegDistParams,
    PosDistParams,
    clique_prob_negative,
    clique_prob_positive,
    contains_clique,
    sample_negative,
    sample_positive,
)
from cliquelab.distributions import sample_batch
from cliquelab import Graph

# --- Edge probability ---
neg = NegDistParams(50, alpha=5)
print(f"n=50, alpha=5: p = {neg.p:.4f}")

# --- One sample of each ---
g = sample_negative(neg, seed=7)
h = sample_positive(PosDistParams(50, 20), seed=7)
print("negative sample edges:", g.edge_count)
print("positive sample edges:", h.edge_count, "= C(20,2)")

# --- How often does the negative side hide an alpha-clique? ---
x = sample_batch(neg, 1, 0, 2000)
hits = sum(contains_clique(Graph(50, row), 5) for row in x)
print(f"5-cliques in {len(x)} negative samples: {hits}")

# --- Clique-inclusion probabilities ---
for ell in (2, 3, 4):
    pos = clique_prob_positive(50, 20, ell)
    print(f"ell={ell}: positive {float(pos):.3e} (bound {(20 / 50) ** ell:.3e}), "
          f"negative {clique_prob_negative(neg.p, ell):.3e}")

print(clique_prob_positive(4, 2, 2), "==", Fraction(1, 6))
