"""
Comparing sum processes over liftings
=====================================

Lift each k-set S into the grid as a set of cells, put i.i.d. values in
the cells and look at E max over S of the cell sums. The row-aligned
lifting S x [ell] is the smallest; walking row by row towards any other
proper lifting never decreases the value.
"""

from fractions import Fraction

import numpy as np

from cliquelab.processes import (
    CellDistribution,
    expected_sup,
    interpolate,
    random_proper_lifting,
    square_lifting,
    verify_bridge,
    verify_comparison_chain,
)
from cliquelab.sunflowers import SetFamily

F = SetFamily(4, [[0, 1], [0, 2]])
half = CellDistribution.bernoulli(Fraction(1, 2))
phi = square_lifting(F, 2)
for t in range(F.n + 1):
    print(f"t={t}: second set -> {sorted(interpolate(phi, t).cells[1])}, E sup = {expected_sup(interpolate(phi, t), half)}")

# --- Random liftings ---
rng = np.random.default_rng(0)
G = SetFamily(5, [[0, 1], [1, 2], [3, 4]])
gaps = []
for i in (1, 2, 3):
    chain = verify_comparison_chain(random_proper_lifting(G, 2, rng), CellDistribution.bernoulli(Fraction(i, 4)))
    gaps.append(chain.rhs - chain.lhs)
print("smallest gap rhs - lhs over a few random liftings:", min(gaps))

# Monte Carlo for something bigger than the exact cap
big = random_proper_lifting(SetFamily(8, [[0, 1, 2], [2, 3, 4], [4, 5, 6], [1, 6, 7]]), 3, rng)
print("E sup (MC):", expected_sup(big, half, mode="mc", trials=50_000, seed=1))

# --- From robust sunflowers to expected suprema ---
star = SetFamily(6, [[0, 1], [0, 2], [0, 3], [0, 4]], uniformity=2)
bridge = verify_bridge(star, Fraction(7, 10), Fraction(3, 10))
print(f"left {float(bridge.lhs):.4f}  link {float(bridge.rhs):.4f}  target {bridge.target}  ok={bridge.ok}")
