"""
Sunflowers, robust and otherwise
================================
"""

from fractions import Fraction

import numpy as np

from cliquelab.sunflowers import (
    SetFamily,
    check_robust,
    coverage_prob_clique,
    erdos_rado_bound,
    find_k_sunflower,
    random_uniform_family,
    search_sunflower_free,
    verify_erdos_rado,
    verify_rs_implies_rcs,
    verify_sunflower_is_rcs,
)

star = SetFamily(6, [[0, 1], [0, 2], [0, 3], [0, 4]])
print(star.to_text())
print("3-sunflower:", find_k_sunflower(star, 3))

# --- Every 2-uniform family of 8 sets has a 3-sunflower ---
rng = np.random.default_rng(0)
rep = verify_erdos_rado(2, 3, (random_uniform_family(9, 2, 8, rng) for _ in range(2000)))
print(f"bound {erdos_rado_bound(2, 3)}: checked {rep.checked}, failures {len(rep.failures)}")
print("a sunflower-free family of 6 pairs on 6 points:", search_sunflower_free(6, 2, 3, 6))

# --- Coverage of the star by a random graph plus the core clique ---
for p in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
    print(f"p={p}: clique coverage {coverage_prob_clique(star, [0], p).value}")
print(check_robust(star, [0], Fraction(1, 2), Fraction(1, 10)))
print(check_robust(star, [0], 0.5, 0.1, mode="mc", trials=5000, seed=1))

# --- Sunflowers are robust clique sunflowers ---
for ell, k, c, p in [(2, 2, 0, Fraction(1, 2)), (3, 3, 1, Fraction(3, 5)), (3, 4, 1, Fraction(7, 10))]:
    r = verify_sunflower_is_rcs(ell, k, c, p)
    print(f"ell={ell} k={k} c={c} p={p}: failure {float(r.failure):.4f} <= {r.bound:.4f}")

# --- Robust sunflowers at p^ell are robust clique sunflowers at p ---
r = verify_rs_implies_rcs(200, 8, 2, Fraction(7, 10), Fraction(3, 10), seed=1)
print(f"{r.premise_count} premise families in {r.attempts} draws, {len(r.counterexamples)} counterexamples")
