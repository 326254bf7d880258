"""
An explicit circuit telling the two distributions apart
=======================================================

Random clique indicators feed a sorting-network threshold. The indicator
size is the smallest one for which a planted clique beats the random
graph by a factor of five.
"""

import time

import numpy as np

from cliquelab.distinguisher import (
    build_distinguisher,
    indicator_counts,
    measure_success,
    plan_distinguisher,
)

P = plan_distinguisher(100, 20, 50, seed=1)
print(f"ell={P.ell}  m={P.m}  tau={P.tau}")
print("certificate:", P.certificate)

t = time.perf_counter()
circuit = build_distinguisher(P)
print(f"circuit: {circuit.size} AND/OR gates, depth {circuit.depth()}, built in {time.perf_counter() - t:.1f}s")

report = measure_success(P, 1000, circuit)
print(report.to_json())

# --- Where the threshold sits ---
neg = indicator_counts(P, P.negative(), 1000)
pos = indicator_counts(P, P.positive(), 1000)
print(f"satisfied indicators, negative: mean {neg.mean():.2f}, max {neg.max()}")
print(f"satisfied indicators, positive: mean {pos.mean():.1f}, min {pos.min()}")

# --- Calibrating the constant in m ---
for K in (0.25, 0.5, 1, 2, 4, 8):
    Q = plan_distinguisher(100, 20, 50, K=K, seed=1)
    fp = (indicator_counts(Q, Q.negative(), 1000) >= Q.tau).mean()
    fn = (indicator_counts(Q, Q.positive(), 1000) < Q.tau).mean()
    print(f"K={K:<5} m={Q.m:<5} tau={Q.tau:<3} false accept {fp:.3f}  false reject {fn:.3f}")
