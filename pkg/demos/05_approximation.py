"""
Approximating a circuit gate by gate
====================================

Each gate becomes an OR of clique indicators. After every AND/OR the
result is compressed: robust clique sunflowers collapse to their cores,
then terms above size c are dropped.
"""

from fractions import Fraction

from cliquelab import CircuitBuilder, NegDistParams, PosDistParams
from cliquelab.approx import (
    Approximator,
    CompressionParams,
    approximate_circuit,
    audit_simple_approximator,
    closure,
    estimate_step_errors,
)

# --- Closure on a star ---
star = Approximator(7, [0b11, 0b101, 0b1001, 0b10001])
closed, log = closure(star, Fraction(1, 2), Fraction(1, 10))
print(star, "->", closed)
for rep in log:
    print("  replaced", rep.to_dict())

# --- A small circuit: OR of triangles through vertex 0 ---
b = CircuitBuilder(7)
tris = [b.clique_indicator([0, i, i + 1]) for i in range(1, 6)]
c = b.build(b.or_all(tris))

for params in (None, CompressionParams(Fraction(1, 2), Fraction(3, 10), 2)):
    out, trace = approximate_circuit(c, params)
    print("compression" if params else "identity", "->", out, f"({trace.replacement_count} replacements)")
    errs = estimate_step_errors(trace, c, (NegDistParams(7, p=Fraction(1, 2)), PosDistParams(7, 4)), mode="exact")
    worst = max(errs, key=lambda e: e.zeta_plus.value)
    print(f"  worst positive step error {worst.zeta_plus.value} at gate {worst.gate_id}")
    print("  negative step errors:", sorted({str(e.zeta_minus.value) for e in errs}))

# --- Union bound on planted-clique acceptance ---
a = Approximator(10, [0b111, 0b11000, 0b1100000000])
print(audit_simple_approximator(a, 5).to_dict())
