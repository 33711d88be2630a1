"""Integral inequalities behind the estimates, checked numerically.

Each check compares a quadrature value against a bound built from
explicit constants and reports the margin.
"""
import numpy as np

from hmono import CostFunction, ellipticity_bounds
from hmono.lemma_suite import (closed_I, closed_II, j_lower_constant, quad_I, quad_II,
                               verify_gap_sandwich, verify_j_lower, verify_j_single_sandwich)

print("strip integrals: closed form vs adaptive quadrature")
for p in (2.0, 3.0, 4.5):
    d = 0.3
    print(f"  p={p:g}: I {closed_I(d, p):.10f} / {quad_I(d, p):.10f}   "
          f"II {closed_II(d, p):.10f} / {quad_II(d, p):.10f}")

rng = np.random.default_rng(4)
print("\ndouble integral lower bound at delta = delta0/2")
for p in (2.0, 3.0, 4.0):
    C, d0 = j_lower_constant(p)
    reps = [verify_j_lower(*rng.normal(size=(2, 2)), 0.5 * d0, p) for _ in range(200)]
    ratio = min(r.quad_value / r.closed_or_bound_value for r in reps)
    print(f"  p={p:g}: C_p={C:.4f}, all pass: {all(r.passed for r in reps)}, min J/bound {ratio:.3f}")

print("\nsingle integral and gradient-gap sandwiches")
for p in (2.0, 3.0):
    cost = CostFunction.isotropic(3, p)
    lam, Lam = ellipticity_bounds(cost)
    a, b = rng.normal(size=(2, 3))
    s1 = verify_j_single_sandwich(a, b, p)
    s2 = verify_gap_sandwich(cost, a, b, lam, Lam)
    print(f"  p={p:g}: J1 {s1.closed_or_bound_value:.4f} <= {s1.quad_value:.4f} <= {s1.extra['upper']:.4f}; "
          f"gap {s2.closed_or_bound_value:.4f} <= {s2.quad_value:.4f} <= {s2.extra['upper']:.4f}")
