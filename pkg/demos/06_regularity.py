"""Pointwise regularity diagnostics on an optimal transport map.

Ratios of oscillation to a power of the radius are tracked over one
decade of radii. A nondecreasing trend supports Holder continuity with
exponent 1/(p-1); bounded averages of Dh(x - Tx) support a T^{1,1} class.
The bounded-deformation functional is then tested with smooth bumps.
"""
import numpy as np

from hmono import CostFunction, Density, make_generator_map, make_negative_map
from hmono.regularity import (bd_inequality_values, dh_composition_t11_probe, direction_set,
                              holder_profile, make_bump_family, radius_decade, sample_centers,
                              tkp_profile)

p = 3.0
cost = CostFunction.isotropic(2, p)
m = make_generator_map("ot_grid", cost, ((0, 0), (1, 1), (40, 40)), density=Density("gaussian"),
                       seed=0, max_points=1600)
radii = radius_decade(0.4, 6)  # smallest ball must hold enough nodes on a 40x40 grid
centers = sample_centers(m, radii[0], 10, seed=0)
for c in centers[:4]:
    h = holder_profile(m, c, p, radii)
    d = dh_composition_t11_probe(cost, m, c, radii)
    t = tkp_profile(m, c, 1.0, np.inf, radii)
    print(f"center {h.center}: Holder slope {h.fitted_rate:+.3f} [{h.classification}], "
          f"Dh probe [{d.classification}], map [{t.classification}]")

bumps = make_bump_family(m, 20, seed=0)
worst = min(np.min(np.divide(*bd_inequality_values(cost, m, xi, bumps))) for xi in direction_set(2))
print(f"\nBD functional / bump mass, worst over 20 bumps x 6 directions: {worst:.4g}")
refl = make_negative_map("reflection", cost, ((0, 0), (1, 1), (40, 40)))
worst = max(np.max(np.divide(*bd_inequality_values(cost, refl, xi, bumps))) for xi in direction_set(2))
print(f"reflection (not monotone), largest value / mass: {worst:.4g}")
