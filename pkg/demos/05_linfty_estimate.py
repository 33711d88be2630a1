"""The two-branch sup estimate for T - (A x + b) on an inner ball.

Small residuals fall in the branch with exponent (p-1)/(n+p-1); large
ones scale linearly. The absolute constant is not explicit, so it is
calibrated on training maps and then tested on fresh ones.
"""
import numpy as np

from hmono import CostFunction, Density, SampledMap, make_generator_map
from hmono.estimates import (AffineFrame, BallSpec, calibrate_constant, linfty_bound,
                             scaling_exponent_probe)

base = SampledMap.from_function(lambda x: x + 0.1 * np.sin(3 * x), (-1, -1), (1, 1), (41, 41))
frame, ball = AffineFrame.identity(2), BallSpec([0.0, 0.0], 0.8)
for p in (2.0, 3.0):
    for eps in (np.logspace(-6, -5, 5), np.logspace(2, 3, 5)):
        probe = scaling_exponent_probe(base, frame, ball, p, eps)
        print(f"p={p:g} {probe.branch:5s} branch: slope {probe.slope:.4f} (predicted {probe.expected:.4f})")

cost = CostFunction.isotropic(2, 2.0)
ball = BallSpec([0.5, 0.5], 0.45, 0.5)


def case(density, seed):
    m = make_generator_map("ot_grid", cost, ((0, 0), (1, 1), (20, 20)), density=density, seed=seed)
    return m, AffineFrame.fit(m, ball.center, ball.radius), ball


C = calibrate_constant([case(Density("uniform"), s) for s in range(5)], 2.0)
print(f"\ncalibrated C = {C:.4g}")
for dens in (Density("gaussian"), Density("two_bump")):
    rep = linfty_bound(*case(dens, 20), 2.0, C)
    print(f"  {dens.kind:9s}: sup |u| = {rep.empirical_sup:.4f} <= bound {rep.bound:.4f} ({rep.branch} branch)")
