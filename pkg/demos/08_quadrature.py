"""Gauss-Legendre rules on the unit square with kinks handled by splitting.

Integrands like |z0 + s ds + t dt|^(p-2) are only piecewise smooth, so
the rule is split where the affine argument comes closest to the origin.
"""
import numpy as np
from scipy import integrate

from hmono.quadrature import gauss_legendre_unit_square, polar_ball_quadrature, unit_ball_volume


def f(s, t):
    return np.abs(t - 0.3 - 0.4 * s) ** 1.5


ref = integrate.dblquad(lambda t, s: f(s, t), 0, 1, 0, 1, epsabs=1e-13, epsrel=1e-13)[0]
for m in (8, 16, 32):
    plain = gauss_legendre_unit_square(f, m)
    split = gauss_legendre_unit_square(f, m, t_breaks=lambda s: (0.3 + 0.4 * s,))
    print(f"{m:2d} nodes: plain error {abs(plain - ref):.1e}, split along the kink {abs(split - ref):.1e}")

bq = polar_ball_quadrature(np.zeros(3), 1.0, 16, 16)
print(f"\nunit ball in R^3: volume {bq.volume:.12f} (exact {unit_ball_volume(3):.12f})")
print(f"average of |x|^2: {bq.average(np.sum(bq.nodes**2, axis=1)):.12f} (exact 0.6)")
