"""Green representation on a ball: v(y) equals its ball average plus a
Gamma-weighted correction from the Laplacian.

The correction integrates (Gamma - Gamma(rho)) Lap v over nested balls;
in polar coordinates the kernel singularity cancels against the volume
element, so plain Gauss-Legendre rules converge fast.
"""
import numpy as np

from hmono.estimates import green_identity_residual

y = np.array([0.1, -0.2, 0.3])
quad = lambda x: np.sum((x - y) ** 2, axis=1)  # noqa: E731
for r in (0.5, 1.0):
    res = green_identity_residual(quad, y, r, lambda x: np.full(len(x), 6.0))
    print(f"|x - y|^2, r = {r}: residual {res:.2e}")

v = lambda x: np.exp(0.9 * x[:, 0] - 0.4 * x[:, 1]) * (1 + x[:, 2] ** 2)  # noqa: E731
lap = lambda x: np.exp(0.9 * x[:, 0] - 0.4 * x[:, 1]) * (0.97 * (1 + x[:, 2] ** 2) + 2)  # noqa: E731
for nodes in (2, 3, 6, 12):
    print(f"smooth v with {nodes:2d} nodes: residual {green_identity_residual(v, y, 1.0, lap, nodes):.2e}")
print(f"finite-difference Laplacian, 16 nodes: {green_identity_residual(v, y, 1.0):.2e}")
