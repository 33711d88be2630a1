"""Power costs h(x) = |x|^p and their ellipticity constants.

The Hessian of a p-homogeneous cost is (p-2)-homogeneous, so its
eigenvalues on the unit sphere bound it everywhere after rescaling.
"""
import numpy as np

from hmono import CostFunction, ellipticity_bounds

for p in (2.0, 3.0, 4.0):
    cost = CostFunction.isotropic(2, p)
    lam, Lam = ellipticity_bounds(cost)
    print(f"|x|^{p:g}: lambda = {lam:.4f}, Lambda = {Lam:.4f} (expected p and p(p-1))")

M = np.array([[2.0, 0.5], [0.5, 1.0]])
aniso = CostFunction.anisotropic(M, 3.0)
lam, Lam = ellipticity_bounds(aniso)
x = np.array([0.3, -0.7])
print(f"\nanisotropic cost (x^T M x)^(3/2) at {x}: h = {aniso.h(x):.5f}")
print(f"  gradient {aniso.grad(x)}, Hessian eigenvalues {np.linalg.eigvalsh(aniso.hess(x))}")
print(f"  sphere bounds lambda = {lam:.4f}, Lambda = {Lam:.4f}")

# homogeneity: h(t x) = t^p h(x)
for t in (0.5, 2.0):
    print(f"  h({t} x) / h(x) = {aniso.h(t * x) / aniso.h(x):.6f}  (t^3 = {t**3:.6f})")
