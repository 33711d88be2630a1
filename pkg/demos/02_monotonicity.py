"""The pair defect and its bilinear form.

A map is h-monotone when every pair of grid nodes has a nonnegative pair
defect. The defect equals <A (x - y), xi - zeta> where A averages the
cost Hessian over a parallelogram; both sides are computed here.
"""
import numpy as np

from hmono import CostFunction, SampledMap, check_map_monotone, pair_defect
from hmono.monotone_core import a_matrix, defect_bilinear_identity, phi_weight

cost = CostFunction.isotropic(2, 3.0)
rng = np.random.default_rng(0)
x, y, xi, zeta = rng.normal(size=(4, 2))
direct, bilinear = defect_bilinear_identity(cost, x, y, xi, zeta)
print(f"pair defect directly  : {direct:.12f}")
print(f"via the averaged A    : {bilinear:.12f}")
A = a_matrix(cost, x, y, xi, zeta)
print(f"A eigenvalues {np.linalg.eigvalsh(A)}, Phi weight {phi_weight(x, y, xi, zeta, 3.0):.5f}")

box = ((0.0, 0.0), (1.0, 1.0), (12, 12))
contraction = SampledMap.from_function(lambda p: 0.5 * p + 0.2, *box)
rotation = SampledMap.from_function(lambda p: (p - 0.5) @ np.array([[0, -1.0], [1.0, 0]]), *box)
for name, m in (("contraction", contraction), ("quarter rotation", rotation)):
    rep = check_map_monotone(cost, m)
    print(f"\n{name}: {rep.pairs_tested} pairs, {rep.violations} violations, "
          f"worst defect {rep.worst_defect:.4g}")
    if not rep.passed:
        px, py, pxi, pzeta = rep.worst_pair
        print(f"  worst pair x={px}, y={py}: defect {pair_defect(cost, px, py, pxi, pzeta):.4g}")
