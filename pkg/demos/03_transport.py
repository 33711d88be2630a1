"""Optimal assignments are monotone, and broken ones are not.

Grid nodes are matched to quantile points of a target density by an
exact linear assignment. Any pair swap would raise the total cost, which
is precisely the pair-defect inequality.
"""
import numpy as np

from hmono import CostFunction, Density, check_map_monotone, make_generator_map, make_negative_map
from hmono.transport_gen import solve_discrete_ot

cost = CostFunction.isotropic(2, 2.0)
a = solve_discrete_ot(cost, [[0, 0], [1, 0]], [[1, 1], [0, 1]])
print(f"two points: permutation {a.permutation.tolist()}, total cost {a.total_cost}")

grid = ((0.0, 0.0), (1.0, 1.0), (16, 16))
for dens in (Density("gaussian"), Density("two_bump")):
    m = make_generator_map("ot_grid", cost, grid, density=dens, seed=1)
    rep = check_map_monotone(cost, m)
    shift = np.linalg.norm(m.values - m.points, axis=1)
    print(f"{dens.kind:9s} target: mean displacement {shift.mean():.3f}, "
          f"{rep.violations} violations in {rep.pairs_tested} pairs")

for kind in ("reflection", "shuffled_ot"):
    bad = make_negative_map(kind, cost, grid, seed=1)
    rep = check_map_monotone(cost, bad)
    print(f"negative control {kind:11s}: {rep.violations} violations, worst {rep.worst_defect:.4g}")
