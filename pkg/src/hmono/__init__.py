"""Numerical toolkit for h-monotone maps under power-law costs h(x) = <Mx, x>^(p/2).

Submodules: :mod:`cost_kernel`, :mod:`monotone_core`, :mod:`transport_gen`,
:mod:`estimates`, :mod:`lemma_suite`, :mod:`regularity`, :mod:`quadrature`
and the experiment runner :mod:`cli`.
"""

__version__ = "0.1.0"

from .cost_kernel import CostFunction, EllipticityBounds, ellipticity_bounds  # noqa: E402
from .exceptions import *  # noqa: E402,F401,F403
from .monotone_core import (MonotonicityReport, QuadratureSpec, SampledMap,  # noqa: E402
                            check_map_monotone, load_sampled_map, pair_defect, save_sampled_map)
from .transport_gen import Density, make_generator_map, make_negative_map, solve_discrete_ot  # noqa: E402

__all__ = [
    "__version__", "CostFunction", "EllipticityBounds", "ellipticity_bounds", "SampledMap",
    "QuadratureSpec", "MonotonicityReport", "check_map_monotone", "pair_defect",
    "load_sampled_map", "save_sampled_map", "Density", "make_generator_map",
    "make_negative_map", "solve_discrete_ot",
]
