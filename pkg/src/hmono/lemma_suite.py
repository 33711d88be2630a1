"""Quantitative lemmas on integrals of |v_1 + t v_2|^(p-2).

Three estimates are implemented with concrete constants and checked
against quadrature:

* the double integral J = int_0^1 int_0^1 |v1 - (t - s delta) v2|^(p-2) ds dt
  is bounded below by C_p max(|v1|, |v2|)^(p-2) for small delta;
* the single integral int_0^1 |v1 + t v2|^(p-2) dt is sandwiched between
  c_p max^(p-2) and C_p max^(p-2);
* the gradient gap <Dh(a) - Dh(b), a - b> lies between
  lambda c_p |a - b|^p and Lambda C_p |a - b|^2 max(|b|, |a - b|)^(p-2).

The constants of the double-integral bound are not available in closed
form; :func:`j_lower_constant` computes them from the two cases of the
argument (|v1| >= |v2| and |v1| <= |v2|).
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .monotone_core import QuadratureSpec
from .quadrature import composite_gauss_legendre, gauss_legendre_unit_square

__all__ = [
    "LemmaReport",
    "LEMMA_SLACK",
    "j_double",
    "closed_I",
    "closed_II",
    "quad_I",
    "quad_II",
    "j_lower_constant",
    "window_constant",
    "verify_j_lower",
    "j_single",
    "single_constants",
    "verify_j_single_sandwich",
    "gradient_gap",
    "verify_gap_sandwich",
]

LEMMA_SLACK = 1e-10


@dataclass
class LemmaReport:
    """One lemma instance: the integral, the bound it is compared with, and
    the margin ``quad_value - bound`` (for two-sided checks, the smaller of
    the two margins)."""

    lemma_id: str
    inputs: dict
    quad_value: float
    closed_or_bound_value: float
    margin: float
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.margin >= -LEMMA_SLACK * (1.0 + abs(self.quad_value))

    def to_record(self):
        rec = {"lemma_id": self.lemma_id}
        for k, v in self.inputs.items():
            rec[k] = " ".join(repr(float(c)) for c in np.ravel(v)) if np.ndim(v) else v
        rec.update(quad_value=self.quad_value, bound=self.closed_or_bound_value,
                   margin=self.margin, passed=self.passed)
        rec.update(self.extra)
        return rec


def _norm(v):
    return float(np.linalg.norm(v))


def _pow(r, e):
    # 0**0 = 1, so p = 2 makes every |.|^(p-2) identically one
    return 1.0 if e == 0 else r**e


# -- double integral ----------------------------------------------------------


def j_double(v1, v2, delta, p, quad=None):
    """Tensor Gauss-Legendre value of int_0^1 int_0^1 |v1 - (t - s delta) v2|^(p-2) ds dt."""
    v1, v2 = np.asarray(v1, dtype=float), np.asarray(v2, dtype=float)
    m = (quad or QuadratureSpec(64)).nodes_1d
    if p == 2.0:
        return 1.0

    def f(s, t):
        z = v1 - (t - s * delta)[:, None] * v2
        return np.linalg.norm(z, axis=1) ** (p - 2.0)

    return gauss_legendre_unit_square(f, m)


def closed_I(delta, p):
    """2 delta/(p-1) - 2/(p(p-1)) + 2 (1-delta)^p / (p(p-1))."""
    return 2.0 * delta / (p - 1.0) - 2.0 / (p * (p - 1.0)) + 2.0 * (1.0 - delta) ** p / (p * (p - 1.0))


def closed_II(delta, p):
    """1/(p(p-1)) - delta^p/(p(p-1)) - (1-delta)^p/(p(p-1))."""
    return (1.0 - delta**p - (1.0 - delta) ** p) / (p * (p - 1.0))


def _strip_integral(lo, hi, delta, weight, eps):
    def inner(sigma):
        a, b = sigma - delta, sigma
        pieces = [(a, min(b, 0.0)), (max(a, 0.0), b)]
        return sum(integrate.quad(weight, u, v, epsabs=eps, epsrel=eps, limit=200)[0]
                   for u, v in pieces if v > u)

    return integrate.quad(inner, lo, hi, epsabs=eps, epsrel=eps, limit=200)[0]


def quad_I(delta, p, eps=1e-13):
    """Adaptive-quadrature value of int_0^delta int_{sigma-delta}^sigma (1-|tau|)^(p-2) dtau dsigma."""
    return _strip_integral(0.0, delta, delta, lambda tau: (1.0 - abs(tau)) ** (p - 2.0), eps)


def quad_II(delta, p, eps=1e-13):
    """Adaptive-quadrature value of int_delta^1 int_{sigma-delta}^sigma (1-tau)^(p-2) dtau dsigma."""
    return _strip_integral(delta, 1.0, delta, lambda tau: (1.0 - tau) ** (p - 2.0), eps)


def window_constant(p):
    """min over alpha in [-1, 1] of int_{alpha-1/2}^alpha |s|^(p-2) ds.

    The window of length 1/2 captures the least mass when centred at the
    origin (alpha = 1/4), giving 2 (1/4)^(p-1) / (p-1).
    """
    return 2.0 * 0.25 ** (p - 1.0) / (p - 1.0)


def _ratio(delta, p):
    return (closed_I(delta, p) + closed_II(delta, p)) / delta


@lru_cache(maxsize=128)
def j_lower_constant(p):
    """Return (C_p, delta_0) for the lower bound on the double integral.

    delta_0 is the largest delta <= 1/2 for which (I + II)/delta stays above
    half of its small-delta limit 1/(p-1). C_p is the smaller of
    inf_{0 < delta <= delta_0} (I + II)/delta (case |v1| >= |v2|) and
    :func:`window_constant` (case |v1| <= |v2|).
    """
    p = float(p)
    limit = 1.0 / (p - 1.0)
    grid = np.linspace(1e-6, 0.5, 2001)
    ratio = np.array([_ratio(d, p) for d in grid])
    below = np.flatnonzero(ratio < 0.5 * limit)
    if below.size == 0:
        delta0 = 0.5
    else:
        k = below[0]
        delta0 = optimize.brentq(lambda d: _ratio(d, p) - 0.5 * limit, grid[k - 1], grid[k])
    case1 = min(limit, float(np.min(ratio[grid <= delta0])))
    res = optimize.minimize_scalar(lambda d: _ratio(d, p), bounds=(1e-6, delta0), method="bounded")
    case1 = min(case1, float(res.fun))
    return min(case1, window_constant(p)), float(delta0)


def verify_j_lower(v1, v2, delta, p, quad=None):
    """Check J >= C_p max(|v1|, |v2|)^(p-2) at one input (delta <= delta_0)."""
    C, delta0 = j_lower_constant(p)
    if not 0.0 < delta <= delta0:
        raise ValueError(f"delta must lie in (0, {delta0}], got {delta}")
    J = j_double(v1, v2, delta, p, quad)
    bound = C * _pow(max(_norm(v1), _norm(v2)), p - 2.0)
    return LemmaReport("L3.2", {"v1": v1, "v2": v2, "delta": delta, "p": p}, J, bound, J - bound,
                       {"C_p": C, "delta0": delta0})


# -- single integral ----------------------------------------------------------


def j_single(v1, v2, p, nodes=64):
    """int_0^1 |v1 + t v2|^(p-2) dt, split at the closest approach to the origin."""
    v1, v2 = np.asarray(v1, dtype=float), np.asarray(v2, dtype=float)
    if p == 2.0:
        return 1.0
    breaks = [0.0, 1.0]
    vv = float(v2 @ v2)
    if vv > 0:
        t0 = -float(v1 @ v2) / vv
        if 0.0 < t0 < 1.0:
            breaks = [0.0, t0, 1.0]
    t, w = composite_gauss_legendre(breaks, nodes)
    return float(w @ np.linalg.norm(v1 + t[:, None] * v2, axis=1) ** (p - 2.0))


def single_constants(p):
    """(c_p, C_p) with c_p = min(1/(p-1), 2^(2-p)/(p-1)) and C_p = (2^(p-1) - 1)/(p-1)."""
    p = float(p)
    return min(1.0 / (p - 1.0), 2.0 ** (2.0 - p) / (p - 1.0)), (2.0 ** (p - 1.0) - 1.0) / (p - 1.0)


def verify_j_single_sandwich(v1, v2, p):
    c, C = single_constants(p)
    J = j_single(v1, v2, p)
    m = _pow(max(_norm(v1), _norm(v2)), p - 2.0)
    lower, upper = c * m, C * m
    margin = min(J - lower, upper - J)
    return LemmaReport("L5.2", {"v1": v1, "v2": v2, "p": p}, J, lower, margin,
                       {"upper": upper, "c_p": c, "C_p": C})


# -- gradient gap -------------------------------------------------------------


def gradient_gap(cost, a, b):
    """<Dh(a) - Dh(b), a - b>."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float((cost.grad(a) - cost.grad(b)) @ (a - b))


def verify_gap_sandwich(cost, a, b, lam, Lam):
    """Check both sides of the gap sandwich and |Dh(a) - Dh(b)| >= lambda c_p |a - b|^(p-1).

    The reported margin is the smallest of the three margins.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    p = cost.exponent
    c, C = single_constants(p)
    d = _norm(a - b)
    gap = gradient_gap(cost, a, b)
    lower = lam * c * d**p
    upper = Lam * C * d**2 * max(_pow(_norm(b), p - 2.0), _pow(d, p - 2.0))
    grad_diff = _norm(cost.grad(a) - cost.grad(b))
    norm_lower = lam * c * d ** (p - 1.0)
    margin = min(gap - lower, upper - gap, grad_diff - norm_lower)
    return LemmaReport("L5.3", {"a": a, "b": b, "p": p}, gap, lower, margin,
                       {"upper": upper, "grad_diff": grad_diff, "norm_lower": norm_lower})
