"""Pointwise regularity diagnostics for sampled maps.

* Calderon-Zygmund classes: T^{k,q}(x0) asks for a polynomial of degree
  < k with (avg_{B_r} |f - P|^q)^(1/q) = O(r^k); t^{k,q}(x0) allows degree
  <= k and asks for o(r^k). :func:`tkp_profile` measures the normalized
  ratios over a decade of radii.
* :func:`holder_profile` measures sup_{B_R} |Tx - Tx0| / R^(1/(p-1)).
* :func:`bd_inequality_min` evaluates, for nonnegative bumps phi and unit
  directions xi,

      int <D^2h(x - Tx) xi, xi> phi + int (Dh(x - Tx) . xi) d_xi phi,

  which is nonnegative for h-monotone maps (so the symmetrized gradient of
  Dh(x - Tx) is a measure).
* :func:`dh_composition_t11_probe` measures avg_{B_R} |Dh(x - Tx) - Dh(x0 - Tx0)| / R.

Derivatives of the bumps are central grid differences, so pairings with
them are exact summation-by-parts adjoints of grid derivatives of the map
data; bumps are kept two nodes away from the box boundary, which removes
every boundary term.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import InputError, ResolutionError

__all__ = [
    "RegularityProfile",
    "Bump",
    "BOUNDED_FACTOR",
    "LITTLE_O_RATE",
    "radius_decade",
    "sample_centers",
    "tkp_profile",
    "holder_profile",
    "make_bump_family",
    "direction_set",
    "bd_inequality_values",
    "bd_inequality_min",
    "a_entry_pairing",
    "dh_composition_t11_probe",
]

BOUNDED_FACTOR = 2.0
LITTLE_O_RATE = 0.2


def _fmt(v):
    if np.isinf(v):
        return "inf"
    f = Fraction(float(v)).limit_denominator(64)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


@dataclass
class RegularityProfile:
    """Ratios of a pointwise diagnostic over decreasing radii.

    ``fitted_rate`` is the least-squares slope of log(ratio) against
    log(R); ``inf`` when every ratio is at rounding level. ``classification`` is a class
    label such as ``"T^{1,inf}"`` when the diagnostic supports membership,
    else ``"inconclusive"``.
    """

    center: np.ndarray
    radii: np.ndarray
    ratios: np.ndarray
    fitted_rate: float
    classification: str

    @property
    def bounded(self):
        return self.classification != "inconclusive"

    def to_rows(self):
        c = " ".join(repr(float(v)) for v in self.center)
        return [{"center": c, "radius": float(r), "ratio": float(q), "rate": self.fitted_rate,
                 "classification": self.classification} for r, q in zip(self.radii, self.ratios)]


def _zero(ratios, tol=0.0):
    return bool(np.all(ratios <= tol))


def _bounded(ratios, tol=0.0):
    # growth toward small radii is what matters; decay (ratios[0] is the largest R) is fine
    if _zero(ratios, tol):
        return True
    return bool(np.max(ratios) <= BOUNDED_FACTOR * max(ratios[0], np.median(ratios)))


def _rate(radii, ratios, tol=0.0):
    if _zero(ratios, tol):
        return float("inf")
    pos = ratios > 0
    if pos.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(radii[pos]), np.log(ratios[pos]), 1)[0])


def _roundoff(f, radii, k):
    # ratios below this are indistinguishable from rounding in the node data
    return 1e-10 * (1.0 + float(np.max(np.abs(f)))) / float(radii[-1]) ** k


def radius_decade(r_max, count=6):
    """``count`` geometric radii from ``r_max`` down to ``r_max / 10``."""
    return r_max * np.logspace(0.0, -1.0, count)


def sample_centers(smap, margin, count, seed=0):
    """Seeded distinct node indices whose ``margin``-ball lies in the box."""
    ok = np.all((smap.points - margin >= smap.box_min - 1e-12)
                & (smap.points + margin <= smap.box_max + 1e-12), axis=1)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise InputError("no node is far enough from the boundary")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(idx, size=min(count, idx.size), replace=False))


def _center(smap, x0):
    if np.ndim(x0) == 0:
        return int(x0)
    k = smap.node_index(x0)
    if np.linalg.norm(smap.points[k] - np.asarray(x0, dtype=float)) > 1e-9 * max(1.0, smap.diameter):
        raise InputError("center must be a grid node")
    return k


def _balls(smap, k, radii):
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(np.diff(radii) >= 0) or radii[-1] <= 0:
        raise InputError("radii must be a strictly decreasing list of positive values")
    x0 = smap.points[k]
    if not smap.contains_ball(x0, radii[0]):
        raise InputError("largest ball leaves the domain box")
    d = np.linalg.norm(smap.points - x0, axis=1)
    members = [np.flatnonzero(d <= R * (1 + 1e-12)) for R in radii]
    need = 2 * (smap.dimension + 1)
    if members[-1].size < need:
        raise ResolutionError(f"smallest ball holds {members[-1].size} nodes (need {need})")
    return x0, radii, members


def _poly_residual(pts, vals, degree, x0, anchor=None):
    if anchor is not None:
        return vals - anchor
    X = np.ones((pts.shape[0], 1))
    if degree >= 1:
        X = np.hstack([X, pts - x0])
    coef, *_ = np.linalg.lstsq(X, vals, rcond=None)
    return vals - X @ coef


def tkp_profile(smap, x0, k, q, radii, little=False, anchor="lstsq", data=None):
    """Normalized L^q distance to the best polynomial over shrinking balls.

    Parameters
    ----------
    smap : SampledMap
    x0 : int or array
        Grid node (index or coordinates).
    k, q : float
        Order and integrability; ``q = np.inf`` uses the sup over nodes.
    radii : decreasing sequence of radii.
    little : bool
        False tests T^{k,q} (polynomial degree < k), True tests t^{k,q}
        (degree <= k). Degrees above 1 are not supported.
    anchor : {"lstsq", "center"}
        For constant polynomials, "center" uses the value at x0 instead of
        the least-squares constant.
    data : array, optional
        Node values to analyse instead of ``smap.values``.
    """
    degree = int(np.floor(k)) if little else int(np.ceil(k)) - 1
    if degree > 1:
        raise InputError("polynomial degree above 1 is not supported")
    kk = _center(smap, x0)
    f = smap.values if data is None else np.asarray(data, dtype=float).reshape(len(smap.points), -1)
    x0p, radii, members = _balls(smap, kk, radii)
    fixed = f[kk] if (anchor == "center" and degree == 0) else None
    ratios = []
    for R, idx in zip(radii, members):
        res = np.linalg.norm(_poly_residual(smap.points[idx], f[idx], degree, x0p, fixed), axis=1)
        size = res.max() if np.isinf(q) else np.mean(res**q) ** (1.0 / q)
        ratios.append(size / R**k)
    ratios = np.array(ratios)
    tol = _roundoff(f, radii, k)
    rate = _rate(radii, ratios, tol)
    label = f"{'t' if little else 'T'}^{{{_fmt(k)},{_fmt(q)}}}"
    ok = _bounded(ratios, tol) and (not little or rate >= LITTLE_O_RATE)
    return RegularityProfile(x0p, radii, ratios, rate, label if ok else "inconclusive")


def holder_profile(smap, x0, p, radii):
    """sup_{nodes in B_R} |Tx - Tx0| / R^(1/(p-1)) over shrinking radii."""
    kk = _center(smap, x0)
    x0p, radii, members = _balls(smap, kk, radii)
    e = 1.0 / (p - 1.0)
    Tx0 = smap.values[kk]
    ratios = np.array([np.linalg.norm(smap.values[idx] - Tx0, axis=1).max() / R**e
                       for R, idx in zip(radii, members)])
    label = f"T^{{{_fmt(e)},inf}}"
    tol = _roundoff(smap.values, radii, e)
    return RegularityProfile(x0p, radii, ratios, _rate(radii, ratios, tol),
                             label if _bounded(ratios, tol) else "inconclusive")


def dh_composition_t11_probe(cost, smap, x0, radii):
    """avg_{nodes in B_R} |Dh(x - Tx) - Dh(x0 - Tx0)| / R over shrinking radii."""
    kk = _center(smap, x0)
    x0p, radii, members = _balls(smap, kk, radii)
    g = cost.grad(smap.points - smap.values)
    ratios = np.array([np.mean(np.linalg.norm(g[idx] - g[kk], axis=1)) / R
                       for R, idx in zip(radii, members)])
    tol = _roundoff(g, radii, 1.0)
    return RegularityProfile(x0p, radii, ratios, _rate(radii, ratios, tol),
                             "T^{1,1}" if _bounded(ratios, tol) else "inconclusive")


# -- bounded deformation ------------------------------------------------------


def _psi(t):
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


@dataclass
class Bump:
    """Tensor-product bump prod_k psi((x_k - c_k)/w_k), psi(t) = exp(1 - 1/(1 - t^2))."""

    center: np.ndarray
    half_width: np.ndarray

    def __call__(self, x):
        t = (np.asarray(x, dtype=float) - self.center) / self.half_width
        return np.prod(_psi(t), axis=-1)

    def scaled(self, factor):
        return _ScaledBump(self, factor)


class _ScaledBump:
    def __init__(self, base, factor):
        self.base, self.factor = base, factor
        self.center, self.half_width = base.center, base.half_width

    def __call__(self, x):
        return self.factor * self.base(x)


def make_bump_family(smap, count=20, seed=0, width_range=(0.08, 0.25)):
    """Seeded bumps with half-widths drawn as fractions of the box extent
    and supports kept two grid spacings inside the box."""
    rng = np.random.default_rng(seed)
    extent = smap.box_max - smap.box_min
    pad = 2.0 * smap.spacing
    bumps = []
    for _ in range(count):
        w = rng.uniform(*width_range) * extent
        lo, hi = smap.box_min + w + pad, smap.box_max - w - pad
        bumps.append(Bump(rng.uniform(lo, hi), w))
    return bumps


def direction_set(n):
    """Unit directions: coordinate axes plus diagonals.

    n = 2 gives e1, e2, (e1 +/- e2)/sqrt 2 and (2 e1 +/- e2)/sqrt 5 (six
    directions); n >= 3 gives the axes and the diagonals (e_i + e_j)/sqrt 2.
    """
    eye = np.eye(n)
    dirs = list(eye)
    if n == 2:
        dirs += [np.array([1.0, 1.0]), np.array([1.0, -1.0]),
                 np.array([2.0, 1.0]), np.array([2.0, -1.0])]
    else:
        dirs += [eye[i] + eye[j] for i in range(n) for j in range(i + 1, n)]
    return np.array([d / np.linalg.norm(d) for d in dirs])


def _bump_grid(smap, phi):
    pad = 1.0 * smap.spacing
    lo = np.asarray(phi.center) - np.asarray(phi.half_width)
    hi = np.asarray(phi.center) + np.asarray(phi.half_width)
    if np.any(lo < smap.box_min + pad - 1e-12) or np.any(hi > smap.box_max - pad + 1e-12):
        raise InputError("bump support must stay at least one grid spacing inside the box")
    vals = np.asarray(phi(smap.points), dtype=float)
    if np.any(vals < 0):
        raise InputError("test functions must be nonnegative")
    grid = vals.reshape(smap.grid_shape)
    grads = np.gradient(grid, *smap.spacing)
    if smap.dimension == 1:
        grads = [grads]
    return vals, np.stack([g.ravel() for g in grads], axis=1)


def _bd_value(smap, D1, D2, phi_vals, phi_grad, xi):
    second = np.einsum("ni,nij,nj->n", np.broadcast_to(xi, D1.shape), D2,
                       np.broadcast_to(xi, D1.shape))
    return smap.cell_volume * float(np.sum(second * phi_vals + (D1 @ xi) * (phi_grad @ xi)))


def _check_unit(xi):
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-9:
        raise InputError("direction xi must be a unit vector")
    return xi


def bd_inequality_values(cost, smap, xi, bumps):
    """Grid values of the bounded-deformation functional, one per bump,
    together with the bump masses."""
    xi = _check_unit(xi)
    z = smap.points - smap.values
    D1, D2 = cost.grad(z), cost.hess(z)
    values, masses = [], []
    for phi in bumps:
        pv, pg = _bump_grid(smap, phi)
        values.append(_bd_value(smap, D1, D2, pv, pg, xi))
        masses.append(smap.cell_volume * float(pv.sum()))
    return np.array(values), np.array(masses)


def bd_inequality_min(cost, smap, xi, bumps):
    """Minimum over ``bumps`` of the bounded-deformation functional."""
    values, _ = bd_inequality_values(cost, smap, xi, bumps)
    return float(values.min())


def a_entry_pairing(cost, smap, i, j, phi):
    """<a_ij, phi> with a_ij = h_ij(x - Tx) - (d_j h_i(x - Tx) + d_i h_j(x - Tx))/2.

    The derivative terms act on phi: <d_j f, phi> = -<f, d_j phi>.
    """
    z = smap.points - smap.values
    D1, D2 = cost.grad(z), cost.hess(z)
    pv, pg = _bump_grid(smap, phi)
    body = D2[:, i, j] * pv + 0.5 * (D1[:, i] * pg[:, j] + D1[:, j] * pg[:, i])
    return smap.cell_volume * float(body.sum())
