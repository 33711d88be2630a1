"""Homogeneous cost kernels h and their first two derivatives.

Two built-in forms are supported, both positively homogeneous of degree p:

* isotropic      h(x) = |x|^p
* anisotropic    h(x) = (x^T M x)^(p/2) with M symmetric positive definite

A third, user supplied form wraps arbitrary (h, Dh, D^2 h) callables and is
admitted only after sampled homogeneity checks pass.

All evaluation functions broadcast over leading axes: ``x`` may have shape
``(..., n)``. We use the convention 0^0 = 1, so for p = 2 the Hessian is the
constant 2M everywhere, and for p > 2 the Hessian at the origin is the zero
matrix (the continuous extension of a degree p-2 homogeneous function).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import norm, qmc, special_ortho_group

from .exceptions import DomainError, InputError, StructuralHypothesisError

__all__ = [
    "CostFunction",
    "EllipticityBounds",
    "eval_h",
    "grad_h",
    "hess_h",
    "ellipticity_bounds",
    "sphere_sample",
    "check_homogeneity",
]


def _finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("cost kernel evaluated at a non-finite point")
    return x


@dataclass(eq=False)
class CostFunction:
    """Cost kernel h with exponent ``exponent`` (p >= 2) on R^``dimension``.

    Use :meth:`isotropic`, :meth:`anisotropic` or :meth:`from_callables`
    rather than the raw constructor.
    """

    dimension: int
    exponent: float
    matrix: Optional[np.ndarray] = None
    callables: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise InputError(f"dimension must be an integer >= 2, got {self.dimension}")
        self.dimension = int(self.dimension)
        if not np.isfinite(self.exponent) or self.exponent < 2:
            raise InputError(f"exponent must be >= 2, got {self.exponent}")
        self.exponent = float(self.exponent)
        if self.matrix is not None:
            M = np.asarray(self.matrix, dtype=float)
            n = self.dimension
            if M.shape != (n, n):
                raise InputError(f"matrix must be {n}x{n}, got shape {M.shape}")
            if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
                raise InputError("matrix must be symmetric")
            try:
                np.linalg.cholesky(M)
            except np.linalg.LinAlgError:
                raise InputError("matrix must be positive definite") from None
            self.matrix = 0.5 * (M + M.T)

    @classmethod
    def isotropic(cls, dimension, exponent):
        return cls(dimension, exponent)

    @classmethod
    def anisotropic(cls, matrix, exponent):
        M = np.asarray(matrix, dtype=float)
        return cls(M.shape[0], exponent, matrix=M)

    @classmethod
    def from_callables(cls, dimension, exponent, h, grad, hess, seed=0):
        """Wrap user callables acting on single vectors.

        The triple is validated by :func:`check_homogeneity` and by a
        finite-difference consistency check; failures raise
        StructuralHypothesisError.
        """
        cost = cls(dimension, exponent, callables=(h, grad, hess))
        check_homogeneity(cost, seed=seed)
        _check_derivatives(cost, seed=seed)
        return cost

    @property
    def form(self):
        if self.callables is not None:
            return "custom"
        return "isotropic" if self.matrix is None else "anisotropic"

    @property
    def metric(self):
        """The matrix M of the quadratic form (identity for the isotropic form)."""
        return np.eye(self.dimension) if self.matrix is None else self.matrix

    def __call__(self, x):
        return self.h(x)

    # -- evaluation -------------------------------------------------------

    def _quad(self, x):
        if self.matrix is None:
            return x, np.einsum("...i,...i->...", x, x)
        Mx = x @ self.matrix
        return Mx, np.einsum("...i,...i->...", x, Mx)

    def _check_shape(self, x):
        x = _finite(x)
        if x.shape[-1:] != (self.dimension,):
            raise InputError(f"expected trailing dimension {self.dimension}, got {x.shape}")
        return x

    def h(self, x):
        x = self._check_shape(x)
        if self.callables is not None:
            return _apply(self.callables[0], x, ())
        _, q = self._quad(x)
        return q ** (0.5 * self.exponent)

    def grad(self, x):
        x = self._check_shape(x)
        if self.callables is not None:
            return _apply(self.callables[1], x, (self.dimension,))
        p = self.exponent
        Mx, q = self._quad(x)
        # 0**0 == 1 gives 2*M*x for p = 2; 0**positive == 0 otherwise
        return (p * q ** (0.5 * p - 1.0))[..., None] * Mx

    def hess(self, x):
        x = self._check_shape(x)
        n = self.dimension
        if self.callables is not None:
            return _apply(self.callables[2], x, (n, n))
        p = self.exponent
        Mx, q = self._quad(x)
        first = (p * q ** (0.5 * p - 1.0))[..., None, None] * self.metric
        if p == 2.0:
            return np.broadcast_to(first, x.shape[:-1] + (n, n)).copy()
        coef = np.zeros_like(q)
        pos = q > 0
        coef[pos] = p * (p - 2.0) * q[pos] ** (0.5 * p - 2.0)
        return first + coef[..., None, None] * Mx[..., :, None] * Mx[..., None, :]

    def laplacian(self, x):
        return np.trace(self.hess(x), axis1=-2, axis2=-1)


def _apply(func, x, out_shape):
    flat = x.reshape(-1, x.shape[-1])
    out = np.array([np.asarray(func(v), dtype=float) for v in flat])
    return out.reshape(x.shape[:-1] + out_shape)


def eval_h(cost, x):
    """h(x); raises DomainError for non-finite input."""
    out = cost.h(x)
    return float(out) if np.ndim(out) == 0 else out


def grad_h(cost, x):
    """Dh(x), homogeneous of degree p-1."""
    return cost.grad(x)


def hess_h(cost, x):
    """D^2 h(x), symmetric and homogeneous of degree p-2."""
    return cost.hess(x)


@dataclass(frozen=True)
class EllipticityBounds:
    """Extreme Hessian eigenvalues on the unit sphere."""

    lam: float
    Lam: float

    def __iter__(self):
        return iter((self.lam, self.Lam))


def sphere_sample(n, count, seed=None):
    """Deterministic quasi-uniform points on S^(n-1).

    n = 2 uses equally spaced angles, n = 3 a Fibonacci lattice, and higher
    dimensions an unscrambled Halton sequence pushed through the normal
    quantile function. With ``seed`` the lattice is rotated by a seeded
    random orthogonal matrix, giving a fresh but reproducible sample.
    """
    if count < 1:
        raise InputError("sphere sample needs at least one point")
    k = np.arange(count, dtype=float)
    if n == 2:
        theta = 2.0 * np.pi * k / count
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    elif n == 3:
        golden = (1.0 + 5.0**0.5) / 2.0
        z = 1.0 - (2.0 * k + 1.0) / count
        r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        phi = 2.0 * np.pi * k / golden
        pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    else:
        u = qmc.Halton(d=n, scramble=False).random(count + 1)[1:]
        g = norm.ppf(u)
        pts = g / np.linalg.norm(g, axis=1, keepdims=True)
    if seed is not None:
        pts = pts @ special_ortho_group.rvs(n, random_state=seed).T
    return pts


def ellipticity_bounds(cost, sphere_sample_count=200):
    """Sampled lambda = min and Lambda = max Hessian eigenvalue on S^(n-1).

    Raises StructuralHypothesisError naming the unit vector at which a
    sampled Hessian fails to be positive definite.
    """
    if sphere_sample_count < 1:
        raise InputError("sphere_sample_count must be >= 1")
    pts = sphere_sample(cost.dimension, int(sphere_sample_count))
    eig = np.linalg.eigvalsh(cost.hess(pts))
    lo = eig[:, 0]
    bad = np.flatnonzero(lo <= 0.0)
    if bad.size:
        u = pts[bad[0]]
        raise StructuralHypothesisError(
            f"Hessian not positive definite at unit vector {u.tolist()} "
            f"(smallest eigenvalue {lo[bad[0]]:.3e})",
            unit_vector=u,
        )
    return EllipticityBounds(float(lo.min()), float(eig[:, -1].max()))


def check_homogeneity(cost, samples=100, scales=(0.5, 2.0, 10.0), seed=0, rtol=1e-9):
    """Verify degree p, p-1, p-2 homogeneity of h, Dh, D^2 h on random points.

    Returns the worst relative defect; raises StructuralHypothesisError when
    it exceeds ``rtol``.
    """
    rng = np.random.default_rng(seed)
    p = cost.exponent
    x = rng.normal(size=(samples, cost.dimension))
    h0, g0, H0 = cost.h(x), cost.grad(x), cost.hess(x)
    if np.any(h0 < 0):
        raise StructuralHypothesisError("h takes a negative value")
    if np.any(np.abs(cost.h(np.zeros(cost.dimension))) > 0):
        raise StructuralHypothesisError("h(0) must vanish")
    worst = 0.0
    for t in scales:
        for got, base, deg in (
            (cost.h(t * x), h0, p),
            (cost.grad(t * x), g0, p - 1),
            (cost.hess(t * x), H0, p - 2),
        ):
            want = t**deg * base
            err = np.abs(got - want) / (1.0 + np.abs(got))
            worst = max(worst, float(err.max()))
    if worst > rtol:
        raise StructuralHypothesisError(f"homogeneity defect {worst:.3e} exceeds {rtol:.1e}")
    return worst


def _check_derivatives(cost, seed=0, step=1e-5, rtol=1e-5):
    rng = np.random.default_rng(seed + 1)
    n = cost.dimension
    x = rng.normal(size=(20, n))
    x *= rng.uniform(0.5, 2.0, size=(20, 1)) / np.linalg.norm(x, axis=1, keepdims=True)
    eye = np.eye(n)
    fd_g = np.stack(
        [(cost.h(x + step * e) - cost.h(x - step * e)) / (2 * step) for e in eye], axis=-1
    )
    fd_H = np.stack(
        [(cost.grad(x + step * e) - cost.grad(x - step * e)) / (2 * step) for e in eye], axis=-1
    )
    g, H = cost.grad(x), cost.hess(x)
    eg = np.abs(fd_g - g).max() / max(1.0, np.abs(g).max())
    eH = np.abs(fd_H - H).max() / max(1.0, np.abs(H).max())
    if max(eg, eH) > rtol:
        raise StructuralHypothesisError(
            f"derivatives inconsistent with h (gradient {eg:.2e}, Hessian {eH:.2e})"
        )
