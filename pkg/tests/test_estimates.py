import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from hmono.cost_kernel import CostFunction
from hmono.estimates import (AffineFrame, BallSpec, branch_constant, calibrate_constant,
                             delta_integral, delta_threshold, g_lower_bound_check,
                             green_identity_residual, h_profile, k1_factor, k2_factor,
                             linfty_bound, profile_table, r_star, required_constant, residual,
                             scaling_exponent_probe)
from hmono.exceptions import (DomainError, InputError, ProbeInvalidError, ResolutionError,
                              UnsupportedDimensionError)
from hmono.lemma_suite import j_lower_constant
from hmono.monotone_core import SampledMap
from hmono.quadrature import unit_ball_volume
from hmono.transport_gen import Density, make_generator_map
from oracles import ball_integral_abs_x


def grid_map(f, lo=-1.0, hi=1.0, m=64, n=2):
    return SampledMap.from_function(f, [lo] * n, [hi] * n, (m,) * n)


def test_closed_form_examples():
    assert h_profile(0.0, 2.0, 1.5, 2, 3) == pytest.approx(1.5 * 4.0)
    assert h_profile(1 / 3, 1.0, 1.0, 3, 2) == pytest.approx(4 / 3)
    assert r_star(1 / 3, 3, 2) == pytest.approx(1.0)
    assert r_star(0.0, 3, 2) == 0.0
    assert r_star(1.0, 2, 3) == pytest.approx(1.0)
    assert delta_threshold(2.0, 0.5, 2, 2) == pytest.approx(1 / 16)
    assert delta_threshold(4.0, 0.5, 3, 2) == pytest.approx(1 / 3)
    assert delta_threshold(1.0, 1 - 1e-9, 2, 3) < 1e-30
    with pytest.raises(DomainError):
        h_profile(1.0, 0.0, 1.0, 2, 2)
    with pytest.raises(DomainError):
        r_star(-1.0, 2, 2)


@pytest.mark.parametrize("n, p, delta", [(2, 2, 0.3), (2, 3, 1e-3), (3, 2.5, 5.0), (3, 4, 1e-6)])
def test_r_star_minimizes_h(n, p, delta):
    r0 = r_star(delta, n, p)
    H0 = h_profile(delta, r0, 1.0, n, p)
    grid = r0 * np.logspace(-1, 1, 100)
    assert all(H0 <= h_profile(delta, r, 1.0, n, p) * (1 + 1e-14) for r in grid)
    eps = 1e-4 * r0
    assert h_profile(delta, r0 - eps, 1.0, n, p) > H0 < h_profile(delta, r0 + eps, 1.0, n, p)
    res = minimize_scalar(lambda lr: h_profile(delta, np.exp(lr), 1.0, n, p),
                          bracket=(np.log(r0) - 1, np.log(r0) + 1), tol=1e-12)
    assert np.exp(res.x) == pytest.approx(r0, rel=1e-5)


def test_delta_integral_examples():
    ident = grid_map(lambda x: x, m=129)
    ball = BallSpec([0.0, 0.0], 1.0)
    assert delta_integral(ident, AffineFrame.identity(2), ball, 2.0) == 0.0
    val = delta_integral(ident, AffineFrame.zero(2), ball, 2.0)
    assert val == pytest.approx(ball_integral_abs_x(1.0), rel=0.02)
    c = np.array([0.3, -0.4])
    shifted = grid_map(lambda x: x + c, m=129)
    val = delta_integral(shifted, AffineFrame.identity(2), ball, 2.0)
    assert val == pytest.approx(0.5 * np.pi, rel=0.02)


def test_delta_integral_errors():
    m = grid_map(lambda x: x, m=9)
    with pytest.raises(InputError):
        delta_integral(m, AffineFrame.zero(2), BallSpec([0.5, 0.5], 0.9), 2.0)
    with pytest.raises(ResolutionError):
        delta_integral(m, AffineFrame.zero(2), BallSpec([0.0, 0.0], 0.2), 2.0)
    with pytest.raises(DomainError):
        BallSpec([0, 0], 1.0, 1.0)


def test_zero_residual_gives_zero_bound():
    m = grid_map(lambda x: 2 * x + 1)
    rep = linfty_bound(m, AffineFrame(2 * np.eye(2), np.ones(2)), BallSpec([0, 0], 0.8), 2.0)
    assert rep.bound == 0.0 and rep.empirical_sup == pytest.approx(0.0, abs=1e-14) and rep.holds
    rep = linfty_bound(grid_map(lambda x: x), AffineFrame.identity(2), BallSpec([0, 0], 0.8), 3.0)
    assert rep.bound == 0.0 and rep.empirical_sup == 0.0


@pytest.mark.parametrize("n, p, beta", [(2, 2, 0.5), (2, 3, 0.3), (3, 2, 0.5), (3, 3.5, 0.7)])
def test_branch_consistency(n, p, beta):
    rng = np.random.default_rng(0)
    R = 0.8
    m = grid_map(lambda x: x + 0.0, m=17 if n == 3 else 41, n=n)
    bump = np.exp(-np.sum(m.points**2, axis=1) / 0.1)[:, None] * rng.normal(size=n)
    for scale in np.logspace(-8, 1, 10):
        smap = m.with_values(m.points + scale * bump)
        rep = linfty_bound(smap, AffineFrame.identity(n), BallSpec(np.zeros(n), R, beta), p)
        small_by_r0 = rep.r_star <= (1 - beta) * R / 2 * (1 + 1e-12)
        small_by_avg = rep.average ** (1 / (p - 1)) <= branch_constant(n, p, beta) * R * (1 + 1e-12)
        assert (rep.branch == "small") == small_by_r0 == small_by_avg
        assert (rep.branch == "small") == (rep.delta <= rep.delta0)


def test_bound_formulas_match_k_constants():
    m = grid_map(lambda x: x + 0.05 * np.sin(3 * x), m=41)
    ball = BallSpec([0, 0], 0.8, 0.5)
    for p in (2.0, 3.0):
        for C in (0.5, 2.0):
            rep = linfty_bound(m, AffineFrame.identity(2), ball, p, C)
            n, D, R = 2, rep.delta, 0.8
            if rep.branch == "small":
                want = (C * k1_factor(n, p) * D ** ((p - 1) / (n + p - 1))) ** (1 / (p - 1))
                # closed form K1 R (R^-(p-1) avg)^(1/(n+p-1))
                alt = rep.K1 * R * (R ** -(p - 1) * rep.average) ** (1 / (n + p - 1))
            else:
                want = (C * k2_factor(n, p, 0.5) * R**-n * D) ** (1 / (p - 1))
                alt = rep.K2 * R * (R ** -(p - 1) * rep.average) ** (1 / (p - 1))
            assert rep.bound == pytest.approx(want, rel=1e-12)
            assert rep.bound == pytest.approx(alt, rel=1e-12)


def test_bound_monotone_in_scale():
    m = grid_map(lambda x: x, m=41)
    u = 0.1 * np.cos(2 * m.points)
    ball = BallSpec([0, 0], 0.8)
    prev = 0.0
    for eps in np.logspace(-6, 1, 15):
        b = linfty_bound(m.with_values(m.points + eps * u), AffineFrame.identity(2), ball, 2.5).bound
        assert b >= prev
        prev = b


def test_profile_table_and_required_constant():
    m = grid_map(lambda x: x + 0.01 * x**2, m=41)
    rep = linfty_bound(m, AffineFrame.identity(2), BallSpec([0, 0], 0.8), 2.0, 1.0)
    table = profile_table(rep, count=20)
    assert table.shape == (20, 2)
    assert np.argmin(table[:, 1]) in (9, 10)
    C = required_constant(rep)
    rep2 = linfty_bound(m, AffineFrame.identity(2), BallSpec([0, 0], 0.8), 2.0, C)
    assert rep2.empirical_sup == pytest.approx(rep2.bound, rel=1e-10)
    assert calibrate_constant([(m, AffineFrame.identity(2), BallSpec([0, 0], 0.8))], 2.0) == C


@pytest.mark.parametrize("n, p", [(2, 2), (3, 3)])
def test_scaling_probe_small_branch(n, p):
    m = grid_map(lambda x: x, m=17 if n == 3 else 41, n=n)
    u = 0.1 * np.sin(3 * m.points)
    smap = m.with_values(m.points + u)
    probe = scaling_exponent_probe(smap, AffineFrame.identity(n), BallSpec(np.zeros(n), 0.8),
                                   p, np.logspace(-6, -5, 5))
    assert probe.branch == "small"
    assert probe.slope == pytest.approx((p - 1) / (n + p - 1), abs=0.03)


def test_scaling_probe_errors():
    m = grid_map(lambda x: x + 0.1 * np.sin(3 * x), m=41)
    ball = BallSpec([0, 0], 0.8)
    with pytest.raises(ProbeInvalidError):
        scaling_exponent_probe(m, AffineFrame.identity(2), ball, 2.0, [1, 2, 3])
    with pytest.raises(ProbeInvalidError):
        scaling_exponent_probe(m, AffineFrame.identity(2), ball, 2.0, np.logspace(-8, 2, 6))


def test_g_lower_bound_check():
    c = CostFunction.isotropic(2, 2)
    m = grid_map(lambda x: x + np.array([0.2, -0.1]), m=9)
    C2, d0 = j_lower_constant(2.0)
    lhs, rhs = g_lower_bound_check(c, m, AffineFrame.zero(2), 10, 0.5 * d0)
    u = m.values[10]
    assert rhs == pytest.approx(0.5 * d0 * 2.0 * C2 * u @ u)
    assert lhs >= rhs
    assert g_lower_bound_check(c, m, AffineFrame(np.eye(2), [0.2, -0.1]), 10, 0.1) is None
    with pytest.raises(DomainError):
        g_lower_bound_check(c, m, AffineFrame.zero(2), 10, 0.9)


def test_g_lower_bound_on_ot_maps():
    violations, tested = 0, 0
    for p in (2.0, 3.0):
        c = CostFunction.isotropic(2, p)
        _, d0 = j_lower_constant(p)
        for seed in range(2):
            m = make_generator_map("ot_grid", c, ((0, 0), (1, 1), (12, 12)),
                                   density=Density("two_bump"), seed=seed)
            frame = AffineFrame.fit(m, [0.5, 0.5], 0.5)
            for node in np.random.default_rng(seed).choice(144, 50, replace=False):
                out = g_lower_bound_check(c, m, frame, int(node), 0.5 * d0)
                if out is not None:
                    tested += 1
                    violations += out[0] < out[1] - 1e-12
    assert tested == 200 and violations == 0


def test_g_lower_bound_vanishes_with_u():
    c = CostFunction.isotropic(2, 3)
    _, d0 = j_lower_constant(3.0)
    vals = []
    for eps in (1e-1, 1e-3, 1e-5):
        m = grid_map(lambda x: x + eps, m=5)
        vals.append(g_lower_bound_check(c, m, AffineFrame.identity(2), 7, 0.5 * d0))
    assert vals[-1][0] < 1e-12 and vals[-1][1] < 1e-12


def test_residual_and_frame():
    m = grid_map(lambda x: 3 * x - 1, m=5)
    f = AffineFrame.fit(m, [0, 0], 1.0)
    np.testing.assert_allclose(f.A, 3 * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(residual(m, f), 0.0, atol=1e-12)
    assert f.op_norm == pytest.approx(3.0)
    with pytest.raises(InputError):
        AffineFrame(np.eye(3), np.zeros(2))


# -- Green identity -------------------------------------------------------------

Y = np.array([0.1, -0.2, 0.3])


def test_green_constant_and_linear():
    z = lambda x: np.zeros(len(x))  # noqa: E731
    assert green_identity_residual(lambda x: np.full(len(x), 2.0), Y, 0.7, z) <= 1e-14
    a = np.array([1.0, -0.5, 2.0])
    for r in (0.5, 1.0):
        assert green_identity_residual(lambda x: 0.3 + x @ a, Y, r, z) <= 1e-9


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("r", [0.5, 1.0])
def test_green_quadratic(n, r):
    y = np.linspace(0.1, 0.4, n)
    v = lambda x: np.sum((x - y) ** 2, axis=1)  # noqa: E731
    lap = lambda x: np.full(len(x), 2.0 * n)  # noqa: E731
    assert green_identity_residual(v, y, r, lap) <= 1e-3 * r**2


def test_green_terms_for_quadratic():
    # ball average of |x - y|^2 is n r^2/(n + 2); correction is its negative
    from hmono.quadrature import polar_ball_quadrature

    n, r = 3, 0.8
    bq = polar_ball_quadrature(Y, r, 32, 32)
    assert bq.average(np.sum((bq.nodes - Y) ** 2, axis=1)) == pytest.approx(n / (n + 2) * r**2)


def test_green_refinement_and_fd_default():
    v = lambda x: np.exp(0.9 * x[:, 0] - 0.4 * x[:, 1]) * (1 + x[:, 2] ** 2)  # noqa: E731
    lap = lambda x: np.exp(0.9 * x[:, 0] - 0.4 * x[:, 1]) * (0.97 * (1 + x[:, 2] ** 2) + 2)  # noqa: E731
    coarse = green_identity_residual(v, Y, 1.0, lap, nodes=3)
    fine = green_identity_residual(v, Y, 1.0, lap, nodes=6)
    assert coarse / fine >= 2.5
    assert green_identity_residual(v, Y, 1.0, lap, nodes=16) <= 1e-12
    # the finite-difference Laplacian is limited by its truncation error
    assert green_identity_residual(v, Y, 1.0, nodes=16) <= 1e-6


def test_green_errors():
    with pytest.raises(UnsupportedDimensionError):
        green_identity_residual(lambda x: x[:, 0], np.zeros(2), 1.0)
    with pytest.raises(DomainError):
        green_identity_residual(lambda x: x[:, 0], np.zeros(3), 0.0)


def test_unit_ball_volume_in_report():
    m = grid_map(lambda x: x + 0.1, m=41)
    rep = linfty_bound(m, AffineFrame.identity(2), BallSpec([0, 0], 0.5), 2.0)
    assert rep.average == pytest.approx(rep.delta / (unit_ball_volume(2) * 0.25))
    assert rep.average == pytest.approx(0.1 * np.sqrt(2), rel=0.02)
    rec = rep.to_record()
    assert rec["branch"] == rep.branch and rec["holds"] is True
