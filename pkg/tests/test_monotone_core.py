import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hmono.cost_kernel import CostFunction, ellipticity_bounds
from hmono.exceptions import InconsistencyError, InputError
from hmono.monotone_core import (MonotonicityReport, QuadratureSpec, SampledMap, a_matrix,
                                 check_map_monotone, defect_bilinear_identity,
                                 ellipticity_sandwich_check, g_eval, grid_points,
                                 load_sampled_map, p_ab_eval, pair_defect, phi_weight,
                                 save_sampled_map)
from oracles import a_matrix_oracle, richardson_midpoint

Q64 = QuadratureSpec(64)
vec2 = arrays(float, 2, elements=st.floats(-1, 1))


def test_pair_defect_examples():
    c = CostFunction.isotropic(2, 2)
    o, e = np.zeros(2), np.array([1.0, 0.0])
    assert pair_defect(c, o, e, o, e) == pytest.approx(2.0)
    assert pair_defect(c, o, e, e, o) == pytest.approx(-2.0)


@given(vec2, vec2, st.sampled_from([2.0, 2.5, 3.0, 4.0]))
@settings(max_examples=50, deadline=None)
def test_identity_pairing_nonnegative(x, y, p):
    c = CostFunction.isotropic(2, p)
    assert pair_defect(c, x, y, x, y) == pytest.approx(c.h(x - y) + c.h(y - x))
    assert pair_defect(c, x, y, x, y) >= 0


@given(vec2, vec2, vec2, vec2, vec2, vec2)
@settings(max_examples=50, deadline=None)
def test_defect_translation_invariance(x, y, xi, zeta, w, w2):
    c = CostFunction.isotropic(2, 3)
    d0 = pair_defect(c, x, y, xi, zeta)
    d1 = pair_defect(c, x + w, y + w, xi + w, zeta + w)
    assert d1 == pytest.approx(d0, abs=1e-12)
    # shifting only (x, y) by w and only (xi, zeta) by w2 equals a joint shift of differences
    d2 = pair_defect(c, x + w, y + w, xi + w2, zeta + w2)
    d3 = pair_defect(c, x + w - w2, y + w - w2, xi, zeta)
    assert d2 == pytest.approx(d3, abs=1e-12)


def test_a_matrix_p2_is_constant():
    rng = np.random.default_rng(0)
    c = CostFunction.isotropic(3, 2)
    np.testing.assert_allclose(a_matrix(c, *rng.normal(size=(4, 3))), 2 * np.eye(3), atol=1e-14)


def test_a_matrix_against_riemann_oracle():
    c = CostFunction.isotropic(2, 4)
    o, e = np.zeros(2), np.array([1.0, 0.0])
    A = a_matrix(c, o, o, o, e, Q64)
    np.testing.assert_allclose(A, a_matrix_oracle(o, o, o, e, 4.0, m=1000), atol=1e-8)
    # closed form: int_0^1 D^2h((s - 1) e_1) ds = diag(12/3, 4/3)
    np.testing.assert_allclose(A, np.diag([4.0, 4.0 / 3.0]), atol=1e-13)


def test_a_matrix_random_against_oracle():
    rng = np.random.default_rng(3)
    for p in (2.5, 3.0):
        x, y, xi, zeta = rng.uniform(size=(4, 2))
        np.testing.assert_allclose(a_matrix(CostFunction.isotropic(2, p), x, y, xi, zeta, Q64),
                                   a_matrix_oracle(x, y, xi, zeta, p, m=1000), atol=1e-6)


def test_a_matrix_degenerate_is_zero():
    c = CostFunction.isotropic(2, 3)
    y = np.array([0.3, 0.2])
    np.testing.assert_array_equal(a_matrix(c, y, y, y, y), 0.0)


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
def test_a_matrix_exchange_symmetry(p):
    rng = np.random.default_rng(4)
    c = CostFunction.isotropic(3, p)
    for _ in range(20):
        x, y, xi, zeta = rng.uniform(size=(4, 3))
        A1, A2 = a_matrix(c, x, y, xi, zeta), a_matrix(c, y, x, zeta, xi)
        np.testing.assert_allclose(A1, A1.T, atol=1e-14)
        assert np.abs(A1 - A2).max() <= 1e-10


def test_phi_examples():
    rng = np.random.default_rng(5)
    assert phi_weight(*rng.normal(size=(4, 2)), 2.0) == pytest.approx(1.0, abs=1e-14)
    y = np.array([0.2, 0.7])
    assert phi_weight(y, y, y, y, 3.0) == 0.0
    o, e = np.zeros(2), np.array([1.0, 0.0])
    assert phi_weight(o, o, o, e, 3.0) == pytest.approx(0.5, abs=1e-14)
    oracle = richardson_midpoint(lambda s, t: np.abs(s - 1.0), 500)
    assert phi_weight(o, o, o, e, 3.0) == pytest.approx(oracle, abs=1e-8)


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
def test_phi_positivity_criterion(p):
    rng = np.random.default_rng(6)
    for scale in (1.0, 1e-3, 1e-8):
        x, y, xi, zeta = scale * rng.uniform(size=(4, 2))
        phi = phi_weight(x, y, xi, zeta, p)
        assert phi >= 0
        if phi <= 1e-12:
            assert max(np.linalg.norm(x - y), np.linalg.norm(xi - zeta),
                       np.linalg.norm(y - zeta)) <= 1e-6


def test_bilinear_identity_examples():
    rng = np.random.default_rng(7)
    x, y, xi, zeta = rng.uniform(size=(4, 2))
    lhs, rhs = defect_bilinear_identity(CostFunction.isotropic(2, 2), x, y, xi, zeta)
    assert lhs == pytest.approx(2 * (x - y) @ (xi - zeta), abs=1e-14)
    assert rhs == pytest.approx(lhs, abs=1e-14)
    lhs, rhs = defect_bilinear_identity(CostFunction.isotropic(2, 3), x, y, xi, zeta, Q64)
    assert abs(lhs - rhs) <= 1e-8
    lhs, rhs = defect_bilinear_identity(CostFunction.isotropic(2, 3), x, x, xi, zeta)
    assert lhs == pytest.approx(0.0, abs=1e-15) and rhs == 0.0


def test_bilinear_identity_anisotropic():
    M = np.array([[2.0, 0.4], [0.4, 1.0]])
    rng = np.random.default_rng(8)
    for p in (2.5, 3.0, 4.0):
        x, y, xi, zeta = rng.uniform(size=(4, 2))
        lhs, rhs = defect_bilinear_identity(CostFunction.anisotropic(M, p), x, y, xi, zeta)
        assert abs(lhs - rhs) <= 1e-8 * (1 + abs(lhs))


def test_ellipticity_sandwich():
    rng = np.random.default_rng(9)
    c2 = CostFunction.isotropic(2, 2)
    x, y, xi, zeta = rng.uniform(size=(4, 2))
    v = np.array([0.3, -1.2])
    lo, val, hi = ellipticity_sandwich_check(c2, x, y, xi, zeta, v, ellipticity_bounds(c2))
    assert lo == pytest.approx(val) and hi == pytest.approx(val)
    assert val == pytest.approx(2 * v @ v)
    c3 = CostFunction.isotropic(2, 3)
    b3 = ellipticity_bounds(c3)
    for _ in range(100):
        ellipticity_sandwich_check(c3, x, y, xi, zeta, rng.normal(size=2), b3)
    assert ellipticity_sandwich_check(c3, x, y, xi, zeta, np.zeros(2), b3) == (0.0, 0.0, 0.0)
    with pytest.raises(InconsistencyError):
        ellipticity_sandwich_check(c3, x, y, xi, zeta, v, (10.0, 11.0))


def test_g_and_p_examples():
    c = CostFunction.isotropic(2, 3)
    o, e1, e2 = np.zeros(2), np.array([1.0, 0.0]), np.array([0.0, 1.0])
    z = np.array([0.4, -0.3])
    assert g_eval(c, z, z, e2) == (0.0, 0.0)
    d, i = g_eval(c, z, e1, o)
    assert d == pytest.approx(0.0, abs=1e-15) and i == 0.0
    d, i = g_eval(c, o, e1, e2, Q64)
    assert abs(d - i) <= 1e-8
    d, i = p_ab_eval(c, np.eye(2), o, o, e1, Q64)
    assert abs(d - i) <= 1e-8
    assert p_ab_eval(c, np.eye(2), o, z, z) == (0.0, 0.0)
    d, i = p_ab_eval(c, np.zeros((2, 2)), z, o, e1)
    assert d == pytest.approx(0.0, abs=1e-15) and i == 0.0


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
def test_dual_paths_agree(p):
    rng = np.random.default_rng(10)
    c = CostFunction.isotropic(2, p)
    for _ in range(30):
        z1, z2, z3 = rng.uniform(-1, 1, size=(3, 2))
        d, i = g_eval(c, z1, z2, z3)
        assert abs(d - i) <= 1e-6 * (1 + abs(d))
        A, b = rng.normal(size=(2, 2)), rng.normal(size=2)
        x, y = rng.uniform(size=(2, 2))
        d, i = p_ab_eval(c, A, b, x, y)
        assert abs(d - i) <= 1e-6 * (1 + abs(d))


def test_quadrature_spec_validation():
    with pytest.raises(InputError):
        QuadratureSpec(1)
    with pytest.raises(InputError):
        QuadratureSpec(8, tolerance=0.0)


# -- sampled maps ---------------------------------------------------------------


def test_grid_points_order():
    pts = grid_points([0, 0], [1, 2], (2, 3))
    np.testing.assert_allclose(pts, [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]])


def test_sampled_map_geometry():
    m = SampledMap.from_function(lambda x: 2 * x, [0, 0], [1, 1], (11, 11))
    np.testing.assert_allclose(m.spacing, [0.1, 0.1])
    assert m.cell_volume == pytest.approx(0.01)
    assert m.diameter == pytest.approx(np.sqrt(2))
    assert m.contains_ball([0.5, 0.5], 0.5) and not m.contains_ball([0.5, 0.5], 0.51)
    assert m.node_index([0.31, 0.69]) == 3 * 11 + 7
    with pytest.raises(InputError):
        SampledMap([0, 0], [1, 1], (3, 3), np.full((9, 2), np.nan))


def test_map_file_roundtrip(tmp_path):
    m = SampledMap.from_function(lambda x: np.sin(x) + 1 / 3, [-1, 0], [1, 2], (5, 4))
    path = tmp_path / "map.txt"
    save_sampled_map(path, m)
    m2 = load_sampled_map(path)
    np.testing.assert_array_equal(m2.values, m.values)
    np.testing.assert_array_equal(m2.points, m.points)
    js = tmp_path / "map.json"
    js.write_text('{"n": 2, "grid_shape": [5, 4], "box_min": [-1, 0], "box_max": [1, 2], '
                  '"values": ' + str(m.values.tolist()) + "}")
    np.testing.assert_allclose(load_sampled_map(js).values, m.values)
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3 4\n")
    with pytest.raises(InputError):
        load_sampled_map(bad)


def test_check_identity_and_reflection():
    c = CostFunction.isotropic(2, 3)
    ident = SampledMap.from_function(lambda x: x, [0, 0], [1, 1], (8, 8))
    rep = check_map_monotone(c, ident)
    assert rep.passed and rep.pairs_tested == 64 * 63 // 2
    c2 = CostFunction.isotropic(2, 2)
    refl = SampledMap.from_function(lambda x: -x, [-1, -1], [1, 1], (8, 8))
    rep = check_map_monotone(c2, refl)
    assert not rep.passed and rep.worst_defect < 0
    x, y, xi, zeta = rep.worst_pair
    assert rep.worst_defect == pytest.approx(-2 * np.sum((x - y) ** 2))
    assert rep.violations <= rep.pairs_tested


def test_sampled_check_is_seeded_and_finds_short_range_violation():
    c = CostFunction.isotropic(2, 2)
    vals = grid_points([0, 0], [1, 1], (40, 40)).copy()
    vals[[500, 501]] = vals[[501, 500]]  # neighbouring nodes swapped
    m = SampledMap([0, 0], [1, 1], (40, 40), vals)
    r1 = check_map_monotone(c, m, pair_budget=20_000, seed=3)
    r2 = check_map_monotone(c, m, pair_budget=20_000, seed=3)
    assert r1.pairs_tested == 20_000 and r1.to_record() == r2.to_record()
    assert not r1.passed


def test_report_merge_is_commutative():
    a = MonotonicityReport(10, 1, -0.5, ("a",), 1e-9)
    b = MonotonicityReport(5, 0, 0.2, ("b",), 2e-9)
    assert a.merge(b) == b.merge(a)
    m = a.merge(b)
    assert (m.pairs_tested, m.violations, m.worst_defect, m.slack) == (15, 1, -0.5, 2e-9)
