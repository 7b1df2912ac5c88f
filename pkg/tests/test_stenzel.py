from types import SimpleNamespace

import numpy as np
import pytest

from mastruct import fields as fl
from mastruct import stenzel as stz
from mastruct.exterior import evaluate, wedge


@pytest.fixture(scope="module")
def ode():
    return stz.solve_ode(1.0, 3.0, 1e-3)


@pytest.fixture(scope="module")
def points(ode):
    return stz.random_points(20, 11, ode)


def test_initial_value(ode):
    assert ode.g[0] == pytest.approx(1.0)
    assert stz.solve_ode(8.0, 2.0, 1e-3).g[0] == pytest.approx(2.0)


def test_residual_and_positivity(ode):
    assert np.max(np.abs(ode.residual())) < 1e-8
    assert np.all(ode.g > 0)
    assert np.all(np.diff(ode.g) < 0)


def test_matches_closed_form(ode):
    x = ode.x[1:]
    assert np.max(np.abs(ode.g[1:] - stz.closed_form_g(x))) < 1e-8
    t = np.linspace(1.0005, 2.9995, 37)
    assert np.max(np.abs(ode.fp(t) - stz.closed_form_g(t))) < 1e-8


def test_interpolant_derivative_consistency(ode):
    t = np.linspace(1.2, 2.8, 9)
    e = 1e-5
    assert np.allclose((ode.f(t + e) - ode.f(t - e)) / (2 * e), ode.fp(t), atol=1e-9)
    assert np.allclose((ode.fp(t + e) - ode.fp(t - e)) / (2 * e), ode.fpp(t), atol=1e-7)


def test_c_scaling():
    a, b = stz.solve_ode(1.0, 2.0, 1e-3), stz.solve_ode(27.0, 2.0, 1e-3)
    assert np.allclose(b.g, 3 * a.g, rtol=1e-10)


@pytest.mark.parametrize("kw", [{"c": 0}, {"c": -1}, {"tau_max": 1.0}, {"step": 0.7}])
def test_bad_parameters(kw):
    with pytest.raises(stz.StenzelError):
        stz.solve_ode(**{"c": 1.0, "tau_max": 3.0, "step": 1e-3, **kw})


def test_out_of_range_tau(ode):
    with pytest.raises(stz.StenzelError):
        ode.fp(3.5)


def test_chart_points_on_quadric(points):
    for p in points:
        assert abs(np.sum(p.full**2) - 1) < 1e-12
        assert p.valid


def test_invalid_chart_point():
    p = stz.ChartPoint(np.array([1.0, 0, 0], dtype=complex))
    assert not p.valid
    with pytest.raises(stz.StenzelError):
        stz.holomorphic_volume(p)


def test_tau_derivatives_by_differences(points):
    p = points[0].real
    t, g, H = stz.tau_derivatives(p)
    fg = fl.central_jacobian(lambda q: np.array([stz.tau(q)]), p, 1e-6)[0]
    fH = fl.central_jacobian(lambda q: stz.tau_derivatives(q)[1], p, 1e-6)
    assert np.allclose(g, fg, atol=1e-8) and np.allclose(H, fH, atol=1e-6)


def test_kahler_form_chain_rule_vs_differences(ode, points):
    for p in points[:5]:
        W = stz.kahler_gram(p.real, ode)
        assert np.allclose(W, -W.T)
        assert np.max(np.abs(W - stz.kahler_gram_fd(p.real, ode))) < 1e-6


def test_kahler_fd_second_order(ode, points):
    p = points[1].real
    ref = stz.kahler_gram(p, ode)
    errs = [np.max(np.abs(stz.kahler_gram_fd(p, ode, h) - ref)) for h in (4e-3, 2e-3, 1e-3)]
    assert 3 < errs[0] / errs[1] < 5 and 3 < errs[1] / errs[2] < 5


def test_kahler_form_real_closed_nondegenerate(ode, points):
    F = fl.FormField(2, lambda q: stz.kahler_form(stz.ChartPoint.from_real(q), ode).dense())
    for p in points:
        assert fl.exterior_derivative(F, p.real).max_abs() < 1e-5
        O = stz.kahler_form(p, ode)
        assert abs(wedge(wedge(O, O), O)[stz.FULL]) > 1e-3


def test_holomorphic_volume_at_origin():
    re, im = stz.holomorphic_volume(stz.ChartPoint(np.zeros(3, dtype=complex)))
    r0, i0 = stz._dz123()
    assert re.allclose(-r0, 1e-15) and im.allclose(-i0, 1e-15)


def test_volume_chart_vs_determinant(points):
    rng = np.random.default_rng(3)
    for p in points:
        vecs = rng.normal(size=(3, 6))
        re, im = stz.holomorphic_volume(p)
        chart = evaluate(re, *vecs) + 1j * evaluate(im, *vecs)
        assert abs(chart - stz.volume_by_determinant(p, vecs)) < 1e-9


def test_alpha_wedge_alphabar_nonzero(points):
    for p in points:
        re, im = stz.holomorphic_volume(p)
        assert abs(wedge(re, im)[stz.FULL]) > 0.1


def test_cy_ratio_constant(ode):
    pts = stz.random_points(50, 7, ode)
    r = [stz.cy_ratio(p, ode) for p in pts]
    assert stz.ratio_spread(r) < 5e-3
    assert np.median(r) == pytest.approx(6.0, rel=1e-6)


def test_cy_ratio_tracks_c():
    ode2 = stz.solve_ode(2.0, 3.0, 1e-3)
    pts = stz.random_points(20, 8, ode2)
    r = [stz.cy_ratio(p, ode2) for p in pts]
    assert stz.ratio_spread(r) < 5e-3 and np.median(r) == pytest.approx(12.0, rel=1e-6)


def test_wrong_potential_breaks_constancy(ode):
    flat = SimpleNamespace(fp=lambda t: np.ones_like(np.asarray(t, float)),
                           fpp=lambda t: np.zeros_like(np.asarray(t, float)))
    pts = stz.random_points(20, 9, ode)
    assert stz.ratio_spread([stz.cy_ratio(p, flat) for p in pts]) > 1e-2


def test_xi_lands_in_cotangent_bundle(points):
    for p in points:
        u, v = stz.xi(p.full)
        assert abs(u @ u - 1) < 1e-12 and abs(u @ v) < 1e-12
        assert np.allclose(stz.xi_inverse(u, v), p.full, atol=1e-12)
        assert abs(stz.tau(p.real) - stz.tau_on_cotangent(v)) < 1e-12


def test_darboux_zero_fiber(ode):
    u = np.array([0.0, 0.6, 0.0, 0.8])
    assert np.all(stz.darboux_coords(u, np.zeros(4), ode)[:3] == 0)


def test_darboux_rejects_bad_input(ode):
    u = np.array([0.0, 0.6, 0.0, 0.8])
    with pytest.raises(stz.StenzelError):
        stz.darboux_coords(u, np.array([0.0, 1.0, 0.0, 0.0]), ode)
    with pytest.raises(stz.StenzelError):
        stz.darboux_coords(np.array([1.0, 0, 0, 0]), np.zeros(4), ode)


def test_darboux_coordinates_pull_back_kahler_form(ode, points):
    assert max(stz.darboux_defect(p, ode) for p in points) < 1e-4


def test_alternative_fiber_argument_fails(ode, points):
    assert max(stz.darboux_defect(p, ode, stz.TAU_XI_ALT) for p in points[:5]) > 1e-2


@pytest.mark.slow
def test_report_small(ode):
    rep = stz.stenzel_report(ode, samples=10, seed=7, curvature_samples=4)
    assert rep.lam_max < 0 and rep.nonflat
    assert rep.curvature.verdict is fl.Verdict.NOT_LOCALLY_CONSTANT
    assert max(rep.curvature.max_closed_omega, rep.curvature.max_closed_dual) < 1e-3
