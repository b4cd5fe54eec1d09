import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatlp.errors import ConvergenceError
from heatlp.kernels import (
    KernelGrid,
    SemigroupId,
    certify_bound,
    heat_kernel,
    hermite_markov_closed_form,
    hermite_markov_exact,
    hermite_series_kernel,
    kernel_time_derivative,
    laguerre_series_kernel,
    markov_defect,
    poisson_kernel_classical,
    richardson_derivative,
)
from heatlp.orthobasis import gauss_legendre, half_line_rule

C1, H1 = SemigroupId.classical(1), SemigroupId.hermite(1)


def test_semigroup_validation():
    with pytest.raises(ValueError):
        SemigroupId("poisson")
    with pytest.raises(ValueError):
        SemigroupId.laguerre(-0.5)
    with pytest.raises(ValueError):
        SemigroupId.classical(0)
    assert SemigroupId.laguerre(0.5).contractive
    assert not SemigroupId.laguerre(0.2).contractive
    assert SemigroupId.laguerre(-0.5 + 1e-9).contractive is False


def test_classical_prefactor():
    assert heat_kernel(C1, 1 / (4 * math.pi), 0.3, 0.3) == pytest.approx(1.0, rel=1e-15)


def test_mehler_displayed_value():
    want = math.pi**-0.5 * math.sqrt(0.5 / 0.75)
    assert heat_kernel(H1, math.log(2) / 2, 0.0, 0.0) == pytest.approx(want, rel=1e-14)
    assert want == pytest.approx(0.460659, abs=1e-6)


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        heat_kernel(C1, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        heat_kernel(SemigroupId.laguerre(0.5), 1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        poisson_kernel_classical(1, -1.0, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.45, 4.0), st.floats(0.01, 3.0), st.floats(0.05, 6.0), st.floats(0.05, 6.0))
def test_laguerre_symmetric(beta, t, x, y):
    sg = SemigroupId.laguerre(beta)
    assert heat_kernel(sg, t, x, y) == pytest.approx(heat_kernel(sg, t, y, x), rel=1e-13)


def test_laguerre_no_overflow_at_large_xy_over_t():
    v = heat_kernel(SemigroupId.laguerre(1.0), 1e-3, 30.0, 30.001)
    assert math.isfinite(v) and v > 0


def test_poisson_kernel():
    assert poisson_kernel_classical(1, 1.0, 0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    rule = gauss_legendre(-1, 1, 40, 50)
    # integrate over the whole line with z = tan(theta)
    th = rule.nodes * math.pi / 2
    vals = poisson_kernel_classical(1, 1.0, np.tan(th)) / np.cos(th) ** 2 * math.pi / 2
    assert rule.integrate(vals) == pytest.approx(1.0, abs=1e-10)
    assert poisson_kernel_classical(1, 2.0, 2.0) == pytest.approx(poisson_kernel_classical(1, 1.0, 1.0) / 2, rel=1e-15)


@pytest.mark.parametrize("t", [0.05, 0.2, 1.0, 2.0])
def test_mehler_matches_converged_series(t):
    xs = np.linspace(-3, 3, 13)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    closed = heat_kernel(H1, t, X, Y)
    series = hermite_series_kernel(1, t, X, Y, 600)
    np.testing.assert_allclose(series, closed, rtol=1e-8, atol=1e-13)


@pytest.mark.parametrize("t", [1.0, 2.0])
def test_mehler_matches_k60_series_at_moderate_time(t):
    xs = np.linspace(-3, 3, 13)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    np.testing.assert_allclose(hermite_series_kernel(1, t, X, Y, 60), heat_kernel(H1, t, X, Y), rtol=1e-8)


def test_k60_series_truncated_at_small_time():
    # the first neglected mode carries e^{-121 t}; at t = 0.05 that is not small
    X, Y = np.meshgrid(np.linspace(-3, 3, 13), np.linspace(-3, 3, 13))
    err = np.max(np.abs(hermite_series_kernel(1, 0.05, X, Y, 60) - heat_kernel(H1, 0.05, X, Y)))
    assert err > 1e-4


def test_lambda_convention():
    X, Y = np.meshgrid(np.linspace(-2, 2, 5), np.linspace(-2, 2, 5))
    closed = heat_kernel(H1, 1.0, X, Y)
    good = hermite_series_kernel(1, 1.0, X, Y, 60, "2k+n")
    bad = hermite_series_kernel(1, 1.0, X, Y, 60, "2(k+n)")
    np.testing.assert_allclose(good, closed, rtol=1e-12)
    np.testing.assert_allclose(bad / closed, math.exp(-1.0), rtol=1e-12)


@pytest.mark.parametrize("beta", [-0.4, 0.5, 1.0, 2.5])
def test_laguerre_matches_series(beta):
    xs = np.linspace(0.1, 4, 13)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    sg = SemigroupId.laguerre(beta)
    for t in (0.05, 0.2, 1.0, 2.0):
        closed = heat_kernel(sg, t, X, Y)
        series = laguerre_series_kernel(beta, t, X, Y, 400)
        np.testing.assert_allclose(series, closed, rtol=1e-6, atol=1e-13)
    # no constant-factor drift in the prefactor
    ratio = heat_kernel(sg, 2.0, X, Y) / laguerre_series_kernel(beta, 2.0, X, Y, 60)
    np.testing.assert_allclose(ratio, 1.0, rtol=1e-12)


def test_hermite_2d_is_product():
    x = np.array([0.3, -0.7])
    y = np.array([1.1, 0.2])
    k2 = heat_kernel(SemigroupId.hermite(2), 0.4, x, y)
    assert k2 == pytest.approx(heat_kernel(H1, 0.4, 0.3, 1.1) * heat_kernel(H1, 0.4, -0.7, 0.2), rel=1e-14)


@pytest.mark.parametrize("t,s", [(0.2, 0.2), (0.2, 0.5), (0.5, 0.2), (0.5, 0.5)])
def test_chapman_kolmogorov(t, s):
    line = gauss_legendre(-14, 14, 20, 60)
    for sg, x, y, rule in [
        (C1, 0.3, -0.4, line),
        (H1, 0.3, -0.4, line),
        (SemigroupId.laguerre(0.5), 0.8, 1.3, half_line_rule()),
        (SemigroupId.laguerre(-0.4), 0.8, 1.3, half_line_rule()),
    ]:
        z = rule.nodes
        lhs = rule.integrate(heat_kernel(sg, t, x, z) * heat_kernel(sg, s, z, y))
        assert lhs == pytest.approx(heat_kernel(sg, t + s, x, y), rel=1e-8)


def test_hermite_short_time_limit():
    r = heat_kernel(H1, 1e-3, 0.5, 0.5) / heat_kernel(C1, 1e-3, 0.5, 0.5)
    assert abs(r - 1) <= 0.01


def test_positivity():
    xs = np.linspace(0.05, 4, 30)
    X, Y = np.meshgrid(xs, xs)
    for sg in (C1, H1, SemigroupId.laguerre(-0.4), SemigroupId.laguerre(2.5)):
        for t in (1e-3, 0.1, 1.0, 10.0):
            assert np.all(heat_kernel(sg, t, X, Y) >= 0)


def test_markov_defect():
    assert markov_defect(C1, 0.7, 1.3) == pytest.approx(1.0, abs=1e-10)
    # quadrature agrees with (cosh 2t)^{-1/2} exp(-tanh(2t) x^2 / 2)
    for t, x in [(0.25, 0.0), (0.5, 1.0), (1.0, 2.0)]:
        assert markov_defect(H1, t, x) == pytest.approx(hermite_markov_exact(1, t, x), rel=1e-10)
    assert markov_defect(H1, 0.5, 0.0) == pytest.approx(1 / math.sqrt(math.cosh(1.0)), rel=1e-10)
    # the (2 pi)^{-1/2}-normalised closed form is smaller by exactly sqrt(2 pi)
    assert hermite_markov_closed_form(1, 0.5, 0.0) == pytest.approx((2 * math.pi * math.cosh(1)) ** -0.5, rel=1e-15)
    assert hermite_markov_closed_form(1, 0.5, 0.0) == pytest.approx(0.321156, abs=1e-6)
    assert markov_defect(SemigroupId.laguerre(0.5), 0.5, 1.0) < 1.0


def test_markov_defect_two_dimensions():
    x = np.array([0.5, -1.0])
    assert markov_defect(SemigroupId.hermite(2), 0.3, x) == pytest.approx(hermite_markov_exact(2, 0.3, x), rel=1e-9)


@pytest.mark.parametrize("k", [1, 2])
def test_time_derivatives_against_richardson(k):
    x, y = 0.4, -0.9
    for sg in (C1, H1):
        exact = kernel_time_derivative(sg, k, 0.7, x, y)
        fd = richardson_derivative(lambda t: heat_kernel(sg, t, x, y), 0.7, k)
        assert exact == pytest.approx(fd, rel=1e-7)


def test_classical_derivative_solves_heat_equation():
    x, t, h = 0.6, 0.5, 1e-3
    dt = kernel_time_derivative(C1, 1, t, x, 0.0)
    lap = (heat_kernel(C1, t, x + h, 0.0) - 2 * heat_kernel(C1, t, x, 0.0) + heat_kernel(C1, t, x - h, 0.0)) / h**2
    assert dt == pytest.approx(lap, rel=1e-5)


def test_laguerre_derivative_from_series():
    beta, t, x, y = 0.5, 0.6, 0.9, 1.4
    d = kernel_time_derivative(SemigroupId.laguerre(beta), 1, t, x, y)
    from heatlp.orthobasis import laguerre_functions

    P = laguerre_functions(80, beta, np.array([x, y]))
    lam = 2 * np.arange(81) + beta + 1
    want = float(np.sum(-lam * np.exp(-lam * t) * P[:, 0] * P[:, 1]))
    assert d == pytest.approx(want, rel=1e-8)


def test_certificate_classical_exact():
    cert = certify_bound(C1, 0, 0.25)
    assert cert.C == pytest.approx((4 * math.pi) ** -0.5, rel=1e-12)


@pytest.mark.parametrize("sg", [H1, SemigroupId.laguerre(0.5)])
@pytest.mark.parametrize("k", [0, 1])
def test_certificates_finite(sg, k):
    cert = certify_bound(sg, k, 0.125, KernelGrid.standard(sg))
    assert math.isfinite(cert.C) and cert.C > 0
    d = cert.to_dict()
    assert set(d["argmax"]) == {"t", "x", "y"} and d["k"] == k


def test_certificate_rejects_bad_input():
    with pytest.raises(ValueError):
        certify_bound(C1, 0, 0.0)
    with pytest.raises(ValueError):
        certify_bound(C1, 0, 0.1, KernelGrid((0, 1, 0), (0.1, 1, 5)))


def test_convergence_error_is_arithmetic():
    assert issubclass(ConvergenceError, ArithmeticError)
