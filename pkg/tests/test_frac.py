import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from heatlp.fields import SampledField
from heatlp.frac import FractionalOrder, TimeProfile, eigen_law, frac_semigroup_apply, weyl_derivative_fn
from heatlp.kernels import SemigroupId
from heatlp.orthobasis import gauss_legendre, hermite_fn


def test_fractional_order():
    assert FractionalOrder(0.3).m == 1
    assert FractionalOrder(1.0).m == 2
    assert FractionalOrder(1.7).m == 2
    assert FractionalOrder(2.0).s == pytest.approx(1.0)
    assert (FractionalOrder(0.7) + FractionalOrder(1.2)).alpha == pytest.approx(1.9)
    for bad in (0.0, -1.0, float("inf"), float("nan")):
        with pytest.raises(ValueError):
            FractionalOrder(bad)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 5.0))
def test_m_bracket(alpha):
    o = FractionalOrder(alpha)
    assert o.m - 1 <= alpha < o.m


def test_eigen_examples():
    v, err = weyl_derivative_fn(TimeProfile.exponential(1.0), FractionalOrder(0.5), 1.0)
    assert v == pytest.approx(-math.exp(-1), rel=1e-12)
    assert err < 1e-10
    v, _ = weyl_derivative_fn(TimeProfile.exponential(2.0), FractionalOrder(1.0), 0.3)
    assert v == pytest.approx(2 * math.exp(-0.6), rel=1e-12)
    assert v == pytest.approx(1.097623, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([0.3, 0.5, 1.0, 1.7, 2.4]), st.floats(0.1, 8.0), st.floats(0.05, 3.0))
def test_eigen_law_property(alpha, lam, t):
    o = FractionalOrder(alpha)
    v, _ = weyl_derivative_fn(TimeProfile.exponential(lam), o, t)
    assert v == pytest.approx(eigen_law(lam, o, t), rel=1e-7)


def _power_profile(with_derivative: bool):
    func = lambda u: (1 + u) ** -3.0  # noqa: E731
    deriv = (lambda k, u: (-1) ** k * math.gamma(3 + k) / 2 * (1 + u) ** (-3.0 - k)) if with_derivative else None
    return TimeProfile(func, deriv)


@pytest.mark.parametrize("with_derivative", [True, False])
def test_power_profile_against_quadrature_oracle(with_derivative):
    ord, t = FractionalOrder(0.7), 0.5
    s = ord.s
    # brute force: algebraic endpoint weight handled by QUADPACK, tail mapped to a finite interval
    near, _ = quad(lambda u: -3 * (1 + u) ** -4, t, t + 1, weight="alg", wvar=(s - 1, 0), epsabs=1e-15, epsrel=1e-13)
    far, _ = quad(lambda u: -3 * (1 + u) ** -4 * (u - t) ** (s - 1), t + 1, np.inf, epsabs=1e-15, epsrel=1e-13)
    oracle = (near + far) / math.gamma(s)
    closed = -math.gamma(4 - s) / 2 * (1 + t) ** (s - 4)
    assert oracle == pytest.approx(closed, rel=1e-10)
    v, _ = weyl_derivative_fn(_power_profile(with_derivative), ord, t)
    assert v == pytest.approx(oracle, rel=1e-7)


def test_integer_order_consistency():
    phi = _power_profile(True)
    for k, t in [(1, 0.4), (2, 1.3)]:
        v, _ = weyl_derivative_fn(phi, FractionalOrder(float(k)), t)
        assert abs(v) == pytest.approx(abs(float(phi.derivative(k, t))), rel=1e-10)


def test_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        weyl_derivative_fn(TimeProfile.exponential(1.0), FractionalOrder(0.5), 0.0)


def test_hermite_ground_state():
    f = SampledField.hermite_grid(121, func=lambda x: hermite_fn(0, x))
    for t in (0.2, 1.0):
        out = frac_semigroup_apply(SemigroupId.hermite(1), f, FractionalOrder(1.0), t)
        np.testing.assert_allclose(out.values[:, 0], math.exp(-t) * f.values[:, 0], atol=1e-13)


def test_zero_field():
    for sg, f in [
        (SemigroupId.hermite(1), SampledField.hermite_grid(60)),
        (SemigroupId.classical(1), SampledField.fourier_box(20.0, 512)),
        (SemigroupId.laguerre(0.5), SampledField.half_line()),
    ]:
        out = frac_semigroup_apply(sg, f, FractionalOrder(0.5), 0.3)
        assert np.all(out.values == 0)


def test_vector_components_independent():
    f = SampledField.hermite_grid(121, func=lambda x: np.stack([np.exp(-x * x), x * np.exp(-x * x)], axis=-1))
    o = FractionalOrder(0.6)
    both = frac_semigroup_apply(SemigroupId.hermite(1), f, o, 0.4)
    for j in range(2):
        one = frac_semigroup_apply(SemigroupId.hermite(1), f.component(j), o, 0.4)
        np.testing.assert_allclose(both.values[:, j], one.values[:, 0], atol=1e-14)


def test_hermite_spectral_vs_kernel_route():
    sg = SemigroupId.hermite(1)
    pts = np.array([-1.0, 0.0, 0.7])
    f_spec = SampledField.hermite_grid(121, func=lambda x: np.exp(-((x - 0.3) ** 2)))
    f_line = SampledField.from_rule(gauss_legendre(-12, 12, 20, 30), func=lambda x: np.exp(-((x - 0.3) ** 2)))
    o = FractionalOrder(0.5)
    from heatlp.spectral import SpectralBasis, expand, fractional_weight, synthesize_at

    c = expand(f_spec, SpectralBasis(sg), tol=None)
    spec_vals = synthesize_at(c, (pts,), fractional_weight(c.basis.eigenvalues(), 0.4, o))[:, 0]
    kern = frac_semigroup_apply(sg, f_line, o, 0.4, route="kernel", points=pts)[:, 0]
    np.testing.assert_allclose(kern, spec_vals, rtol=1e-6)


@pytest.mark.slow
def test_classical_spectral_vs_kernel_route():
    # the periodic box needs half-width 8192 for 1e-6: fractional multipliers decay like 1/x^2
    sg = SemigroupId.classical(1)
    o = FractionalOrder(0.5)
    pts = np.array([-2.0, -1.0, 0.0, 0.5, 1.5])
    box = SampledField.fourier_box(8192.0, 131072, func=lambda x: np.exp(-0.5 * x * x))
    idx = np.rint((pts - box.axes[0][0]) / (box.axes[0][1] - box.axes[0][0])).astype(int)
    spec_vals = frac_semigroup_apply(sg, box, o, 0.4).values[idx, 0]
    line = SampledField.from_rule(gauss_legendre(-14, 14, 20, 40), func=lambda x: np.exp(-0.5 * x * x))
    kern = frac_semigroup_apply(sg, line, o, 0.4, route="kernel", points=pts)[:, 0]
    np.testing.assert_allclose(spec_vals, kern, rtol=1e-6)


def test_kernel_route_rejects_unknown():
    with pytest.raises(ValueError):
        frac_semigroup_apply(SemigroupId.hermite(1), SampledField.hermite_grid(20), FractionalOrder(0.5), 0.3,
                             route="magic")
