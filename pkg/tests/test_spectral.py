import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatlp.errors import TruncationError
from heatlp.fields import SampledField
from heatlp.frac import FractionalOrder
from heatlp.kernels import SemigroupId, heat_kernel
from heatlp.orthobasis import gauss_legendre, hermite_fn, laguerre_fn
from heatlp.spectral import (
    CoefficientVector,
    SpectralBasis,
    expand,
    log_time_window,
    pairing_constant,
    polarization_pairing,
    single_mode_time_integral,
    spectral_apply,
    synthesize,
)

H1 = SemigroupId.hermite(1)
HB = SpectralBasis(H1)


def hgrid(func):
    return SampledField.hermite_grid(121, func=func)


def test_basis_eigenvalues():
    assert np.array_equal(HB.eigenvalues()[:4], [1, 3, 5, 7])
    lb = SpectralBasis(SemigroupId.laguerre(0.5))
    assert lb.eigenvalues()[:3] == pytest.approx([1.5, 3.5, 5.5])
    lam2 = SpectralBasis(SemigroupId.hermite(2), K=3).eigenvalues()
    assert lam2.shape == (4, 4) and lam2[1, 2] == 8
    with pytest.raises(ValueError):
        SpectralBasis(H1, K=0)


def test_expand_single_eigenfunction():
    c = expand(hgrid(lambda x: hermite_fn(3, x)), HB).coeffs[:, 0]
    want = np.zeros(61)
    want[3] = 1
    np.testing.assert_allclose(c, want, atol=1e-10)


def test_expand_gaussian():
    c = expand(hgrid(lambda x: np.exp(-x * x / 2)), HB).coeffs[:, 0]
    assert c[0] == pytest.approx(math.pi**0.25, abs=1e-10)
    assert np.max(np.abs(c[1:])) <= 1e-10


def test_expand_laguerre_combination():
    beta = 0.5
    f = SampledField.half_line(func=lambda x: laguerre_fn(2, beta, x) + 0.5 * laguerre_fn(5, beta, x))
    c = expand(f, SpectralBasis(SemigroupId.laguerre(beta))).coeffs[:, 0]
    want = np.zeros(61)
    want[2], want[5] = 1.0, 0.5
    np.testing.assert_allclose(c, want, atol=1e-10)


def test_unresolved_field_signals():
    f = hgrid(lambda x: np.where(np.abs(x) < 1, 1.0, 0.0))
    with pytest.raises(TruncationError) as info:
        expand(f, SpectralBasis(H1, K=10))
    assert info.value.estimate > 0


def test_parseval_band_limited():
    rng = np.random.default_rng(3)
    a = rng.standard_normal(8)
    f = hgrid(lambda x: sum(ai * hermite_fn(i, x) for i, ai in enumerate(a)))
    cv = expand(f, HB)
    assert cv.tail_energy <= 1e-8
    assert cv.energy == pytest.approx(float(np.sum(a * a)), rel=1e-12)
    box = SampledField.fourier_box(20.0, 512, func=lambda x: np.exp(-x * x))
    cb = expand(box, SpectralBasis(SemigroupId.classical(1)))
    assert cb.energy == pytest.approx(float(box.integrate(box.values[:, 0] ** 2)), rel=1e-12)


def test_apply_delta_coefficient():
    grid = hgrid(None)
    coeffs = np.zeros((61, 1))
    coeffs[0] = 1.0
    out = spectral_apply(CoefficientVector(coeffs, HB, grid, 0.0), 1.0)
    np.testing.assert_allclose(out.values[:, 0], math.exp(-1) * hermite_fn(0, grid.axes[0]), atol=1e-15)


def test_apply_is_diagonal():
    f = hgrid(lambda x: np.exp(-((x - 0.4) ** 2)))
    c = expand(f, HB)
    back = expand(spectral_apply(c, 0.3), HB)
    np.testing.assert_allclose(back.coeffs[:, 0], c.coeffs[:, 0] * np.exp(-0.3 * HB.eigenvalues()), atol=1e-13)


def test_apply_matches_kernel_quadrature():
    f = lambda x: hermite_fn(0, x) + hermite_fn(2, x)  # noqa: E731
    out = spectral_apply(expand(hgrid(f), HB), 0.3)
    rule = gauss_legendre(-14, 14, 20, 40)
    x = out.axes[0][50:70]
    kq = rule.integrate(heat_kernel(H1, 0.3, x[None, :], rule.nodes[:, None]) * f(rule.nodes)[:, None])
    np.testing.assert_allclose(out.values[50:70, 0], kq, rtol=1e-8)


def test_fixed_point_projection():
    f = hgrid(lambda x: np.exp(-x * x))
    assert np.all(HB.fixed_point_projection(f).values == 0)
    box = SampledField.fourier_box(10.0, 256, func=lambda x: 1.0 + np.exp(-x * x))
    mean = SpectralBasis(SemigroupId.classical(1)).fixed_point_projection(box).values
    assert mean[0, 0] == pytest.approx(1.0 + math.sqrt(math.pi) / 20, rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 1.0, 10.0])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.7])
def test_single_mode_integral(lam, alpha):
    assert single_mode_time_integral(lam, alpha) == pytest.approx(pairing_constant(alpha), rel=1e-8)


def test_log_time_window_brackets_the_peak():
    t0, t1 = log_time_window(1.0, 1.0, 0.5)
    assert t0 < 0.5 < t1


def test_pairing_ground_state():
    f = hgrid(lambda x: hermite_fn(0, x))
    r = polarization_pairing(f, f, H1, FractionalOrder(1.0))
    assert r.lhs == pytest.approx(0.25, rel=1e-10)
    assert r.rhs == pytest.approx(0.25, rel=1e-12)


def test_pairing_orthogonal():
    r = polarization_pairing(hgrid(lambda x: hermite_fn(1, x)), hgrid(lambda x: hermite_fn(2, x)), H1,
                             FractionalOrder(0.5))
    assert abs(r.lhs) <= 1e-10 and abs(r.rhs) <= 1e-10


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_pairing_classical_gaussian(alpha):
    box = SampledField.fourier_box(40.0, 1024, func=lambda x: np.exp(-0.5 * x * x))
    r = polarization_pairing(box, box, SemigroupId.classical(1), FractionalOrder(alpha))
    assert r.gap <= 1e-4


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.lists(st.floats(-2, 2), min_size=4, max_size=4),
       st.floats(-3, 3))
def test_pairing_symmetric_and_bilinear(a, b, s):
    fa = hgrid(lambda x: sum(ai * hermite_fn(i, x) for i, ai in enumerate(a)))
    fb = hgrid(lambda x: sum(bi * hermite_fn(i, x) for i, bi in enumerate(b)))
    o = FractionalOrder(0.7)
    ab = polarization_pairing(fa, fb, H1, o).lhs
    ba = polarization_pairing(fb, fa, H1, o).lhs
    assert ab == pytest.approx(ba, abs=1e-12)
    lin = polarization_pairing(fa.with_values(s * fa.values + fb.values), fb, H1, o).lhs
    bb = polarization_pairing(fb, fb, H1, o).lhs
    assert lin == pytest.approx(s * ab + bb, abs=1e-10)


def test_synthesize_roundtrip_classical():
    box = SampledField.fourier_box(10.0, 256, func=lambda x: np.exp(-x * x) * np.cos(3 * x))
    back = synthesize(expand(box, SpectralBasis(SemigroupId.classical(1))))
    np.testing.assert_allclose(back.values, box.values, atol=1e-14)
