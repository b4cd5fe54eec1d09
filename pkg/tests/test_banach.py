import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatlp.banach import (
    FiniteMartingale,
    NormedSpace,
    lp_convexity_closed_form,
    lusin_ratio_probe,
    martingale_square_fn,
    modulus_convexity,
    modulus_smoothness,
    random_search_convexity,
    random_search_smoothness,
)
from heatlp.fields import SampledField
from heatlp.frac import FractionalOrder
from heatlp.kernels import SemigroupId
from heatlp.lpfun import GFunctionSpec, g_function_field
from heatlp.orthobasis import hermite_fn


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0, math.inf]), st.integers(1, 5), st.integers(0, 2**31))
def test_norm_axioms(r, dim, seed):
    res = NormedSpace.lr(r, dim).check_axioms(np.random.default_rng(seed), trials=200)
    assert all(res.values())


def test_norm_validation():
    with pytest.raises(ValueError):
        NormedSpace.lr(0.5, 2)
    with pytest.raises(ValueError):
        NormedSpace.lr(2, 3).norm(np.ones(2))


@pytest.mark.parametrize("eps", [0.5, 1.0, 1.5])
def test_l2_convexity(eps):
    r = modulus_convexity(NormedSpace.lr(2, 2), eps)
    assert r.value == pytest.approx(1 - math.sqrt(1 - eps * eps / 4), abs=1e-4)
    assert r.residual <= 1e-8


@pytest.mark.parametrize("t", [0.25, 1.0])
def test_l2_smoothness(t):
    assert modulus_smoothness(NormedSpace.lr(2, 2), t).value == pytest.approx(math.sqrt(1 + t * t) - 1, abs=1e-4)


def test_l1_flat_face():
    r = modulus_convexity(NormedSpace.lr(1, 2), 1.0)
    assert r.value <= 1e-6


def test_convexity_rejects_bad_eps():
    with pytest.raises(ValueError):
        modulus_convexity(NormedSpace.lr(2, 2), 2.0)
    with pytest.raises(ValueError):
        modulus_smoothness(NormedSpace.lr(2, 2), 0.0)


def test_l4_convexity_against_random_search():
    sp = NormedSpace.lr(4, 3)
    opt = modulus_convexity(sp, 0.8).value
    brute = random_search_convexity(sp, 0.8)
    assert abs(opt - brute) <= 1e-3
    assert opt <= brute + 1e-12
    assert opt == pytest.approx(lp_convexity_closed_form(4, 0.8), abs=1e-6)


def test_l15_smoothness_against_random_search():
    sp = NormedSpace.lr(1.5, 3)
    opt = modulus_smoothness(sp, 0.5).value
    assert abs(opt - random_search_smoothness(sp, 0.5)) <= 1e-3


def test_l2_smoothness_ratio_vanishes():
    sp = NormedSpace.lr(2, 2)
    ratios = [modulus_smoothness(sp, t, restarts=16).value / t for t in (0.1, 0.01, 0.001)]
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[2] < 1e-3


def test_convexity_monotone_in_eps():
    sp = NormedSpace.lr(3, 2)
    vals = [modulus_convexity(sp, e, restarts=16).value for e in (0.4, 0.8, 1.2, 1.6)]
    assert all(b >= a - 1e-5 for a, b in zip(vals, vals[1:]))


def test_constant_martingale():
    v = np.tile(np.array([3.0, -4.0]), (4, 8, 1))
    m = FiniteMartingale(v)
    np.testing.assert_allclose(martingale_square_fn(m, 1.5), 5.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31))
def test_pythagoras_for_increments(depth, seed):
    m = FiniteMartingale.random(depth, 1, np.random.default_rng(seed))
    s2 = np.mean(martingale_square_fn(m, 2.0) ** 2)
    mn = np.mean(m.values[-1, :, 0] ** 2)
    assert s2 == pytest.approx(mn, rel=1e-12)


def test_square_fn_matches_resummation():
    m = FiniteMartingale.random(6, 4, np.random.default_rng(11))
    sp = NormedSpace.lr(2, 4)
    got = martingale_square_fn(m, 2.0, sp)
    want = np.empty(64)
    for atom in range(64):
        acc = math.sqrt(sum(c * c for c in m.values[0, atom])) ** 2.0
        for n in range(1, 7):
            d = m.values[n, atom] - m.values[n - 1, atom]
            acc += math.sqrt(sum(c * c for c in d)) ** 2.0
        want[atom] = acc ** 0.5
    np.testing.assert_allclose(got, want, rtol=1e-15)


def test_rejects_non_martingales():
    m = FiniteMartingale.random(3, 1, np.random.default_rng(0))
    bad = m.values.copy()
    bad[2, 0, 0] += 1.0  # breaks adaptedness
    with pytest.raises(ValueError):
        martingale_square_fn(FiniteMartingale(bad), 2.0)
    drift = m.values.copy()
    drift[1:] += 1.0  # adapted but not a martingale
    with pytest.raises(ValueError):
        martingale_square_fn(FiniteMartingale(drift), 2.0)
    with pytest.raises(ValueError):
        FiniteMartingale(np.zeros((3, 5)))


@pytest.mark.parametrize("dim", [1, 4])
def test_lusin_probe_hilbert(dim):
    spec = GFunctionSpec(FractionalOrder(1.0), q=2.0)
    rep = lusin_ratio_probe(SemigroupId.classical(1), NormedSpace.lr(2, dim), spec, 2.0, trials=4, seed=5)
    assert np.max(np.abs(rep.cotype - 0.5)) <= 1e-3
    np.testing.assert_allclose(rep.type * rep.cotype, 1.0)
    s = rep.summary()
    assert s["r_cotype"]["min"] <= s["r_cotype"]["median"] <= s["r_cotype"]["max"]


def test_lusin_single_mode_ratio():
    f = SampledField.hermite_grid(121, func=lambda x: hermite_fn(2, x))
    g = g_function_field(SemigroupId.hermite(1), f, GFunctionSpec(FractionalOrder(1.0))).field
    for p in (1.5, 2.0, 3.0):
        assert g.lp_norm(p) / f.lp_norm(p) == pytest.approx(0.5, rel=1e-6)


def test_lusin_probe_validation():
    spec = GFunctionSpec(FractionalOrder(1.0))
    with pytest.raises(ValueError):
        lusin_ratio_probe(SemigroupId.hermite(1), NormedSpace.lr(2, 1), spec, 1.0, 2)
    with pytest.raises(ValueError):
        lusin_ratio_probe(SemigroupId.hermite(1), NormedSpace.lr(2, 1), spec, 2.0, 0)
