"""Weyl fractional time derivatives.

``d^alpha phi(t) = Gamma(m - alpha)^{-1} int_t^inf phi^{(m)}(u) (u - t)^{m - alpha - 1} du``
with ``m - 1 <= alpha < m``. The endpoint singularity is removed with
``u = t + v^{1/(m - alpha)}``, which turns the weight into a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConvergenceError
from .fields import SampledField
from .kernels import SemigroupId, kernel_time_derivative, richardson_derivative
from .spectral import SpectralBasis, expand, fractional_weight, spectral_apply


@dataclass(frozen=True)
class FractionalOrder:
    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"fractional order must be a positive real, got {self.alpha}")

    @property
    def m(self) -> int:
        """Integer with ``m - 1 <= alpha < m``."""
        return int(math.floor(self.alpha)) + 1

    @property
    def s(self) -> float:
        return self.m - self.alpha

    def __add__(self, other: "FractionalOrder") -> "FractionalOrder":
        return FractionalOrder(self.alpha + other.alpha)


@dataclass(frozen=True)
class TimeProfile:
    """A time profile ``phi`` with its derivatives.

    ``deriv(k, u)`` returns ``phi^{(k)}(u)``; arrays in ``u`` map to arrays
    whose leading axis runs over ``u``. Without it, derivatives up to order 2
    come from extrapolated central differences. ``decay_rate`` is a hint
    ``phi ~ e^{-rate u}`` used to size the first integration panel.
    """

    func: Callable
    deriv: Callable | None = None
    decay_rate: float | None = None

    def derivative(self, k: int, u):
        u = np.asarray(u, dtype=float)
        if k == 0:
            return self.func(u)
        if self.deriv is not None:
            return self.deriv(k, u)
        return richardson_derivative(self.func, u, k, rel_step=0.02)

    @classmethod
    def exponential(cls, lam: float, scale: float = 1.0):
        """``scale * e^{-lam u}``."""
        return cls(
            lambda u: scale * np.exp(-lam * u),
            lambda k, u: scale * (-lam) ** k * np.exp(-lam * u),
            decay_rate=lam,
        )


_GL = {q: leggauss(q) for q in (16, 24)}


def _panels(fn, a, b, order):
    x, w = _GL[order]
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    nodes = (0.5 * (b - a)[:, None] * x[None, :] + 0.5 * (a + b)[:, None]).ravel()
    weights = (0.5 * (b - a)[:, None] * w[None, :]).ravel()
    vals = np.asarray(fn(nodes))
    vals = vals.reshape((len(a), len(x)) + vals.shape[1:])
    return np.tensordot(weights.reshape(len(a), len(x)), vals, axes=([0, 1], [0, 1]))


def _weyl_integral(phi: TimeProfile, m: int, s: float, t: float, order: int, tol: float, max_panels: int):
    w1 = t if phi.decay_rate is None else min(t, 1.0 / phi.decay_rate)

    # near part: u in [t, t + w1], v in [0, w1^s], integrand (1/s) phi^{(m)}(t + v^{1/s})
    vmax = w1**s
    edges = vmax * np.concatenate([[0.0], 2.0 ** -np.arange(24, -1, -1.0)])

    def near(v):
        return phi.derivative(m, t + v ** (1.0 / s)) / s

    total = _panels(near, edges[:-1], edges[1:], order)

    # far part: u - t in [w1 2^j, w1 2^{j+1}], weight (u - t)^{s-1}
    def far(u):
        vals = np.asarray(phi.derivative(m, u))
        wt = (u - t) ** (s - 1.0)
        return vals * wt.reshape((-1,) + (1,) * (vals.ndim - 1))

    scale = np.max(np.abs(total))
    quiet = 0
    prev = None
    tail = 0.0
    for j in range(max_panels):
        lo = t + w1 * 2.0**j
        sub = np.linspace(lo, t + w1 * 2.0 ** (j + 1), 5)
        piece = _panels(far, sub[:-1], sub[1:], order)
        total = total + piece
        size = float(np.max(np.abs(piece)))
        scale = max(scale, float(np.max(np.abs(total))))
        if size <= tol * max(scale, 1e-300):
            quiet += 1
            if quiet >= 3:
                ratio = size / prev if prev else 0.0
                tail = size * ratio / (1.0 - ratio) if ratio < 1.0 else size
                return total, tail, scale
        else:
            quiet = 0
        prev = size
    raise ConvergenceError(f"Weyl tail not below {tol:.1e} after {max_panels} doubling panels")


def weyl_derivative_fn(
    phi: TimeProfile, ord: FractionalOrder, t: float, tol: float = 1e-14, max_panels: int = 200
):
    """``d_t^alpha phi(t)`` and an error estimate.

    The estimate combines the difference between 16- and 24-point panel
    rules with a geometric bound on the truncated tail.
    """
    if not t > 0:
        raise ValueError("time must be > 0")
    m, s = ord.m, ord.s
    hi, tail, scale = _weyl_integral(phi, m, s, t, 24, tol, max_panels)
    lo, _, _ = _weyl_integral(phi, m, s, t, 16, tol, max_panels)
    g = math.gamma(s)
    value = hi / g
    err = (np.abs(hi - lo) + tail) / g
    if np.ndim(value) == 0:
        return float(value), float(err)
    return value, err


# ---------------------------------------------------------------------------
# fractional derivatives of semigroup actions


def default_basis(sg: SemigroupId, f: SampledField) -> SpectralBasis:
    return SpectralBasis(sg, K=60)


def frac_semigroup_apply(
    sg: SemigroupId,
    f: SampledField,
    ord: FractionalOrder,
    t: float,
    route: str = "spectral",
    basis: SpectralBasis | None = None,
    points=None,
    tol: float | None = 1e-10,
):
    """``d_t^alpha T_t f`` at time ``t``.

    ``route="spectral"`` multiplies eigen-coefficients by ``(-1)^m lam^alpha e^{-lam t}``
    and returns a field on ``f``'s grid. ``route="kernel"`` applies the Weyl
    integral to ``u -> T_u f(x)`` computed by kernel quadrature, at
    ``points`` (default: the grid points), and returns an array of shape
    ``(P, M)``.
    """
    if not t > 0:
        raise ValueError("time must be > 0")
    if route == "spectral":
        basis = basis or default_basis(sg, f)
        coeffs = expand(f, basis, tol=None)
        return spectral_apply(coeffs, t, ord, tol=tol)
    if route != "kernel":
        raise ValueError(f"unknown route {route!r}")
    if points is None:
        points = f.points().reshape(-1, f.ndim)
    pts = np.asarray(points, dtype=float).reshape(-1, f.ndim)
    profile = kernel_profile(sg, f, pts)
    val, _ = weyl_derivative_fn(profile, ord, t, tol=1e-13)
    return np.asarray(val).reshape(len(pts), f.ncomp)


def kernel_profile(sg: SemigroupId, f: SampledField, pts: np.ndarray) -> TimeProfile:
    """``u -> T_u f(x)`` at the given points, by quadrature over ``f``'s grid."""
    ys = f.points().reshape(-1, f.ndim)
    w = f.cell_weights().reshape(-1)
    vals = f.values.reshape(-1, f.ncomp) * w[:, None]
    if sg.n == 1:
        X = pts[:, 0][:, None]
        Y = ys[:, 0][None, :]
    else:
        X = pts[:, None, :]
        Y = ys[None, :, :]

    def deriv(k, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty((len(u), len(pts), f.ncomp))
        for i, ui in enumerate(u):
            kern = kernel_time_derivative(sg, k, ui, X, Y)
            out[i] = kern @ vals
        return out

    return TimeProfile(lambda u: deriv(0, u), deriv)


def eigen_law(lam: float, ord: FractionalOrder, t: float) -> float:
    """``(-1)^m lam^alpha e^{-lam t}``."""
    return float(fractional_weight(np.array(lam), t, ord))
