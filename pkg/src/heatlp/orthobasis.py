"""Hermite and Laguerre functions, the modified Bessel function I_beta and
the quadrature rules shared by the rest of the package.

All evaluators work on numpy arrays and are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from .errors import ConvergenceError

PI_M14 = math.pi ** -0.25


class MultiIndex(tuple):
    """Tuple of nonnegative integers ``(k_1, ..., k_n)``."""

    def __new__(cls, k: Sequence[int]):
        k = tuple(int(v) for v in k)
        if any(v < 0 for v in k):
            raise ValueError(f"multi-index entries must be >= 0, got {k}")
        return super().__new__(cls, k)

    @property
    def order(self) -> int:
        return sum(self)


@dataclass(frozen=True)
class BesselOrder:
    beta: float

    def __post_init__(self):
        if not self.beta > -0.5:
            raise ValueError(f"Bessel/Laguerre order must exceed -1/2, got {self.beta}")

    def __float__(self) -> float:
        return float(self.beta)


def _beta(beta) -> float:
    return float(beta.beta) if isinstance(beta, BesselOrder) else float(BesselOrder(beta).beta)


# ---------------------------------------------------------------------------
# Hermite functions


def hermite_functions(lmax: int, z) -> np.ndarray:
    """All normalized Hermite functions ``H_0 .. H_lmax`` at ``z``.

    Returns an array of shape ``(lmax + 1,) + np.shape(z)``. Uses the
    three-term recurrence of the normalized functions so no factorial is
    ever formed.
    """
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("hermite functions need finite arguments")
    if lmax < 0:
        raise ValueError("lmax must be >= 0")
    out = np.empty((lmax + 1,) + z.shape)
    out[0] = PI_M14 * np.exp(-0.5 * z * z)
    if lmax >= 1:
        out[1] = math.sqrt(2.0) * z * out[0]
    for l in range(1, lmax):
        out[l + 1] = math.sqrt(2.0 / (l + 1)) * z * out[l] - math.sqrt(l / (l + 1)) * out[l - 1]
    return out


def hermite_fn(l: int, z):
    """Normalized Hermite function ``(sqrt(pi) 2^l l!)^{-1/2} e^{-z^2/2} p_l(z)``."""
    if l < 0:
        raise ValueError("Hermite index must be >= 0")
    val = hermite_functions(l, z)[l]
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# Laguerre functions


def laguerre_functions(kmax: int, beta, x) -> np.ndarray:
    """Laguerre functions ``phi_0^beta .. phi_kmax^beta`` at ``x > 0``.

    ``phi_k(x) = sqrt(2 k! / Gamma(k+1+beta)) e^{-x^2/2} x^{beta+1/2} L_k^beta(x^2)``,
    built from the recurrence of the normalized polynomials
    ``ell_k = sqrt(k!/Gamma(k+beta+1)) L_k^beta``.
    """
    b = _beta(beta)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("Laguerre functions are defined for x > 0 only")
    s = x * x
    out = np.empty((kmax + 1,) + x.shape)
    # prefactor sqrt(2) e^{-x^2/2} x^{beta+1/2} / sqrt(Gamma(beta+1)) in log form
    out[0] = np.exp(0.5 * math.log(2.0) - 0.5 * gammaln(b + 1.0) - 0.5 * s + (b + 0.5) * np.log(x))
    if kmax >= 1:
        out[1] = (b + 1.0 - s) * out[0] / math.sqrt(b + 1.0)
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + b + 1.0 - s) * out[k] - math.sqrt(k * (k + b)) * out[k - 1]) / math.sqrt(
            (k + 1) * (k + b + 1.0)
        )
    return out


def laguerre_fn(k: int, beta, x):
    if k < 0:
        raise ValueError("Laguerre index must be >= 0")
    val = laguerre_functions(k, beta, x)[k]
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# Modified Bessel function of the first kind


def bessel_asymptotic_coeff(beta: float, l: int) -> float:
    """``[beta, l] = prod_{j=1}^{l} (4 beta^2 - (2j-1)^2) / (2^{2l} l!)``."""
    b = float(beta)
    num = 1.0
    for j in range(1, l + 1):
        num *= 4.0 * b * b - (2 * j - 1) ** 2
    return num / (4.0**l * math.factorial(l))


def bessel_crossover(beta: float) -> float:
    return max(15.0, 2.0 * float(beta) ** 2)


def _bessel_series_log_scaled(b: float, z: np.ndarray) -> np.ndarray:
    # e^{-z} I_b(z) = sum_j exp(log_term_j), all terms positive for b > -1
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        return z.copy()
    jmax = int(np.max(z)) + 60
    log_half = np.log(0.5 * z)
    log_t = b * log_half - gammaln(b + 1.0) - z
    j = np.arange(1, jmax + 1)[:, None]
    incr = 2.0 * log_half[None, :] - np.log(j) - np.log(j + b)
    logs = np.vstack([log_t[None, :], log_t[None, :] + np.cumsum(incr, axis=0)])
    top = logs.max(axis=0)
    total = np.exp(logs - top).sum(axis=0)
    last = np.exp(logs[-1] - top)
    if np.any(last > 1e-17 * total):
        raise ConvergenceError("Bessel power series did not converge")
    return top + np.log(total)


def _bessel_series_scaled(b: float, z: np.ndarray) -> np.ndarray:
    return np.exp(_bessel_series_log_scaled(b, z))


def _bessel_asymptotic_scaled(b: float, z: np.ndarray, kmax: int = 80) -> tuple[np.ndarray, np.ndarray]:
    """Optimally truncated large-argument expansion; returns value and size of the last term."""
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    last = np.zeros_like(z)
    coeff_ratio = 1.0
    for l in range(1, kmax + 1):
        # term_l / term_{l-1} = -(4b^2-(2l-1)^2) / (4 l * 2z)
        coeff_ratio = -(4.0 * b * b - (2 * l - 1) ** 2) / (4.0 * l)
        new = term * coeff_ratio / (2.0 * z)
        growing = np.abs(new) >= np.abs(term)
        active &= ~growing
        if not active.any():
            break
        total = np.where(active, total + new, total)
        term = np.where(active, new, term)
        last = np.where(active, np.abs(new), last)
        active &= np.abs(new) > 1e-17 * np.abs(total)
        if not active.any():
            break
    return total / np.sqrt(2.0 * math.pi * z), last


def _log_bessel_scaled(b: float, flat: np.ndarray) -> np.ndarray:
    out = np.empty_like(flat)
    big = flat >= bessel_crossover(b)
    if np.any(~big):
        out[~big] = _bessel_series_log_scaled(b, flat[~big])
    if np.any(big):
        val, last = _bessel_asymptotic_scaled(b, flat[big])
        logval = np.log(val)
        bad = last > 1e-13
        if np.any(bad):
            # expansion not accurate enough yet; the series always converges
            logval[bad] = _bessel_series_log_scaled(b, flat[big][bad])
        out[big] = logval
    return out


def _check_z(z):
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr > 0)) or not np.all(np.isfinite(z_arr)):
        raise ValueError("bessel_i needs finite z > 0")
    return z_arr


def bessel_i(beta, z, scaled: bool = False):
    """Modified Bessel function ``I_beta(z)`` for ``z > 0``.

    Power series below the crossover ``max(15, 2 beta^2)``, the large-argument
    expansion with coefficients ``[beta, l]`` above it. With ``scaled=True``
    returns ``e^{-z} I_beta(z)``.
    """
    b = _beta(beta)
    z_arr = _check_z(z)
    flat = z_arr.ravel()
    logs = _log_bessel_scaled(b, flat)
    out = np.exp(logs if scaled else logs + flat).reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def log_bessel_i_scaled(beta, z):
    """``log(e^{-z} I_beta(z))``, finite even where ``I_beta`` under- or overflows."""
    b = _beta(beta)
    z_arr = _check_z(z)
    out = _log_bessel_scaled(b, z_arr.ravel()).reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def gamma(x):
    return math.gamma(x)


# ---------------------------------------------------------------------------
# Quadrature rules


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    domain: str  # "interval", "half-line", "log-time"

    def __post_init__(self):
        if len(self.nodes) < 2 or len(self.nodes) != len(self.weights):
            raise ValueError("a quadrature rule needs >= 2 nodes and matching weights")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def integrate(self, values, axis: int = 0):
        return np.tensordot(self.weights, np.asarray(values), axes=([0], [axis]))

    def __len__(self):
        return len(self.nodes)


def _panel_rule(breaks: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def gauss_legendre(a: float, b: float, order: int = 20, panels: int = 1) -> QuadratureRule:
    """Composite Gauss-Legendre rule on ``[a, b]``."""
    if not b > a:
        raise ValueError("need b > a")
    nodes, weights = _panel_rule(np.linspace(a, b, panels + 1), order)
    return QuadratureRule(nodes, weights, "interval")


def half_line_rule(
    u_min: float = -40.0, u_max: float = 3.0, order: int = 16, coarse: float = 1.0, fine: float = 0.05
) -> QuadratureRule:
    """Rule for ``int_0^inf g(x) dx`` via ``x = e^u`` and Gauss-Legendre panels in ``u``.

    Panels have width ``coarse`` for ``u < 0`` and ``fine`` above, where
    Laguerre functions of moderate degree oscillate.
    """
    lo = np.linspace(u_min, min(0.0, u_max), max(1, int(math.ceil((min(0.0, u_max) - u_min) / coarse))) + 1)
    hi = np.linspace(0.0, u_max, max(1, int(math.ceil(u_max / fine))) + 1) if u_max > 0 else np.array([])
    breaks = np.concatenate([lo, hi[1:]]) if len(hi) else lo
    u, wu = _panel_rule(breaks, order)
    x = np.exp(u)
    return QuadratureRule(x, wu * x, "half-line")


def log_time_rule(t_min: float, t_max: float, panels: int = 48, order: int = 8) -> QuadratureRule:
    """Rule for ``int_{t_min}^{t_max} g(t) dt/t``; nodes are times, weights act on ``dt/t``."""
    if not (t_max > t_min > 0):
        raise ValueError("need 0 < t_min < t_max")
    s, ws = _panel_rule(np.linspace(math.log(t_min), math.log(t_max), panels + 1), order)
    return QuadratureRule(np.exp(s), ws, "log-time")


def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite rule rescaled to plain Lebesgue measure on the line.

    Weights include the ``e^{x^2}`` factor, so ``sum w g(x)`` approximates
    ``int g dx`` for integrands that decay like ``e^{-x^2}``.
    """
    from scipy.special import roots_hermite

    x, w = roots_hermite(order)
    return QuadratureRule(x, w * np.exp(x * x), "interval")
