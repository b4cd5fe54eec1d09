"""Eigenbasis expansions and diagonal (spectral) application of heat semigroups.

Classical semigroups use a periodic Fourier box; Hermite and Laguerre
semigroups use their orthonormal eigenfunctions with quadrature taken from
the field's own grid weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, TruncationError
from .fields import SampledField
from .kernels import SemigroupId
from .orthobasis import _panel_rule, hermite_functions, laguerre_functions


def fractional_weight(lam, t, ord=None):
    """Per-mode multiplier: ``e^{-lam t}`` or ``(-1)^m lam^alpha e^{-lam t}``."""
    lam = np.asarray(lam, dtype=float)
    decay = np.exp(-lam * t)
    if ord is None:
        return decay
    with np.errstate(divide="ignore"):
        powered = np.where(lam > 0, np.abs(lam) ** ord.alpha, 0.0)
    return (-1.0) ** ord.m * powered * decay


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenbasis of a heat semigroup truncated at ``K``.

    Hermite: tensor indices with every ``k_i <= K``, ``lambda_k = 2|k| + n``.
    Laguerre: ``k <= K``, ``lambda_k = 2k + beta + 1``. Classical: all
    frequencies of the Fourier box, ``lambda = |xi|^2``; ``K`` is unused.
    """

    semigroup: SemigroupId
    K: int = 60

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("truncation K must be >= 1")

    def eigenvalues(self, field: SampledField | None = None) -> np.ndarray:
        sg = self.semigroup
        if sg.kind == "hermite":
            j = np.arange(self.K + 1)
            grids = np.meshgrid(*([j] * sg.n), indexing="ij")
            return 2.0 * sum(grids) + sg.n
        if sg.kind == "laguerre":
            return 2.0 * np.arange(self.K + 1) + sg.beta + 1.0
        if field is None or not field.periodic:
            raise ValueError("classical eigenvalues need a Fourier-box field")
        xis = [2.0 * math.pi * np.fft.fftfreq(len(a), d=a[1] - a[0]) for a in field.axes]
        grids = np.meshgrid(*xis, indexing="ij")
        return sum(g * g for g in grids)

    def smallest_eigenvalue(self, field: SampledField | None = None) -> float:
        lam = self.eigenvalues(field)
        return float(lam[lam > 0].min())

    def largest_eigenvalue(self, field: SampledField | None = None) -> float:
        return float(self.eigenvalues(field).max())

    def fixed_point_projection(self, f: SampledField) -> SampledField:
        """Semigroup's fixed-point projection as realised by this discretisation.

        Zero for Hermite and Laguerre. The periodic box adds the constants
        (the zero frequency) as fixed points, so the box version projects
        onto the mean.
        """
        if self.semigroup.kind == "classical":
            if not f.periodic:
                raise ValueError("classical spectral engine needs a Fourier-box field")
            vol = float(np.prod([len(a) * (a[1] - a[0]) for a in f.axes]))
            mean = f.integrate() / vol
            return f.with_values(np.broadcast_to(mean, f.values.shape).copy())
        return self.semigroup.fixed_point_projection(f)

    def _matrices(self, field: SampledField):
        sg = self.semigroup
        if sg.kind == "hermite":
            if field.ndim != sg.n:
                raise ValueError("field dimension does not match the Hermite semigroup")
            return [hermite_functions(self.K, a) for a in field.axes]
        if field.domain != "half-line":
            raise ValueError("laguerre expansions need a half-line field")
        return [laguerre_functions(self.K, sg.beta, field.axes[0])]


@dataclass(frozen=True)
class CoefficientVector:
    """Mode coefficients of a (vector valued) field plus the energy they miss."""

    coeffs: np.ndarray  # mode axes + (M,)
    basis: SpectralBasis
    grid: SampledField
    tail_energy: float

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


def expand(f: SampledField, basis: SpectralBasis, tol: float | None = 1e-8) -> CoefficientVector:
    """Coefficients of ``f`` by quadrature; ``tol`` bounds the relative tail energy."""
    sg = basis.semigroup
    norm2 = float(f.integrate(np.sum(f.values**2, axis=-1)))
    if sg.kind == "classical":
        if not f.periodic:
            raise ValueError("classical spectral engine needs a Fourier-box field")
        axes = tuple(range(f.ndim))
        vol = np.prod([len(a) * (a[1] - a[0]) for a in f.axes])
        cell = np.prod([a[1] - a[0] for a in f.axes])
        c = np.fft.fftn(f.values, axes=axes) * cell / math.sqrt(vol)
        # Parseval is exact on the box; unresolved content shows up near the Nyquist frequency
        lam = basis.eigenvalues(f)
        high = lam > 0.64 * lam.max()
        tail = float(np.sum(np.abs(c[high]) ** 2))
    else:
        c = f.values
        for i, (phi, w) in enumerate(zip(basis._matrices(f), f.weights)):
            c = np.moveaxis(np.tensordot(phi * w[None, :], c, axes=([1], [i])), 0, i)
        tail = max(norm2 - float(np.sum(c**2)), 0.0)
    if tol is not None and tail > tol * max(norm2, 1e-300):
        raise TruncationError(f"field not resolved by the basis (tail energy {tail:.3e})", tail)
    return CoefficientVector(c, basis, f, tail)


def synthesize(coeffs: CoefficientVector, weights=None) -> SampledField:
    """``sum_k w_k c_k e_k`` on the grid the coefficients came from."""
    basis, grid = coeffs.basis, coeffs.grid
    c = coeffs.coeffs if weights is None else coeffs.coeffs * np.asarray(weights)[..., None]
    if basis.semigroup.kind == "classical":
        axes = tuple(range(grid.ndim))
        vol = np.prod([len(a) * (a[1] - a[0]) for a in grid.axes])
        cell = np.prod([a[1] - a[0] for a in grid.axes])
        vals = np.fft.ifftn(c, axes=axes).real * math.sqrt(vol) / cell
        return grid.with_values(vals)
    vals = c
    for i, phi in enumerate(basis._matrices(grid)):
        vals = np.moveaxis(np.tensordot(phi.T, vals, axes=([1], [i])), 0, i)
    return grid.with_values(vals)


def synthesize_at(coeffs: CoefficientVector, axes, weights=None) -> np.ndarray:
    """Like :func:`synthesize` but on another tensor grid; returns ``grid_shape + (M,)``.

    Not available for the Fourier box, whose modes live on its own grid.
    """
    basis = coeffs.basis
    if basis.semigroup.kind == "classical":
        raise ValueError("Fourier-box fields can only be synthesized on their own grid")
    c = coeffs.coeffs if weights is None else coeffs.coeffs * np.asarray(weights)[..., None]
    probe = SampledField(tuple(axes), np.zeros(tuple(len(a) for a in axes)), tuple(np.ones(len(a)) for a in axes),
                         domain=coeffs.grid.domain)
    vals = c
    for i, phi in enumerate(basis._matrices(probe)):
        vals = np.moveaxis(np.tensordot(phi.T, vals, axes=([1], [i])), 0, i)
    return vals


def spectral_apply(
    coeffs: CoefficientVector, t: float, ord=None, tol: float | None = None
) -> SampledField:
    """``T_t f`` (or ``d_t^alpha T_t f``) as a diagonal multiplier on the coefficients.

    With ``tol`` set, raises when the bound ``sqrt(tail) * max_{lam > Lambda} lam^alpha e^{-lam t}``
    on the neglected modes exceeds it.
    """
    if not t > 0:
        raise ValueError("time must be > 0")
    basis = coeffs.basis
    lam = basis.eigenvalues(coeffs.grid)
    if tol is not None and basis.semigroup.kind != "classical":
        top = float(lam.max())
        a = ord.alpha if ord is not None else 0.0
        peak = max(top, a / t)
        bound = math.sqrt(coeffs.tail_energy) * peak**a * math.exp(-peak * t)
        if bound > tol:
            raise TruncationError(f"spectral tail bound {bound:.3e} exceeds {tol:.1e}", bound)
    return synthesize(coeffs, fractional_weight(lam, t, ord))


# ---------------------------------------------------------------------------
# polarization identity


def pairing_constant(alpha: float) -> float:
    """``Gamma(2 alpha) / 2^{2 alpha}``."""
    return math.gamma(2.0 * alpha) / 4.0**alpha


def log_time_window(lam_min: float, lam_max: float, alpha: float, eps: float = 1e-15):
    """Window ``[t_min, t_max]`` outside which ``(t lam)^{2a} e^{-2 lam t}`` is below ``eps``."""

    def excess(logx):
        x = math.exp(logx)
        return 2.0 * alpha * logx - 2.0 * x - math.log(eps)

    peak = math.log(alpha)  # the integrand is largest at lam t = alpha
    lo = brentq(excess, math.log(eps) / alpha - 5.0, peak)
    hi = brentq(excess, peak, 10.0)
    return math.exp(lo) / lam_max, math.exp(hi) / lam_min


def single_mode_time_integral(lam: float, alpha: float, panels_per_unit: float = 2.0, order: int = 10) -> float:
    """``int_0^inf (t lam)^{2 alpha} e^{-2 lam t} dt/t`` by log-time quadrature."""
    t0, t1 = log_time_window(lam, lam, alpha)
    s, w = _log_nodes(t0, t1, panels_per_unit, order)
    t = np.exp(s)
    return float(np.dot(w, (t * lam) ** (2.0 * alpha) * np.exp(-2.0 * lam * t)))


def _log_nodes(t0, t1, panels_per_unit, order):
    span = math.log(t1) - math.log(t0)
    panels = max(4, int(math.ceil(span * panels_per_unit)))
    return _panel_rule(np.linspace(math.log(t0), math.log(t1), panels + 1), order)


@dataclass(frozen=True)
class PairingResult:
    lhs: float
    rhs: float
    gap: float
    constant: float
    window: tuple
    nodes: int


def polarization_pairing(
    f: SampledField,
    g: SampledField,
    sg: SemigroupId,
    ord,
    basis: SpectralBasis | None = None,
    panels_per_unit: float = 2.0,
    order: int = 10,
) -> PairingResult:
    """Both sides of ``int_0^inf <t^a d^a T_t f, t^a d^a T_t g> dt/t = c_a <f - Ff, g - Fg>``.

    The left side is a log-time quadrature of spatial inner products of the
    spectrally evolved fields; the right side uses the raw samples.
    """
    basis = basis or SpectralBasis(sg)
    if basis.semigroup != sg:
        raise ValueError("basis belongs to a different semigroup")
    cf = expand(f, basis, tol=None)
    cg = expand(g, basis, tol=None)
    lam = basis.eigenvalues(f)
    t0, t1 = log_time_window(basis.smallest_eigenvalue(f), float(lam.max()), ord.alpha)
    s, w = _log_nodes(t0, t1, panels_per_unit, order)
    lhs = 0.0
    for si, wi in zip(s, w):
        t = math.exp(si)
        mult = fractional_weight(lam, t, ord) * t**ord.alpha
        u = synthesize(cf, mult)
        v = synthesize(cg, mult)
        lhs += wi * u.inner(v)
    f0 = f.with_values(f.values - basis.fixed_point_projection(f).values)
    g0 = g.with_values(g.values - basis.fixed_point_projection(g).values)
    const = pairing_constant(ord.alpha)
    rhs = const * f0.inner(g0)
    scale = max(abs(lhs), abs(rhs))
    gap = abs(lhs - rhs) / scale if scale > 1e-300 else 0.0
    if not math.isfinite(lhs):
        raise ConvergenceError("pairing quadrature produced a non-finite value")
    return PairingResult(float(lhs), float(rhs), float(gap), const, (t0, t1), len(s))
