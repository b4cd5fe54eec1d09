"""Littlewood-Paley g-functions, area integrals and the harmonic-analysis
tools around them: subordinated Poisson semigroups, Hardy operators, the
centered maximal function and critical-radius coverings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import TruncationError
from .fields import SampledField
from .frac import FractionalOrder
from .kernels import SemigroupId, heat_kernel, kernel_time_derivative
from .orthobasis import QuadratureRule, _panel_rule, log_time_rule
from .spectral import (
    SpectralBasis,
    expand,
    fractional_weight,
    synthesize,
    synthesize_at,
)


def euclidean_norm(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(values * values, axis=-1))


@dataclass(frozen=True)
class GFunctionSpec:
    """Order, exponent, target space and time quadrature of a square function.

    ``space`` is anything with a vectorised ``norm(values)`` over the last
    axis; ``None`` means the Euclidean norm. Cones have aperture one.
    """

    ord: FractionalOrder
    q: float = 2.0
    space: object = None
    t_min: float = 1e-4
    t_max: float = 50.0
    panels: int = 48
    order: int = 8
    tail_tol: float | None = None

    def __post_init__(self):
        if not self.q > 1:
            raise ValueError("q must exceed 1")
        if not (0 < self.t_min < self.t_max):
            raise ValueError("need 0 < t_min < t_max")
        if self.panels < 1 or self.order < 2:
            raise ValueError("bad time quadrature parameters")

    def time_rule(self) -> QuadratureRule:
        return log_time_rule(self.t_min, self.t_max, self.panels, self.order)

    def norm(self, values: np.ndarray) -> np.ndarray:
        return euclidean_norm(values) if self.space is None else self.space.norm(values)

    def refined(self, factor: int = 10) -> "GFunctionSpec":
        return GFunctionSpec(self.ord, self.q, self.space, self.t_min, self.t_max, self.panels * factor,
                             self.order, self.tail_tol)


# ---------------------------------------------------------------------------
# subordination


def subordination_rule(u_min: float = -60.0, u_max: float = 4.0, width: float = 0.5, order: int = 16):
    """Nodes ``v`` and weights for ``pi^{-1/2} int_0^inf e^{-v} v^{-1/2} F(v) dv``.

    Uses ``v = e^u`` with Gauss-Legendre panels in ``u``, so the density
    ``e^{-v} v^{-1/2}`` and the Jacobian are folded into the weights.
    """
    panels = int(math.ceil((u_max - u_min) / width))
    u, w = _panel_rule(np.linspace(u_min, u_max, panels + 1), order)
    v = np.exp(u)
    return v, w * np.exp(-v) * np.sqrt(v) / math.sqrt(math.pi)


def subordination_scalar(lam, t: float, rule=None):
    """``pi^{-1/2} int e^{-v} v^{-1/2} e^{-lam t^2/(4v)} dv``, which equals ``e^{-t sqrt(lam)}``."""
    v, w = rule or subordination_rule()
    lam = np.asarray(lam, dtype=float)
    return np.tensordot(np.exp(-np.multiply.outer(lam, t * t / (4.0 * v))), w, axes=([-1], [0]))


def poisson_derivative_multiplier(lam, t: float, rule=None):
    """``t d_t P_t`` on an eigenmode, from the subordination integral.

    ``t d_t e^{-lam t^2/(4v)} = -(lam t^2/(2v)) e^{-lam t^2/(4v)}``.
    """
    v, w = rule or subordination_rule()
    lam = np.asarray(lam, dtype=float)
    tau = t * t / (4.0 * v)
    x = np.multiply.outer(lam, tau)
    return np.tensordot(-2.0 * x * np.exp(-x), w, axes=([-1], [0]))


def subordinated_kernel(sg: SemigroupId, t: float, x, y, rule=None):
    """Poisson kernel obtained by averaging heat kernels ``K_{t^2/(4v)}``."""
    v, w = rule or subordination_rule()
    out = 0.0
    for vi, wi in zip(v, w):
        out = out + wi * heat_kernel(sg, t * t / (4.0 * vi), x, y)
    return out


def subordinate_poisson_apply(
    sg: SemigroupId, f: SampledField, t: float, basis: SpectralBasis | None = None
) -> SampledField:
    """``P_t f`` through the subordination integral applied mode by mode."""
    if not t > 0:
        raise ValueError("time must be > 0")
    basis = basis or SpectralBasis(sg)
    coeffs = expand(f, basis, tol=None)
    return synthesize(coeffs, subordination_scalar(basis.eigenvalues(f), t))


def minkowski_constant(q: float) -> float:
    """Bound ``g^1_P <= C g^1_W`` from Minkowski's inequality: ``C = 2^{1 - 1/q}``.

    ``t d_t P_t f = (2/sqrt(pi)) int e^{-v} v^{-1/2} G(t^2/4v) dv`` with
    ``G(tau) = tau d_tau W_tau f``; each ``L^q(dt/t)`` norm of ``G(t^2/4v)``
    equals ``2^{-1/q} g^1_W``, and the ``v``-density integrates to ``2``.
    """
    return 2.0 ** (1.0 - 1.0 / q)


# ---------------------------------------------------------------------------
# g-functions


@dataclass(frozen=True)
class SquareFunctionResult:
    field: SampledField
    tail_low: float
    tail_high: float
    nodes: int

    @property
    def values(self) -> np.ndarray:
        return self.field.scalar()


def _time_multipliers(sg, basis, f, spec, poisson: bool):
    lam = basis.eigenvalues(f)
    a = spec.ord.alpha
    rule = spec.time_rule()
    sub = subordination_rule() if poisson else None
    for t, w in zip(rule.nodes, rule.weights):
        if poisson:
            mult = poisson_derivative_multiplier(lam, t, sub)
        else:
            mult = fractional_weight(lam, t, spec.ord) * t**a
        yield t, w, mult


def g_function_field(
    sg: SemigroupId,
    f: SampledField,
    spec: GFunctionSpec,
    basis: SpectralBasis | None = None,
    poisson: bool = False,
    at=None,
) -> SquareFunctionResult:
    """``g(x) = (int ||t^a d_t^a T_t f(x)||_B^q dt/t)^{1/q}`` on ``f``'s grid.

    Uses the spectral route at every node of a log-time rule. With
    ``poisson=True`` the subordinated Poisson semigroup replaces ``T_t``
    (first derivative only). ``at`` evaluates at other points of a
    one-dimensional Hermite or Laguerre field. The attached tail estimates bound the parts of
    ``(0, inf)`` outside the window: ``t^{a q}`` growth at zero and the
    ``t^{-n q/2}`` decay of compactly supported data at infinity.
    """
    if poisson and spec.ord.alpha != 1:
        raise ValueError("Poisson g-functions are implemented for the first derivative")
    basis = basis or SpectralBasis(sg)
    coeffs = expand(f, basis, tol=None)
    if at is not None:
        at = np.asarray(at, dtype=float)
    acc = np.zeros(f.grid_shape if at is None else at.shape)
    first = last = None
    count = 0
    for t, w, mult in _time_multipliers(sg, basis, f, spec, poisson):
        vals = synthesize(coeffs, mult).values if at is None else synthesize_at(coeffs, (at,), mult)
        integrand = spec.norm(vals) ** spec.q
        acc += w * integrand
        first = integrand if first is None else first
        last = integrand
        count += 1
    a = spec.ord.alpha
    tail_low = float(np.max(first)) / (a * spec.q)
    tail_high = float(np.max(last)) / (0.5 * sg.n * spec.q)
    total = float(np.max(acc))
    if spec.tail_tol is not None and total > 0 and (tail_low + tail_high) > spec.tail_tol * total:
        raise TruncationError("time window misses too much of the g-function integral", tail_low + tail_high)
    g = acc ** (1.0 / spec.q)
    out = f.with_values(g) if at is None else SampledField((at,), g, (np.ones(len(at)),), domain=f.domain)
    return SquareFunctionResult(out, tail_low, tail_high, count)


# ---------------------------------------------------------------------------
# area integrals


def _cone_lattice(f: SampledField, step: float):
    if f.periodic:
        return f.axes[0]
    lo, hi = float(f.axes[0].min()), float(f.axes[0].max())
    if f.domain == "half-line":
        lo = max(lo, step)
    return np.linspace(lo, hi, int(math.ceil((hi - lo) / step)) + 1)


def area_integral_field(
    sg: SemigroupId,
    f: SampledField,
    spec: GFunctionSpec,
    basis: SpectralBasis | None = None,
    lattice_step: float = 0.01,
    apex=None,
) -> SquareFunctionResult:
    """Conical square function in one dimension.

    ``A(x)^q = int_0^inf int_{|y-x|<t} ||F(y, t^2)||^q dy dt/t^2`` with
    ``F(y, s) = s^a d_s^a T_s f(y)``. ``F`` is computed once on a shared
    ``(y, s)`` lattice; every apex reuses the cumulative ``y``-integrals,
    interpolated exactly at the cone edges ``x +- t``. The time window of
    ``spec`` applies to ``s = t^2``.
    """
    if f.ndim != 1:
        raise NotImplementedError("area integrals are implemented in one dimension")
    basis = basis or SpectralBasis(sg)
    coeffs = expand(f, basis, tol=None)
    ys = _cone_lattice(f, lattice_step)
    apex = f.axes[0] if apex is None else np.asarray(apex, dtype=float)
    lam = basis.eigenvalues(f)
    rule = spec.time_rule()
    acc = np.zeros(len(apex))
    first = last = None
    for s, ws in zip(rule.nodes, rule.weights):
        mult = fractional_weight(lam, s, spec.ord) * s**spec.ord.alpha
        vals = synthesize(coeffs, mult).values if f.periodic else synthesize_at(coeffs, (ys,), mult)
        dens = spec.norm(vals) ** spec.q
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(ys))])
        t = math.sqrt(s)
        inner = np.interp(apex + t, ys, cum) - np.interp(apex - t, ys, cum)
        # dt/t = ds/(2s), and dt/t^2 = (dt/t)/t
        contrib = 0.5 * ws * inner / t
        acc += contrib
        first = inner / (2.0 * t) if first is None else first
        last = inner / (2.0 * t)
    tail_low = float(np.max(first)) / (spec.ord.alpha * spec.q)
    tail_high = float(np.max(last)) / (0.5 * spec.q)
    out = acc ** (1.0 / spec.q)
    if apex is f.axes[0] or (len(apex) == len(f.axes[0]) and np.array_equal(apex, f.axes[0])):
        res = f.with_values(out)
    else:
        res = SampledField((apex,), out, (np.ones(len(apex)),))
    return SquareFunctionResult(res, tail_low, tail_high, len(rule))


def unit_ball_measure(n: int) -> float:
    return math.pi ** (0.5 * n) / math.gamma(0.5 * n + 1.0)


# ---------------------------------------------------------------------------
# Hardy operators


def hardy_transform(g, x, direction: str = "from_zero", breaks: Sequence[float] = (), order: int = 20):
    """``H_0 g(x) = x^{-1} int_0^x g`` or ``H_inf g(x) = int_x^inf g(y)/y dy``.

    ``g`` is either samples on the positive grid ``x`` (cumulative
    trapezoid; ``g`` is taken constant on ``(0, x_0)`` and zero past the
    last point) or a callable, integrated with Gauss-Legendre on every cell
    between consecutive grid points and ``breaks``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise ValueError("Hardy transforms need an increasing positive grid")
    if direction not in ("from_zero", "to_infinity"):
        raise ValueError(f"unknown direction {direction!r}")
    if callable(g):
        if direction == "from_zero":
            edges = np.unique(np.concatenate([[0.0], x, [b for b in breaks if 0 < b < x[-1]]]))
            nodes, w = _panel_rule(edges, order)
            cells = (w * g(nodes)).reshape(len(edges) - 1, order).sum(axis=1)
            cum = np.concatenate([[0.0], np.cumsum(cells)])
            return cum[np.searchsorted(edges, x)] / x
        edges = np.unique(np.concatenate([[0.0], x, [b for b in breaks if b > 0]]))
        nodes, w = _panel_rule(edges, order)
        cells = (w * g(nodes) / nodes).reshape(len(edges) - 1, order).sum(axis=1)
        # beyond the last edge: int g(y)/y dy = int g(e^u) du over unit panels in u
        u0 = math.log(edges[-1])
        un, uw = _panel_rule(np.arange(u0, u0 + 60.0 + 0.5, 1.0), order)
        tail = float(np.sum(uw * g(np.exp(un))))
        rest = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]]) + tail
        return rest[np.searchsorted(edges, x)]
    g = np.asarray(g, dtype=float)
    if direction == "from_zero":
        cum = np.concatenate([[g[0] * x[0]], g[0] * x[0] + np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(x))])
        return cum / x
    h = g / x
    seg = 0.5 * (h[1:] + h[:-1]) * np.diff(x)
    return np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])


def hardy_norm_ratio(p: float, R: float, cells_per_decade: int = 40, decades_past: float = 8.0) -> dict:
    """``||H_0 g||_p / ||g||_p`` for ``g(y) = y^{-1/p}`` on ``(1, R)``.

    The family approaches the sharp constant ``p/(p-1)`` as ``R`` grows.
    Past the last grid point ``H_0 g = c/x`` exactly, so its ``L^p`` tail is added in
    closed form.
    """
    grid = np.geomspace(1e-3, R * 10.0**decades_past, int(cells_per_decade * (math.log10(R) + 3 + decades_past)) + 1)

    def g(y):
        return np.where((y > 1.0) & (y < R), y ** (-1.0 / p), 0.0)

    h = hardy_transform(g, grid, "from_zero", breaks=(1.0, R))
    edges = np.unique(np.concatenate([grid, [1.0, R]]))
    nodes, w = _panel_rule(np.concatenate([[0.0], edges]), 20)
    # interpolate H_0 g on GL nodes exactly: H_0 g(x) = cum(x)/x, cum piecewise smooth
    hn = hardy_transform(g, np.sort(nodes[nodes > 0]), "from_zero", breaks=(1.0, R))
    norm_h = float(np.sum(w[nodes > 0] * np.abs(hn) ** p))
    X = grid[-1]
    c = h[-1] * X
    norm_h += c**p * X ** (1.0 - p) / (p - 1.0)
    norm_g = math.log(R)
    ratio = (norm_h / norm_g) ** (1.0 / p)
    return {"p": p, "R": R, "ratio": ratio, "sharp": p / (p - 1.0)}


# ---------------------------------------------------------------------------
# maximal function


def maximal_fn(f: SampledField, n_log: int = 200) -> SampledField:
    """Centered Hardy-Littlewood maximal function of ``|f|`` in one dimension.

    ``f`` is taken as zero outside its grid. Radii: integer multiples of
    the grid step, a log-spaced sweep from one step to the domain width,
    and the ``r -> 0`` limit ``|f(x)|``. Averages come from the cumulative
    trapezoid, exact at grid-aligned radii for piecewise linear data.
    """
    if f.ndim != 1:
        raise NotImplementedError("maximal function implemented in one dimension")
    x = f.axes[0]
    a = f.pointwise_norm()
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (a[1:] + a[:-1]) * np.diff(x))])
    width = x[-1] - x[0]
    h = float(np.mean(np.diff(x)))
    radii = np.unique(np.concatenate([h * np.arange(1, len(x)), np.geomspace(h, width, n_log)]))
    best = a.copy()
    for r in radii:
        avg = (np.interp(x + r, x, cum) - np.interp(x - r, x, cum)) / (2.0 * r)
        np.maximum(best, avg, out=best)
    out = f.with_values(best)
    out.meta["maximal"] = "centered"
    return out


# ---------------------------------------------------------------------------
# critical radius and coverings


def critical_radius(x, n: int = 1):
    """``rho(x) = 1/2`` for ``|x| <= 1`` and ``1/(1+|x|)`` otherwise."""
    x = np.asarray(x, dtype=float)
    r = np.abs(x) if n == 1 else np.sqrt(np.sum(x * x, axis=-1))
    out = np.where(r <= 1.0, 0.5, 1.0 / (1.0 + r))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CoveringFamily:
    centers: np.ndarray
    radii: np.ndarray
    window: tuple
    M: float
    multiplicity: int
    ratio_sup: float
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.radii)


def _greedy_1d(a: float, b: float):
    centers = []
    # open balls: the closed window's endpoints must be interior points
    covered = a - 1e-9 * max(1.0, abs(a))
    # x - rho(x) is strictly increasing, so each new ball starts where the last ended
    while covered <= b:
        lo, hi = covered - 1.0, covered + 1.0
        c = brentq(lambda s: s - critical_radius(s) - covered, lo, hi, xtol=1e-14)
        centers.append(c)
        nxt = c + critical_radius(c)
        covered = nxt - 1e-12 * max(1.0, abs(nxt))  # keep open balls overlapping
    centers = np.array(centers)
    return centers, critical_radius(centers)


def _lattice_nd(box):
    box = [tuple(map(float, b)) for b in box]
    n = len(box)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    todo = [(lo, hi)]
    centers = []
    while todo:
        a, b = todo.pop()
        c = 0.5 * (a + b)
        if 0.5 * np.linalg.norm(b - a) < critical_radius(c, n):
            centers.append(c)
            continue
        for corner in range(2**n):
            bits = np.array([(corner >> i) & 1 for i in range(n)])
            todo.append((np.where(bits, c, a), np.where(bits, b, c)))
    centers = np.array(centers)
    return centers, critical_radius(centers, n)


def overlap_counts(centers: np.ndarray, radii: np.ndarray, M: float) -> np.ndarray:
    """For each ``j``: ``#{k : B(x_k, M r_k) meets B(x_j, M r_j)}`` (open balls)."""
    centers = np.asarray(centers, dtype=float)
    if centers.ndim == 1:
        left = centers - M * radii
        right = centers + M * radii
        sl = np.sort(left)
        sr = np.sort(right)
        # k overlaps j iff left_k < right_j and right_k > left_j
        return np.searchsorted(sl, right, side="left") - np.searchsorted(sr, left, side="right")
    from scipy.spatial import cKDTree

    tree = cKDTree(centers)
    rmax = float(radii.max())
    out = np.empty(len(radii), dtype=int)
    for j, (c, r) in enumerate(zip(centers, radii)):
        cand = tree.query_ball_point(c, M * (r + rmax))
        d = np.linalg.norm(centers[cand] - c, axis=-1)
        out[j] = int(np.sum(d < M * (r + radii[cand])))
    return out


def overlap_counts_bruteforce(centers, radii, M) -> np.ndarray:
    centers = np.asarray(centers, dtype=float)
    c = centers if centers.ndim > 1 else centers[:, None]
    d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=-1)
    return np.sum(d < M * (radii[:, None] + radii[None, :]), axis=1)


def ratio_sup(window, M: float, step: float, n: int = 1, samples: int = 41) -> float:
    """``sup rho(x)/rho(y)`` (and its inverse) over sampled ``x in B(y, M rho(y))``."""
    if n != 1:
        raise NotImplementedError("ratio sweep implemented in one dimension")
    y = np.arange(window[0], window[1] + 0.5 * step, step)
    u = np.linspace(-1.0, 1.0, samples)[1:-1]
    ry = critical_radius(y)
    x = y[:, None] + M * ry[:, None] * u[None, :]
    r = critical_radius(x) / ry[:, None]
    return float(max(r.max(), (1.0 / r).max()))


def covering(window, M: float) -> CoveringFamily:
    """Critical-radius covering of ``window``: an interval ``(a, b)`` or a box ``[(a1, b1), ...]``."""
    if not M > 0:
        raise ValueError("M must be positive")
    if np.ndim(window[0]) == 0:
        a, b = float(window[0]), float(window[1])
        if not b > a:
            raise ValueError("empty window")
        centers, radii = _greedy_1d(a, b)
        n = 1
        ratio = ratio_sup((a, b), M, 1e-2)
    else:
        centers, radii = _lattice_nd(window)
        n = len(window)
        ratio = float("nan")
    mult = int(overlap_counts(centers, radii, M).max())
    return CoveringFamily(centers, radii, tuple(map(tuple, np.atleast_2d(window))) if n > 1 else (a, b), M, mult,
                          ratio, {"n": n, "construction": "greedy" if n == 1 else "lattice refinement"})


def covers(family: CoveringFamily, points) -> np.ndarray:
    """Which ``points`` lie in some ``B(x_k, rho(x_k))``."""
    p = np.asarray(points, dtype=float)
    if family.centers.ndim == 1:
        left = family.centers - family.radii
        right = family.centers + family.radii
        # intervals come sorted from the greedy sweep
        k = np.searchsorted(left, p, side="left") - 1
        ok = k >= 0
        kk = np.clip(k, 0, len(left) - 1)
        hit = ok & (p > left[kk]) & (p < right[kk])
        prev = np.clip(kk - 1, 0, len(left) - 1)
        hit |= ok & (k >= 1) & (p > left[prev]) & (p < right[prev])
        return hit
    from scipy.spatial import cKDTree

    tree = cKDTree(family.centers)
    rmax = float(family.radii.max())
    out = np.zeros(len(p), dtype=bool)
    for i, q in enumerate(p):
        cand = tree.query_ball_point(q, rmax)
        out[i] = bool(np.any(np.linalg.norm(family.centers[cand] - q, axis=-1) < family.radii[cand]))
    return out


# ---------------------------------------------------------------------------
# local / global splitting


@dataclass(frozen=True)
class LocalGlobal:
    x: float
    radius: float
    times: np.ndarray
    local: np.ndarray  # shape (T, M)
    glob: np.ndarray
    local_norm: float
    global_norm: float


def local_global_split(sg: SemigroupId, f: SampledField, spec: GFunctionSpec, x: float) -> LocalGlobal:
    """``t d_t T_t`` applied to ``f`` restricted to ``B(x, rho(x))`` and to its complement, at ``x``."""
    if spec.ord.alpha != 1:
        raise ValueError("the local/global decomposition is stated for the first derivative")
    if f.ndim != 1:
        raise NotImplementedError("local/global split implemented in one dimension")
    rho = critical_radius(x)
    ys = f.axes[0]
    w = f.weights[0]
    inside = np.abs(ys - x) < rho
    rule = spec.time_rule()
    T = rule.nodes
    dk = kernel_time_derivative(sg, 1, T[:, None], x, ys[None, :]) * T[:, None]
    wf = f.values * w[:, None]
    loc = dk @ (wf * inside[:, None])
    glob = dk @ (wf * ~inside[:, None])

    def qnorm(prof):
        return float(rule.integrate(spec.norm(prof) ** spec.q)) ** (1.0 / spec.q)

    return LocalGlobal(float(x), rho, T, loc, glob, qnorm(loc), qnorm(glob))
