"""Finite-dimensional Banach-space geometry: moduli of convexity and
smoothness, dyadic martingales and their square functions, and empirical
Lusin type/cotype ratios for semigroup g-functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import ConvergenceError
from .fields import SampledField
from .kernels import SemigroupId
from .lpfun import GFunctionSpec, g_function_field
from .orthobasis import hermite_functions, laguerre_functions
from .spectral import SpectralBasis


@dataclass(frozen=True)
class NormedSpace:
    """``R^M`` with a norm acting on the last axis of an array."""

    dim: int
    oracle: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"

    @classmethod
    def lr(cls, r: float, dim: int) -> "NormedSpace":
        r = float(r)
        if not r >= 1:
            raise ValueError("l^r needs r >= 1")
        if math.isinf(r):
            return cls(dim, lambda v: np.max(np.abs(v), axis=-1), f"l^inf_{dim}")
        if r == 2.0:
            return cls(dim, lambda v: np.sqrt(np.sum(v * v, axis=-1)), f"l^2_{dim}")
        return cls(dim, lambda v: np.sum(np.abs(v) ** r, axis=-1) ** (1.0 / r), f"l^{r:g}_{dim}")

    def norm(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.dim:
            raise ValueError(f"vectors must have {self.dim} coordinates")
        return self.oracle(v)

    def normalize(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return v / self.norm(v)[..., None]

    def check_axioms(self, rng: np.random.Generator, trials: int = 1000, tol: float = 1e-12) -> dict:
        """Positivity, homogeneity and the triangle inequality on random samples."""
        a, b = rng.standard_normal((2, trials, self.dim))
        lam = rng.standard_normal(trials)
        na, nb, nab = self.norm(a), self.norm(b), self.norm(a + b)
        return {
            "positive": bool(np.all(na > 0) and float(self.norm(np.zeros(self.dim))) == 0.0),
            "homogeneous": bool(np.allclose(self.norm(lam[:, None] * a), np.abs(lam) * na, rtol=1e-12)),
            "triangle": bool(np.all(nab <= na + nb + tol * (na + nb))),
        }


# ---------------------------------------------------------------------------
# moduli


@dataclass(frozen=True)
class ModulusResult:
    value: float
    a: np.ndarray
    b: np.ndarray
    residual: float
    restarts: int


_SCREEN = {"xatol": 1e-4, "fatol": 1e-8, "maxiter": 200}
_POLISH = {"xatol": 1e-11, "fatol": 1e-15, "maxiter": 4000}


def _multistart(obj, nparams: int, restarts: int, rng: np.random.Generator, keep: int = 4):
    """Loose Nelder-Mead from every start, then tight runs from the ``keep`` best."""
    screened = [minimize(obj, rng.standard_normal(nparams), method="Nelder-Mead", options=_SCREEN)
                for _ in range(restarts)]
    screened.sort(key=lambda r: r.fun)
    polished = [minimize(obj, r.x, method="Nelder-Mead", options=_POLISH) for r in screened[:keep]]
    return min(polished + screened[:1], key=lambda r: r.fun)


def _pair_on_sphere(space: NormedSpace, params: np.ndarray, eps: float):
    """Unit ``a, b`` with ``||a - b|| = eps`` from unconstrained parameters.

    ``a = u/||u||``; ``b`` moves along the normalised great circle from ``a``
    towards ``-a`` through the direction ``w`` until the distance hits ``eps``.
    """
    M = space.dim
    u, w = params[:M], params[M:]
    a = space.normalize(u)
    w = w - a * (w @ a) / (a @ a)
    if not np.any(w):
        w = np.roll(a, 1) - a
    w = w / space.norm(w)

    def b_of(theta):
        return space.normalize(a * math.cos(theta) + w * math.sin(theta))

    theta = brentq(lambda th: float(space.norm(a - b_of(th))) - eps, 0.0, math.pi, xtol=1e-13)
    return a, b_of(theta)


def modulus_convexity(space: NormedSpace, eps: float, restarts: int = 64, seed: int = 0) -> ModulusResult:
    """``inf {1 - ||(a+b)/2|| : ||a|| = ||b|| = 1, ||a - b|| = eps}``.

    Multi-start Nelder-Mead over parameters mapped onto the constraint set;
    the distance constraint is met exactly by a root solve (retraction).
    """
    if not 0 < eps < 2:
        raise ValueError("eps must lie in (0, 2)")
    rng = np.random.default_rng(seed)

    def obj(p):
        if not np.all(np.isfinite(p)) or not np.any(p[: space.dim]):
            return 2.0
        a, b = _pair_on_sphere(space, p, eps)
        return 1.0 - float(space.norm(0.5 * (a + b)))

    best = _multistart(obj, 2 * space.dim, restarts, rng)
    a, b = _pair_on_sphere(space, best.x, eps)
    resid = max(abs(float(space.norm(a - b)) - eps), abs(float(space.norm(a)) - 1), abs(float(space.norm(b)) - 1))
    if resid > 1e-8:
        raise ConvergenceError(f"constraint residual {resid:.2e} at the reported minimiser")
    return ModulusResult(max(float(best.fun), 0.0), a, b, resid, restarts)


def modulus_smoothness(space: NormedSpace, t: float, restarts: int = 64, seed: int = 0) -> ModulusResult:
    """``sup {(||a + t b|| + ||a - t b||)/2 - 1 : ||a|| = ||b|| = 1}``."""
    if not t > 0:
        raise ValueError("t must be positive")
    rng = np.random.default_rng(seed)
    M = space.dim

    def pair(p):
        return space.normalize(p[:M]), space.normalize(p[M:])

    def obj(p):
        if not np.any(p[:M]) or not np.any(p[M:]):
            return 0.0
        a, b = pair(p)
        return -(0.5 * float(space.norm(a + t * b) + space.norm(a - t * b)) - 1.0)

    best = _multistart(obj, 2 * M, restarts, rng)
    a, b = pair(best.x)
    resid = max(abs(float(space.norm(a)) - 1), abs(float(space.norm(b)) - 1))
    if resid > 1e-8:
        raise ConvergenceError(f"constraint residual {resid:.2e} at the reported maximiser")
    return ModulusResult(max(-float(best.fun), 0.0), a, b, resid, restarts)


def random_search_convexity(space: NormedSpace, eps: float, samples: int = 1_000_000, seed: int = 1,
                            chunk: int = 100_000) -> float:
    """Brute-force ``delta(eps)``: random pairs, the distance constraint met by vectorised bisection."""
    rng = np.random.default_rng(seed)
    best = np.inf
    M = space.dim
    for start in range(0, samples, chunk):
        k = min(chunk, samples - start)
        a = space.normalize(rng.standard_normal((k, M)))
        w = rng.standard_normal((k, M))
        w = w - a * (np.sum(w * a, axis=1) / np.sum(a * a, axis=1))[:, None]
        w = space.normalize(w)
        lo = np.zeros(k)
        hi = np.full(k, math.pi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            b = space.normalize(a * np.cos(mid)[:, None] + w * np.sin(mid)[:, None])
            short = space.norm(a - b) < eps
            lo = np.where(short, mid, lo)
            hi = np.where(short, hi, mid)
        b = space.normalize(a * np.cos(lo)[:, None] + w * np.sin(lo)[:, None])
        best = min(best, float(np.min(1.0 - space.norm(0.5 * (a + b)))))
    return best


def random_search_smoothness(space: NormedSpace, t: float, samples: int = 1_000_000, seed: int = 1,
                             chunk: int = 200_000) -> float:
    rng = np.random.default_rng(seed)
    best = -np.inf
    for start in range(0, samples, chunk):
        k = min(chunk, samples - start)
        a = space.normalize(rng.standard_normal((k, space.dim)))
        b = space.normalize(rng.standard_normal((k, space.dim)))
        val = 0.5 * (space.norm(a + t * b) + space.norm(a - t * b)) - 1.0
        best = max(best, float(val.max()))
    return best


def lp_convexity_closed_form(p: float, eps: float) -> float:
    """``delta`` of ``l^p`` (p >= 2, any dimension >= 2): ``1 - (1 - (eps/2)^p)^{1/p}``."""
    return 1.0 - (1.0 - (eps / 2.0) ** p) ** (1.0 / p)


# ---------------------------------------------------------------------------
# martingales


@dataclass(frozen=True)
class FiniteMartingale:
    """Dyadic martingale on ``2^N`` equally likely atoms.

    ``values[n]`` holds ``M_n`` on every atom; it must be constant on the
    blocks of ``2^{N-n}`` consecutive atoms that form the ``n``-th partition.
    """

    values: np.ndarray  # (N + 1, 2^N, dim)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 2:
            v = v[..., None]
        N = v.shape[0] - 1
        if v.shape[1] != 2**N:
            raise ValueError("need 2^N atoms for depth N")
        object.__setattr__(self, "values", v)

    @property
    def depth(self) -> int:
        return self.values.shape[0] - 1

    def blocks(self, n: int) -> np.ndarray:
        N = self.depth
        return self.values[n].reshape(2**n, 2 ** (N - n), -1)

    def is_adapted(self, tol: float = 0.0) -> bool:
        for n in range(self.depth + 1):
            b = self.blocks(n)
            if np.max(np.abs(b - b[:, :1, :])) > tol:
                return False
        return True

    def martingale_defect(self) -> float:
        """``max |E[M_n | F_{n-1}] - M_{n-1}|`` over atoms and levels."""
        worst = 0.0
        N = self.depth
        for n in range(1, N + 1):
            cond = self.values[n].reshape(2 ** (n - 1), 2 ** (N - n + 1), -1).mean(axis=1)
            prev = self.blocks(n - 1)[:, 0, :]
            worst = max(worst, float(np.max(np.abs(cond - prev))))
        return worst

    @classmethod
    def random(cls, depth: int, dim: int, rng: np.random.Generator, scale: float = 1.0):
        N = depth
        vals = np.empty((N + 1, 2**N, dim))
        vals[0] = rng.standard_normal(dim) * scale
        for n in range(1, N + 1):
            parents = vals[n - 1].reshape(2 ** (n - 1), 2 ** (N - n + 1), dim)[:, 0, :]
            jumps = rng.standard_normal((2 ** (n - 1), dim)) * scale
            child = np.empty((2**n, dim))
            child[0::2] = parents + jumps
            child[1::2] = parents - jumps
            vals[n] = np.repeat(child, 2 ** (N - n), axis=0)
        return cls(vals)


def martingale_square_fn(mart: FiniteMartingale, q: float, space: NormedSpace | None = None,
                         tol: float = 1e-10) -> np.ndarray:
    """``S_q(M) = (||M_0||^q + sum_n ||M_n - M_{n-1}||^q)^{1/q}`` on every atom."""
    if not q > 1:
        raise ValueError("q must exceed 1")
    if not mart.is_adapted(tol):
        raise ValueError("values are not adapted to the dyadic filtration")
    scale = max(1.0, float(np.max(np.abs(mart.values))))
    if mart.martingale_defect() > tol * scale:
        raise ValueError("input is not a martingale")

    def norm(v):
        return np.sqrt(np.sum(v * v, axis=-1)) if space is None else space.norm(v)

    inc = np.diff(mart.values, axis=0)
    total = norm(mart.values[0]) ** q + np.sum(norm(inc) ** q, axis=0)
    return total ** (1.0 / q)


# ---------------------------------------------------------------------------
# Lusin type / cotype probe


@dataclass(frozen=True)
class RatioReport:
    cotype: np.ndarray
    type: np.ndarray
    p: float
    q: float
    trials: int

    def summary(self) -> dict:
        def stats(a):
            return {"min": float(np.min(a)), "median": float(np.median(a)), "max": float(np.max(a))}

        return {"r_cotype": stats(self.cotype), "r_type": stats(self.type), "p": self.p, "q": self.q,
                "trials": self.trials}


def random_band_limited_field(sg: SemigroupId, dim: int, rng: np.random.Generator, band=(1.0, 10.0),
                              grid: SampledField | None = None) -> SampledField:
    """Random ``R^dim``-valued field whose spectrum lies in ``band`` (in ``lambda``, classical: ``|xi|``).

    Classical fields live on a Fourier box whose mean mode is left empty.
    """
    if sg.kind == "classical":
        grid = grid or SampledField.fourier_box(8.0 * math.pi, 1024)
        x = grid.axes[0]
        L = 0.5 * len(x) * (x[1] - x[0])
        ks = np.arange(1, len(x) // 2)
        xi = math.pi * ks / L
        keep = (xi >= band[0]) & (xi <= band[1])
        xi = xi[keep]
        a, b = rng.standard_normal((2, len(xi), dim))
        vals = np.cos(np.outer(x, xi)) @ a + np.sin(np.outer(x, xi)) @ b
        return grid.with_values(vals)
    K = int((band[1] - 1) // 2) if sg.kind == "hermite" else int((band[1] - sg.beta - 1) // 2)
    coeffs = rng.standard_normal((K + 1, dim))
    if sg.kind == "hermite":
        grid = grid or SampledField.hermite_grid(121)
        phi = hermite_functions(K, grid.axes[0])
    else:
        grid = grid or SampledField.half_line()
        phi = laguerre_functions(K, sg.beta, grid.axes[0])
    return grid.with_values(phi.T @ coeffs)


def lusin_ratio_probe(sg: SemigroupId, space: NormedSpace, spec: GFunctionSpec, p: float, trials: int,
                      seed: int = 0, band=(1.0, 10.0)) -> RatioReport:
    """Empirical ``||g(f)||_p / ||f||_{L^p(B)}`` and its inverse over random band-limited fields."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    spec = GFunctionSpec(spec.ord, spec.q, space, spec.t_min, spec.t_max, spec.panels, spec.order, spec.tail_tol)
    basis = SpectralBasis(sg)
    cot = np.empty(trials)
    for i in range(trials):
        f = random_band_limited_field(sg, space.dim, rng, band)
        g = g_function_field(sg, f, spec, basis).field
        gn = g.lp_norm(p)
        fn = f.lp_norm(p, space.norm)
        cot[i] = gn / fn
    return RatioReport(cot, 1.0 / cot, p, spec.q, trials)
