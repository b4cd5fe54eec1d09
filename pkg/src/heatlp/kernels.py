"""Heat and Poisson kernels for the classical, Hermite and Laguerre semigroups.

Points are arrays whose trailing axis has length ``n`` when ``n > 1``; in
one dimension plain scalars or arrays of scalars are accepted.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, TruncationError
from .orthobasis import (
    BesselOrder,
    _panel_rule,
    half_line_rule,
    hermite_functions,
    laguerre_functions,
    log_bessel_i_scaled,
)

KINDS = ("classical", "hermite", "laguerre")


@dataclass(frozen=True)
class SemigroupId:
    """Which heat semigroup: ``classical(n)``, ``hermite(n)`` or ``laguerre(beta)``."""

    kind: str
    n: int = 1
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown semigroup kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind == "laguerre":
            if self.beta is None:
                raise ValueError("laguerre semigroup needs beta")
            BesselOrder(self.beta)
            if self.n != 1:
                raise ValueError("laguerre semigroup lives on (0, inf), n = 1")

    @classmethod
    def classical(cls, n: int = 1):
        return cls("classical", n)

    @classmethod
    def hermite(cls, n: int = 1):
        return cls("hermite", n)

    @classmethod
    def laguerre(cls, beta: float):
        return cls("laguerre", 1, float(beta))

    @property
    def label(self) -> str:
        return f"laguerre({self.beta:g})" if self.kind == "laguerre" else f"{self.kind}({self.n})"

    @property
    def contractive(self) -> bool | None:
        """Laguerre heat semigroups are L^p contractions iff beta is -1/2 or >= 1/2."""
        if self.kind != "laguerre":
            return True
        return self.beta == -0.5 or self.beta >= 0.5

    def fixed_point_projection(self, f):
        """Projection onto ``{f : T_t f = f}``; zero for all three semigroups."""
        return f.with_values(np.zeros_like(f.values))


# ---------------------------------------------------------------------------
# helpers


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("time must be > 0")
    return t


def _sq(n: int, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if n == 1:
        return v * v
    if v.shape[-1] != n:
        raise ValueError(f"points must have trailing axis of length {n}")
    return np.sum(v * v, axis=-1)


def _diffs(n, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return _sq(n, x - y), _sq(n, x + y)


# ---------------------------------------------------------------------------
# closed-form kernels


def classical_log_kernel(n: int, t, r2):
    return -0.5 * n * np.log(4.0 * math.pi * t) - r2 / (4.0 * t)


def hermite_log_kernel(n: int, t, dm2, dp2):
    """Log of the Mehler kernel written with ``e^{-2t}`` only.

    ``(e^{-2t}/(1-e^{-4t}))^{n/2} pi^{-n/2} exp(-(|x-y|^2 coth t + |x+y|^2 tanh t)/4)``
    """
    e2 = np.exp(-2.0 * t)
    one_m = -np.expm1(-2.0 * t)  # 1 - e^{-2t}
    coth = (1.0 + e2) / one_m
    tanh = one_m / (1.0 + e2)
    pref = 0.5 * n * (-2.0 * t - np.log(-np.expm1(-4.0 * t)) - math.log(math.pi))
    return pref - 0.25 * (dm2 * coth + dp2 * tanh)


def laguerre_log_kernel(beta: float, t, x, y):
    e1 = np.exp(-t)
    one_m = -np.expm1(-2.0 * t)
    a = 2.0 * e1 / one_m
    z = a * x * y
    return (
        np.log(a)
        + 0.5 * np.log(x * y)
        + z
        + log_bessel_i_scaled(beta, z)
        - 0.5 * (x * x + y * y) * (1.0 + e1 * e1) / one_m
    )


def heat_kernel(sg: SemigroupId, t, x, y):
    """Heat kernel ``K_t(x, y)`` of the selected semigroup."""
    t = _check_t(t)
    if sg.kind == "classical":
        r2, _ = _diffs(sg.n, x, y)
        out = np.exp(classical_log_kernel(sg.n, t, r2))
    elif sg.kind == "hermite":
        dm2, dp2 = _diffs(sg.n, x, y)
        out = np.exp(hermite_log_kernel(sg.n, t, dm2, dp2))
    else:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(~(x > 0)) or np.any(~(y > 0)):
            raise ValueError("laguerre kernel needs x, y > 0")
        t, x, y = np.broadcast_arrays(t, x, y)
        out = np.exp(laguerre_log_kernel(sg.beta, t, x, y))
    return float(out) if np.ndim(out) == 0 else out


def poisson_kernel_classical(n: int, t, z):
    """``Gamma((n+1)/2) pi^{-(n+1)/2} t / (t^2 + |z|^2)^{(n+1)/2}``."""
    t = _check_t(t)
    r2 = _sq(n, z)
    c = math.exp(gammaln(0.5 * (n + 1)) - 0.5 * (n + 1) * math.log(math.pi))
    out = c * t / (t * t + r2) ** (0.5 * (n + 1))
    return float(out) if np.ndim(out) == 0 else out


def hermite_markov_closed_form(n: int, t, x):
    """The displayed closed form for ``W_t(1)(x)``, including its ``(2 pi)^{-n/2}``."""
    t = _check_t(t)
    return (2.0 * math.pi * np.cosh(2.0 * t)) ** (-0.5 * n) * np.exp(-0.5 * np.tanh(2.0 * t) * _sq(n, x))


def hermite_markov_exact(n: int, t, x):
    """``W_t(1)(x)`` obtained by integrating the Mehler kernel in closed form."""
    t = _check_t(t)
    return np.cosh(2.0 * t) ** (-0.5 * n) * np.exp(-0.5 * np.tanh(2.0 * t) * _sq(n, x))


# ---------------------------------------------------------------------------
# Markov defect by quadrature


def _line_rule(center: float, halfwidth: float, panels: int = 120, order: int = 20):
    return _panel_rule(np.linspace(center - halfwidth, center + halfwidth, panels + 1), order)


def markov_defect(sg: SemigroupId, t: float, x, tol: float = 1e-13):
    """``T_t(1)(x)`` by quadrature of the kernel over the spatial domain.

    Classical and Hermite kernels are tensor products, so the n-dimensional
    integral is the product of one-dimensional ones.
    """
    t = float(_check_t(t))
    if sg.kind == "laguerre":
        x = float(x)
        if not x > 0:
            raise ValueError("laguerre needs x > 0")
        rule = half_line_rule(u_max=math.log(x + 12.0 + 6.0 * math.sqrt(t)), fine=0.02)
        vals = heat_kernel(sg, t, x, rule.nodes)
        tail = vals[-1] * rule.nodes[-1]
        if tail > tol:
            raise TruncationError("half-line rule too short for the kernel tail", tail)
        return float(np.dot(rule.weights, vals))
    xs = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if len(xs) != sg.n:
        raise ValueError(f"point must have {sg.n} coordinates")
    one_d = SemigroupId(sg.kind, 1)
    total = 1.0
    spread = math.sqrt(2.0 * t) if sg.kind == "classical" else 1.0
    for xi in xs:
        width = 40.0 * max(spread, 0.25)
        nodes, w = _line_rule(xi, width)
        vals = heat_kernel(one_d, t, xi, nodes)
        tail = max(vals[0], vals[-1]) * width
        if tail > tol:
            raise TruncationError("spatial window too short for the kernel tail", tail)
        total *= float(np.dot(w, vals))
    return total


# ---------------------------------------------------------------------------
# time derivatives


def _bell(d: Sequence[np.ndarray], k: int):
    """Complete Bell polynomial ``B_k(d_1, ..., d_k)``, so that ``(e^L)^{(k)} = e^L B_k(L', ..., L^{(k)})``."""
    b = [np.ones_like(d[0])]
    for j in range(k):
        acc = np.zeros_like(d[0])
        for i in range(j + 1):
            acc = acc + math.comb(j, i) * b[j - i] * d[i]
        b.append(acc)
    return b[k]


def _classical_log_derivs(n, t, r2, k):
    out = []
    for j in range(1, k + 1):
        dj = -0.5 * n * (-1) ** (j - 1) * math.factorial(j - 1) / t**j
        dj = dj - 0.25 * r2 * (-1) ** j * math.factorial(j) / t ** (j + 1)
        out.append(dj)
    return out


def _hermite_log_derivs(n, t, dm2, dp2, k):
    if k > 2:
        raise NotImplementedError
    # written in e^{-2t} so large times do not overflow
    q = np.exp(-2.0 * np.asarray(t, dtype=float))
    csch2 = 4.0 * q / (1.0 - q) ** 2
    sech2 = 4.0 * q / (1.0 + q) ** 2
    coth = (1.0 + q) / (1.0 - q)
    tanh = (1.0 - q) / (1.0 + q)
    d1 = -n * (1.0 + q * q) / (1.0 - q * q) + 0.25 * (dm2 * csch2 - dp2 * sech2)
    out = [d1]
    if k >= 2:
        d2 = 2.0 * n * 4.0 * q * q / (1.0 - q * q) ** 2 + 0.25 * (
            -2.0 * dm2 * csch2 * coth + 2.0 * dp2 * sech2 * tanh
        )
        out.append(d2)
    return out


def richardson_derivative(fn: Callable, t, k: int, rel_step: float = 0.05, levels: int = 4):
    """``k``-th derivative (``k <= 2``) by central differences with Richardson extrapolation."""
    t = np.asarray(t, dtype=float)
    if k == 0:
        return fn(t)
    if k > 2:
        raise ValueError("finite-difference derivatives implemented for k <= 2")
    h0 = rel_step * t
    table = []
    for lev in range(levels):
        h = h0 / 2**lev
        if k == 1:
            d = (fn(t + h) - fn(t - h)) / (2.0 * h)
        else:
            d = (fn(t + h) - 2.0 * fn(t) + fn(t - h)) / (h * h)
        row = [d]
        for j in range(1, lev + 1):
            fac = 4.0**j
            row.append((fac * row[j - 1] - table[lev - 1][j - 1]) / (fac - 1.0))
        table.append(row)
    return table[-1][-1]


def _log_time_derivative(sg: SemigroupId, k: int, t, x, y):
    """``(log|d_t^k K|, sign)``; stays finite where the kernel itself underflows."""
    t = _check_t(t)
    if k < 0:
        raise ValueError("derivative order must be >= 0")
    if sg.kind == "classical":
        r2, _ = _diffs(sg.n, x, y)
        t, r2 = np.broadcast_arrays(t, r2)
        logk = classical_log_kernel(sg.n, t, r2)
        b = _bell(_classical_log_derivs(sg.n, t, r2, k), k) if k else np.ones_like(logk)
    elif sg.kind == "hermite" and k <= 2:
        dm2, dp2 = _diffs(sg.n, x, y)
        t, dm2, dp2 = np.broadcast_arrays(t, dm2, dp2)
        logk = hermite_log_kernel(sg.n, t, dm2, dp2)
        b = _bell(_hermite_log_derivs(sg.n, t, dm2, dp2, k), k) if k else np.ones_like(logk)
    else:
        # differentiate K / K_t(x,y) so the difference quotient is O(1)
        logk = np.log(heat_kernel(sg, t, x, y))

        def ratio(s):
            return np.exp(np.log(heat_kernel(sg, s, x, y)) - logk)

        b = richardson_derivative(ratio, t, k) if k else np.ones_like(logk)
    with np.errstate(divide="ignore"):
        return logk + np.log(np.abs(b)), np.sign(b)


def kernel_time_derivative(sg: SemigroupId, k: int, t, x, y):
    """``d^k/dt^k K_t(x, y)``.

    Closed form for the classical kernel (any k) and the Mehler kernel
    (``k <= 2``); Richardson-extrapolated central differences otherwise.
    """
    logabs, sign = _log_time_derivative(sg, k, t, x, y)
    out = sign * np.exp(logabs)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# spectral series


def hermite_series_kernel(n: int, t, x, y, K: int = 60, convention: str = "2k+n"):
    """``sum_{|k| <= K} e^{-lambda_k t} h_k(x) h_k(y)``.

    ``convention`` selects ``lambda_k = 2|k| + n`` (``"2k+n"``) or
    ``lambda_k = 2(|k| + n)`` (``"2(k+n)"``).
    """
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if n == 1:
        x = x[..., None]
        y = y[..., None]
    x, y = np.broadcast_arrays(x, y)
    # per-degree sums over |k| = j via truncated polynomial products
    acc = None
    for i in range(n):
        a = hermite_functions(K, x[..., i]) * hermite_functions(K, y[..., i])
        if acc is None:
            acc = a
        else:
            new = np.zeros_like(acc)
            for j in range(K + 1):
                new[j] = np.sum(acc[: j + 1] * a[j::-1], axis=0)
            acc = new
    j = np.arange(K + 1).reshape((-1,) + (1,) * (acc.ndim - 1))
    if convention == "2k+n":
        lam = 2.0 * j + n
    elif convention == "2(k+n)":
        lam = 2.0 * (j + n)
    else:
        raise ValueError(f"unknown eigenvalue convention {convention!r}")
    out = np.sum(np.exp(-lam * t) * acc, axis=0)
    return float(out) if np.ndim(out) == 0 else out


def laguerre_series_kernel(beta: float, t, x, y, K: int = 60):
    """``sum_{k <= K} e^{-(2k+beta+1) t} phi_k(x) phi_k(y)``."""
    t = _check_t(t)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    a = laguerre_functions(K, beta, x) * laguerre_functions(K, beta, y)
    lam = 2.0 * np.arange(K + 1) + beta + 1.0
    lam = lam.reshape((-1,) + (1,) * x.ndim)
    out = np.sum(np.exp(-lam * t) * a, axis=0)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# bound certificates


@dataclass(frozen=True)
class BoundCertificate:
    """``C = sup |d_t^k K_t(x,y)| t^{n/2+k} e^{c|x-y|^2/t}`` over a sampled grid."""

    semigroup: str
    k: int
    c: float
    C: float
    grid: dict
    argmax: dict
    samples: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KernelGrid:
    space: tuple  # (lo, hi, points) for x and y
    times: tuple  # (t_min, t_max, points), log spaced

    @classmethod
    def standard(cls, sg: SemigroupId):
        lo = 0.05 if sg.kind == "laguerre" else -3.0
        return cls((lo, 3.0, 25), (0.01, 2.0, 40))

    def arrays(self):
        xs = np.linspace(*self.space[:2], int(self.space[2]))
        ts = np.geomspace(*self.times[:2], int(self.times[2]))
        return xs, ts


def certify_bound(sg: SemigroupId, k: int, c: float, grid: KernelGrid | None = None) -> BoundCertificate:
    """Fit the constant of a Gaussian kernel bound with fixed decay rate ``c``.

    Works on the diagonal-in-dimension slice ``x = (s, ..., s)`` when ``n > 1``.
    """
    if not c > 0:
        raise ValueError("decay rate must be positive")
    grid = grid or KernelGrid.standard(sg)
    xs, ts = grid.arrays()
    if len(xs) == 0 or len(ts) == 0:
        raise ValueError("empty grid")
    T, X, Y = np.meshgrid(ts, xs, xs, indexing="ij")
    if sg.n > 1:
        Xp = np.repeat(X[..., None], sg.n, axis=-1)
        Yp = np.repeat(Y[..., None], sg.n, axis=-1)
    else:
        Xp, Yp = X, Y
    logabs, _ = _log_time_derivative(sg, k, T, Xp, Yp)
    dist2 = sg.n * (X - Y) ** 2
    logratio = logabs + (0.5 * sg.n + k) * np.log(T) + c * dist2 / T
    # -inf means an exact zero of the derivative, which bounds nothing
    if np.any(np.isnan(logratio)) or np.any(logratio == np.inf):
        raise ConvergenceError("non-finite kernel ratio on the certification grid")
    i = np.unravel_index(np.argmax(logratio), logratio.shape)
    C = float(np.exp(logratio[i]))
    return BoundCertificate(
        semigroup=sg.label,
        k=k,
        c=c,
        C=C,
        grid={"space": list(grid.space), "times": list(grid.times), "log_times": True},
        argmax={"t": float(T[i]), "x": float(X[i]), "y": float(Y[i])},
        samples=int(T.size),
    )
