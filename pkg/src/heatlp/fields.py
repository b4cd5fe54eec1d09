"""Sampled B-valued functions on rectangular grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .orthobasis import QuadratureRule, gauss_hermite, half_line_rule


@dataclass(frozen=True)
class SampledField:
    """Values of a function ``R^n -> R^M`` (or ``(0,inf) -> R^M``) on a tensor grid.

    ``values`` has shape ``grid_shape + (M,)``; scalar fields use ``M = 1``.
    ``weights`` holds one quadrature weight vector per axis so that integrals
    over the grid are tensor sums. ``periodic`` marks a Fourier box, where the
    axis is a uniform grid with period ``N * h``.
    """

    axes: tuple
    values: np.ndarray
    weights: tuple
    periodic: bool = False
    domain: str = "line"  # "line" or "half-line"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        weights = tuple(np.asarray(w, dtype=float) for w in self.weights)
        vals = np.asarray(self.values, dtype=float)
        shape = tuple(len(a) for a in axes)
        if vals.shape == shape:
            vals = vals[..., None]
        if vals.shape[:-1] != shape:
            raise ValueError(f"values of shape {vals.shape} do not match grid {shape}")
        if len(weights) != len(axes) or any(len(w) != len(a) for w, a in zip(weights, axes)):
            raise ValueError("need one weight vector per axis")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "values", vals)

    # -- constructors ------------------------------------------------------

    @classmethod
    def on_grid(cls, grid: "SampledField", values, **kw) -> "SampledField":
        return cls(grid.axes, values, grid.weights, grid.periodic, grid.domain, {**grid.meta, **kw})

    @classmethod
    def fourier_box(cls, half_width: float, n_modes: int, ndim: int = 1, func: Callable | None = None):
        """Periodic box ``[-L, L)^n`` with ``n_modes`` points per axis."""
        h = 2.0 * half_width / n_modes
        x = -half_width + h * np.arange(n_modes)
        w = np.full(n_modes, h)
        return cls._build([x] * ndim, [w] * ndim, func, periodic=True)

    @classmethod
    def uniform(cls, a: float, b: float, npts: int, ndim: int = 1, func: Callable | None = None):
        """Closed uniform grid with trapezoid weights."""
        x = np.linspace(a, b, npts)
        w = np.full(npts, x[1] - x[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        return cls._build([x] * ndim, [w] * ndim, func)

    @classmethod
    def hermite_grid(cls, order: int = 120, ndim: int = 1, func: Callable | None = None):
        rule = gauss_hermite(order)
        return cls._build([rule.nodes] * ndim, [rule.weights] * ndim, func)

    @classmethod
    def half_line(cls, rule: QuadratureRule | None = None, func: Callable | None = None):
        rule = rule or half_line_rule(u_max=2.5)
        return cls._build([rule.nodes], [rule.weights], func, domain="half-line")

    @classmethod
    def from_rule(cls, rule: QuadratureRule, func: Callable | None = None, domain: str = "line"):
        return cls._build([rule.nodes], [rule.weights], func, domain=domain)

    @classmethod
    def _build(cls, axes, weights, func, periodic=False, domain="line"):
        shape = tuple(len(a) for a in axes)
        if func is None:
            vals = np.zeros(shape)
        else:
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
            vals = func(pts[..., 0]) if len(axes) == 1 else func(pts)
        return cls(tuple(axes), vals, tuple(weights), periodic, domain)

    # -- accessors ---------------------------------------------------------

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def ncomp(self) -> int:
        return self.values.shape[-1]

    @property
    def grid_shape(self) -> tuple:
        return self.values.shape[:-1]

    def points(self) -> np.ndarray:
        """Grid points, shape ``grid_shape + (n,)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def cell_weights(self) -> np.ndarray:
        w = self.weights[0]
        for extra in self.weights[1:]:
            w = np.multiply.outer(w, extra)
        return w

    def scalar(self) -> np.ndarray:
        if self.ncomp != 1:
            raise ValueError("field is vector valued")
        return self.values[..., 0]

    def component(self, j: int) -> "SampledField":
        return self.with_values(self.values[..., j : j + 1])

    def with_values(self, values) -> "SampledField":
        return SampledField(self.axes, values, self.weights, self.periodic, self.domain, dict(self.meta))

    # -- integrals ---------------------------------------------------------

    def integrate(self, vals=None) -> np.ndarray:
        """Integral of each component (or of ``vals`` on this grid)."""
        v = self.values if vals is None else np.asarray(vals)
        w = self.cell_weights()
        axes = list(range(w.ndim))
        return np.tensordot(w, v, axes=(axes, axes))

    def inner(self, other: "SampledField") -> float:
        """``int <f(x), g(x)> dx`` with the Euclidean pairing of components."""
        return float(self.integrate(np.sum(self.values * other.values, axis=-1)))

    def pointwise_norm(self, norm: Callable | None = None) -> np.ndarray:
        """``||f(x)||_B`` at every grid point (Euclidean by default)."""
        if norm is None:
            return np.sqrt(np.sum(self.values**2, axis=-1))
        return norm(self.values)

    def lp_norm(self, p: float = 2.0, norm: Callable | None = None) -> float:
        a = self.pointwise_norm(norm)
        if np.isinf(p):
            return float(a.max())
        return float(self.integrate(a**p)) ** (1.0 / p)


def scalar_lp_norm(grid: SampledField, values: np.ndarray, p: float) -> float:
    """L^p norm of a nonnegative array sampled on ``grid``."""
    return float(grid.integrate(np.abs(values) ** p)) ** (1.0 / p)


def stack_components(fields: Sequence[SampledField]) -> SampledField:
    base = fields[0]
    return base.with_values(np.concatenate([f.values for f in fields], axis=-1))
