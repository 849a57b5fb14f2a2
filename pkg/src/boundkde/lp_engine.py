"""Quadrant quadrature, L_p norms and the empirical stochastic majorant.

The cube is split into the ``2^d`` half-open quadrants
``Delta_eps = prod_i (eps_i/2, (1+eps_i)/2)``. Along each axis both halves
carry a composite Gauss-Legendre rule; the full-cube grid is the tensor
product of the two halves, so every quadrant grid is a sub-block of it.
"""

from dataclasses import dataclass
from functools import cached_property
import itertools
import math

import numpy as np

from .boundary_kernels import estimate_tensor
from .errors import GridMismatch
from .families import bandwidth_of, family_member, meet
from .legendre_kernels import kernel_lp_norm

__all__ = [
    "QuadratureConfig",
    "QuadrantGrid",
    "CubeGrid",
    "composite_gauss",
    "lp_norm",
    "rosenthal_constant",
    "product_norm",
    "lambda_hat",
    "gamma_hat",
    "m_hat",
    "m_hat_pair",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Panels and Gauss nodes per panel, per axis and per half of [0, 1]."""

    panels: int
    nodes: int

    @classmethod
    def default(cls, d):
        if d == 1:
            return cls(32, 8)
        if d == 2:
            return cls(16, 4)
        return cls(4, 4)


def composite_gauss(a, b, panels, nodes):
    """Composite Gauss-Legendre rule on [a, b]; nodes ascending."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


@dataclass(frozen=True, eq=False)
class QuadrantGrid:
    """Tensor Gauss grid on one quadrant ``Delta_eps``."""

    eps: tuple
    axes: tuple
    axis_weights: tuple

    @property
    def d(self):
        return len(self.eps)

    @cached_property
    def nodes(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def weights(self):
        w = self.axis_weights[0]
        for wi in self.axis_weights[1:]:
            w = np.multiply.outer(w, wi)
        return np.ravel(w)


class CubeGrid:
    """Full-cube grid: union of the ``2^d`` quadrant grids.

    Values on the grid are flat arrays in C order over ``axes`` (the
    ``d`` one-dimensional node vectors covering [0, 1]).
    """

    def __init__(self, d, quad=None):
        self.d = int(d)
        self.quad = quad or QuadratureConfig.default(self.d)
        lo_x, lo_w = composite_gauss(0.0, 0.5, self.quad.panels, self.quad.nodes)
        hi_x, hi_w = composite_gauss(0.5, 1.0, self.quad.panels, self.quad.nodes)
        self.half_nodes = (lo_x, hi_x)
        self.half_weights = (lo_w, hi_w)
        axis = np.concatenate([lo_x, hi_x])
        axis_w = np.concatenate([lo_w, hi_w])
        self.axes = (axis,) * self.d
        self.axis_weights = (axis_w,) * self.d
        self.shape = (axis.size,) * self.d
        w = axis_w
        for _ in range(self.d - 1):
            w = np.multiply.outer(w, axis_w)
        self.weights = np.ravel(w)
        self.size = self.weights.size
        eps_of_axis = (axis > 0.5).astype(int)
        self._eps_axis = eps_of_axis

    @property
    def quadrants(self):
        return list(itertools.product((0, 1), repeat=self.d))

    @cached_property
    def points(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def quadrant(self, eps):
        eps = tuple(int(e) for e in eps)
        return QuadrantGrid(
            eps=eps,
            axes=tuple(self.half_nodes[e] for e in eps),
            axis_weights=tuple(self.half_weights[e] for e in eps),
        )

    def quadrant_mask(self, eps):
        mask = self._eps_axis == eps[0]
        for e in eps[1:]:
            mask = np.multiply.outer(mask, self._eps_axis == e)
        return np.ravel(mask)

    def evaluate(self, func):
        """Apply a vectorized ``func((N, d) points) -> (N,)`` on the grid."""
        return np.asarray(func(self.points), dtype=float)

    def estimate(self, spec, sample, squared=False):
        return np.ravel(estimate_tensor(spec, sample, self.axes, squared=squared))


def _integrate_power(values, weights, p):
    return float(np.dot(weights, np.abs(values) ** p))


def lp_norm(values, grid, p, eps=None):
    """``(sum_k w_k |v_k|^p)^(1/p)`` over the cube, or over quadrant ``eps``."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size != grid.size:
        raise GridMismatch(f"{values.size} values for a grid of {grid.size} nodes")
    if p < 1:
        raise ValueError("p must be >= 1")
    weights = grid.weights
    if eps is not None:
        mask = grid.quadrant_mask(eps)
        values, weights = values[mask], weights[mask]
    return _integrate_power(values, weights, p) ** (1.0 / p)


def rosenthal_constant(p):
    """``C_p* = 14.7 p / log p``."""
    return 14.7 * p / math.log(p)


def product_norm(spec, p):
    """L_p norm of the tensor product kernel: product of univariate norms."""
    return math.prod(kernel_lp_norm(k, p) for k in spec.kernels)


def lambda_hat(spec, sample, p, eps, grid, second_moment=None):
    """Empirical ``sqrt(V_h) (int_{Delta_eps} (mean_j K^2(t, X_j))^{p/2} dt)^{1/p}``.

    Defined for ``p > 2`` only. ``second_moment`` may pass the precomputed
    full-grid values of ``mean_j K^2``.
    """
    if not p > 2:
        raise ValueError("lambda_hat is defined for p > 2 only")
    if second_moment is None:
        second_moment = grid.estimate(spec, sample, squared=True)
    second_moment = np.asarray(second_moment).ravel()
    if second_moment.size != grid.size:
        raise GridMismatch(f"{second_moment.size} values for a grid of {grid.size} nodes")
    mask = grid.quadrant_mask(eps)
    integral = float(np.dot(grid.weights[mask], second_moment[mask] ** (p / 2.0)))
    return math.sqrt(spec.volume) * integral ** (1.0 / p)


def gamma_hat(spec, sample, p, eps, grid, second_moment=None):
    """Per-quadrant stochastic-error constant.

    ``1 <= p <= 2``: ``2^{-d(2-p)/(2p)} ||W||_2``, independent of the data.
    ``p > 2``: ``C_p* (lambda_hat + 2 ||W||_p)``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if p <= 2:
        return 2.0 ** (-spec.d * (2.0 - p) / (2.0 * p)) * product_norm(spec, 2.0)
    lam = lambda_hat(spec, sample, p, eps, grid, second_moment)
    return rosenthal_constant(p) * (lam + 2.0 * product_norm(spec, p))


def m_hat(cfg, idx, sample, p, grid, members=None, spec=None):
    """``(n V_h)^{-1/2} sum_eps Gamma_eps(W(ell), h(ell), p)``."""
    if spec is None:
        spec = family_member(cfg, idx, members)
    second = grid.estimate(spec, sample, squared=True) if p > 2 else None
    total = sum(gamma_hat(spec, sample, p, eps, grid, second) for eps in grid.quadrants)
    volume = math.prod(bandwidth_of(cfg, idx))
    return total / math.sqrt(sample.n * volume)


def m_hat_pair(cfg, idx, idx_other, sample, p, grid, members=None):
    """``M(ell') + M(ell ^ ell')``."""
    low = meet(idx, idx_other)
    return m_hat(cfg, idx_other, sample, p, grid, members) + m_hat(cfg, low, sample, p, grid, members)
