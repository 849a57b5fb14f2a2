"""Flipped tensor-product boundary kernel and the resulting density estimator.

Along coordinate ``i`` the univariate kernel ``W_i`` (supported on [0, 1]) is
oriented towards the interior of the cube: for ``t_i <= 1/2`` it looks to the
right of ``t_i``, for ``t_i > 1/2`` to the left. The support of
``x -> K(t, x)`` therefore never leaves [0, 1]^d when every ``h_i < 1/2``.
"""

from dataclasses import dataclass
import string

import numpy as np

from .errors import DimensionMismatch, InvalidBandwidth, OutOfDomain
from .legendre_kernels import OrderedKernel, kernel_eval

__all__ = [
    "ProductKernelSpec",
    "SampleSet",
    "sigma",
    "boundary_kernel_eval",
    "estimate",
    "estimate_grid",
    "estimate_tensor",
    "clip_negative",
]


@dataclass(frozen=True)
class ProductKernelSpec:
    """``d`` univariate kernels and a bandwidth vector in (0, 1/2)^d."""

    kernels: tuple
    bandwidth: tuple

    def __post_init__(self):
        kernels = tuple(self.kernels)
        bandwidth = tuple(float(h) for h in np.atleast_1d(self.bandwidth))
        if len(kernels) != len(bandwidth):
            raise DimensionMismatch(
                f"{len(kernels)} kernels for a bandwidth of length {len(bandwidth)}"
            )
        if not kernels:
            raise DimensionMismatch("at least one coordinate is required")
        if not all(isinstance(k, OrderedKernel) for k in kernels):
            raise TypeError("kernels must be OrderedKernel instances")
        for h in bandwidth:
            if not 0.0 < h < 0.5:
                raise InvalidBandwidth(f"bandwidth {h!r} outside (0, 1/2)")
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "bandwidth", bandwidth)

    @property
    def d(self):
        return len(self.bandwidth)

    @property
    def volume(self):
        return float(np.prod(self.bandwidth))

    @property
    def orders(self):
        return tuple(k.order for k in self.kernels)


class SampleSet:
    """``n`` observations in the closed cube [0, 1]^d, stored as an (n, d) array."""

    __slots__ = ("points",)

    def __init__(self, points):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DimensionMismatch(f"expected an (n, d) array with n >= 1, got shape {pts.shape}")
        bad = ~((pts >= 0.0) & (pts <= 1.0))
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise OutOfDomain(int(row) + 1, int(col) + 1, float(pts[row, col]))
        pts.setflags(write=False)
        self.points = pts

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return self.points.shape == other.points.shape and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"SampleSet(n={self.n}, d={self.d})"


def sigma(t):
    """Orientation sign: +1 on (1/2, 1], -1 on [0, 1/2]."""
    t = np.asarray(t, dtype=float)
    out = np.where(t > 0.5, 1.0, -1.0)
    return float(out) if out.ndim == 0 else out


def _factor(kernel, h, t, x):
    """Matrix ``(1/h) W(sigma(t)(t - x)/h)`` with rows over ``t`` and columns over ``x``."""
    t = np.asarray(t, dtype=float)[:, None]
    x = np.asarray(x, dtype=float)[None, :]
    return kernel_eval(kernel, sigma(t) * (t - x) / h) / h


def _check_dim(spec, d):
    if spec.d != d:
        raise DimensionMismatch(f"kernel spec has d={spec.d}, data has d={d}")


def boundary_kernel_eval(spec, t, x):
    """``K_{W,h}(t, x) = prod_i (1/h_i) W_i(sigma(t_i)(t_i - x_i)/h_i)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _check_dim(spec, t.size)
    _check_dim(spec, x.size)
    val = 1.0
    for k, h, ti, xi in zip(spec.kernels, spec.bandwidth, t, x):
        val *= kernel_eval(k, sigma(ti) * (ti - xi) / h) / h
    return float(val)


def estimate(spec, sample, t):
    """Boundary kernel density estimate at a single point ``t``.

    The value can be negative for kernels of order ``m >= 1``; it is
    returned unclipped.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _check_dim(spec, sample.d)
    _check_dim(spec, t.size)
    prod = np.ones(sample.n)
    for i, (k, h) in enumerate(zip(spec.kernels, spec.bandwidth)):
        prod = prod * _factor(k, h, t[i : i + 1], sample.points[:, i])[0]
    return float(prod.sum() / sample.n)


def estimate_grid(spec, sample, grid, chunk=2048):
    """Evaluate the estimator at every row of ``grid`` (shape (G, d)).

    One univariate factor matrix is built per coordinate over the distinct
    grid values of that coordinate and reused for every grid point sharing
    the value.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None] if spec.d == 1 else grid[None, :]
    _check_dim(spec, sample.d)
    _check_dim(spec, grid.shape[1])
    factors, inverse = [], []
    for i, (k, h) in enumerate(zip(spec.kernels, spec.bandwidth)):
        uniq, inv = np.unique(grid[:, i], return_inverse=True)
        factors.append(_factor(k, h, uniq, sample.points[:, i]))
        inverse.append(inv)
    out = np.empty(grid.shape[0])
    for start in range(0, grid.shape[0], chunk):
        sl = slice(start, start + chunk)
        prod = factors[0][inverse[0][sl]]
        for f, inv in zip(factors[1:], inverse[1:]):
            prod = prod * f[inv[sl]]
        out[sl] = prod.sum(axis=1) / sample.n
    return out


def _window_sum(kernel, h, t, x_sorted, squared):
    """``sum_j (1/h) W(sigma(t)(t - x_j)/h)`` (or its square) over the kernel window only.

    The support of the summand in ``x`` is ``[t, t + h]`` for ``t <= 1/2`` and
    ``[t - h, t]`` otherwise, so only ``O(n h)`` terms per ``t`` are touched.
    """
    t = np.asarray(t, dtype=float)
    s = sigma(t)
    # slightly wider than the support; kernel_eval makes the exact cut as in the dense path
    reach = h * (1.0 + 1e-12)
    lo = np.searchsorted(x_sorted, np.where(s > 0, t - reach, t), side="left")
    hi = np.searchsorted(x_sorted, np.where(s > 0, t, t + reach), side="right")
    counts = hi - lo
    rows = np.repeat(np.arange(t.size), counts)
    starts = np.repeat(lo - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    cols = starts + np.arange(rows.size)
    vals = kernel_eval(kernel, s[rows] * (t[rows] - x_sorted[cols]) / h) / h
    if squared:
        vals = vals * vals
    return np.bincount(rows, weights=vals, minlength=t.size)


def estimate_tensor(spec, sample, axes, squared=False):
    """Evaluate on the tensor grid ``axes[0] x ... x axes[d-1]``.

    Returns an array of shape ``(len(axes[0]), ..., len(axes[d-1]))``. With
    ``squared=True`` the mean of ``K^2`` is returned instead of the mean of
    ``K`` (the empirical second moment used by the variance majorant).
    """
    _check_dim(spec, sample.d)
    _check_dim(spec, len(axes))
    if spec.d == 1:
        x = np.sort(sample.points[:, 0])
        return _window_sum(spec.kernels[0], spec.bandwidth[0], axes[0], x, squared) / sample.n
    factors = []
    for i, (k, h) in enumerate(zip(spec.kernels, spec.bandwidth)):
        f = _factor(k, h, axes[i], sample.points[:, i])
        factors.append(f * f if squared else f)
    letters = string.ascii_letters[: spec.d]
    expr = ",".join(f"{c}z" for c in letters) + "->" + letters
    return np.einsum(expr, *factors) / sample.n


def clip_negative(values, weights):
    """Truncate at zero and rescale to unit mass under quadrature ``weights``.

    Presentation helper only; the selection rule always works on raw values.
    """
    clipped = np.maximum(np.asarray(values, dtype=float), 0.0)
    mass = float(np.dot(weights, clipped))
    return clipped / mass if mass > 0 else clipped
