"""Test densities, samplers, the naive convolution baseline and Monte Carlo risk.

The bump family is the lower-bound construction for anisotropic classes:
``f_w = 1 + rho * sum_r w(r) prod_i phi((x_i - x_i^(r)) / h_i)`` with
``phi(u) = (H * psi)(2u)``, ``psi(v) = exp(-1/(1 - v^2))`` on (-1, 1) and ``H``
the sign step on (-1, 1). The theoretical choices ``rho_n = c_1 n^{-s/(2s+1)}``
and ``h_i = n^{-s/((2s+1) s_i)}`` only serve the minimax proof; here ``rho`` and
``h`` are free knobs.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .boundary_kernels import ProductKernelSpec, SampleSet
from .errors import BadEnvelope, DimensionMismatch, InsufficientPoints, InvalidAmplitude
from .legendre_kernels import make_w
from .lp_engine import CubeGrid, composite_gauss, lp_norm
from .selection import fit_family, select_from_fit

__all__ = [
    "PHI_BOUND",
    "phi",
    "UniformDensity",
    "BumpFamilyParams",
    "BumpDensity",
    "bump_density",
    "replicate_rng",
    "rejection_sample",
    "epanechnikov",
    "epanechnikov_cdf",
    "convolution_kde",
    "bias_demo",
    "RiskEntry",
    "RiskReport",
    "mc_risk",
    "rate_slope",
    "fixed_estimator",
    "gl_estimator",
    "oracle_experiment",
]

PHI_BOUND = 2.0 / math.e
_PHI_TABLE_SIZE = 4096
# for 1 - |u| = delta < 2^-12, |phi(u)| < 2 delta exp(-1/(4 delta)) underflows to zero;
# cutting there also removes spline ringing next to the support edge
_PHI_EDGE = 1.0 - 2.0**-12


def _psi(v):
    if abs(v) >= 1.0:
        return 0.0
    return math.exp(-1.0 / (1.0 - v * v))


@lru_cache(maxsize=1)
def _phi_spline():
    # u on [-1, 1] with step 2/4096: 2u and 2u +- 1 all fall on the v-grid of step 1/1024
    steps = _PHI_TABLE_SIZE // 4
    v = np.linspace(-1.0, 1.0, 2 * steps + 1)
    pieces = [quad(_psi, a, b, epsabs=1e-14, epsrel=1e-12)[0] for a, b in zip(v[:-1], v[1:])]
    cum = np.concatenate([[0.0], np.cumsum(pieces)])

    def big_psi(k):
        # cumulative integral of psi up to v = -1 + k / steps, clamped outside [-1, 1]
        return cum[np.clip(k, 0, 2 * steps)]

    j = np.arange(_PHI_TABLE_SIZE + 1)
    # 2u = -2 + j / steps  ->  index of 2u on the v-grid is j - steps
    k_mid = j - steps
    table = (big_psi(k_mid) - big_psi(k_mid - steps)) - (big_psi(k_mid + steps) - big_psi(k_mid))
    table = 0.5 * (table - table[::-1])  # exact oddness
    u = np.linspace(-1.0, 1.0, _PHI_TABLE_SIZE + 1)
    return CubicSpline(u, table)


def phi(u):
    """Smooth odd bump ``(H * psi)(2u)`` supported on [-1, 1]."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < _PHI_EDGE
    out = np.where(inside, _phi_spline()(np.where(inside, u, 0.0)), 0.0)
    return float(out) if out.ndim == 0 else out


class UniformDensity:
    def __init__(self, d):
        self.d = int(d)
        self.sup = 1.0

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        inside = np.all((x >= 0.0) & (x <= 1.0), axis=1)
        return inside.astype(float)

    def describe(self):
        return {"density": "uniform", "d": self.d}


@dataclass(frozen=True)
class BumpFamilyParams:
    """Bump lattice with half-width ``h_i`` per axis, ``R_i = 1/(2 h_i)`` bumps per axis."""

    d: int
    h: tuple
    rho: float
    w: np.ndarray = field(compare=False)

    @classmethod
    def alternating(cls, d, h, rho):
        """Lattice with ``w(r) = 1`` when ``sum(r)`` is even."""
        h = tuple(float(v) for v in np.broadcast_to(h, (d,)))
        counts = tuple(int(round(1.0 / (2.0 * hi))) for hi in h)
        grid = np.indices(counts).sum(axis=0)
        return cls(d=d, h=h, rho=float(rho), w=(grid % 2 == 0).astype(int))

    @property
    def counts(self):
        return tuple(int(round(1.0 / (2.0 * hi))) for hi in self.h)

    def centers(self, axis):
        return (2.0 * np.arange(self.counts[axis]) + 1.0) * self.h[axis]


class BumpDensity:
    def __init__(self, params):
        h = tuple(float(v) for v in params.h)
        if len(h) != params.d:
            raise DimensionMismatch(f"{len(h)} half-widths for d={params.d}")
        for hi in h:
            if not 0.0 < hi < 0.5:
                raise ValueError(f"bump half-width {hi} outside (0, 1/2)")
            if abs(1.0 / (2.0 * hi) - round(1.0 / (2.0 * hi))) > 1e-9:
                raise ValueError(f"1/(2h) must be an integer, got h={hi}")
        w = np.asarray(params.w, dtype=int)
        if w.shape != params.counts:
            raise DimensionMismatch(f"w has shape {w.shape}, lattice is {params.counts}")
        if not np.isin(w, (0, 1)).all():
            raise ValueError("w must be binary")
        if not 0.0 <= params.rho < (math.e / 2.0) ** params.d:
            raise InvalidAmplitude(
                f"rho={params.rho} must lie in [0, (e/2)^d) = [0, {(math.e / 2) ** params.d:.6g})"
            )
        self.params = params
        self.d = params.d
        self._h = np.array(h)
        self._w = w
        self.sup = 1.0 + params.rho * PHI_BOUND ** params.d
        self.inf = 1.0 - params.rho * PHI_BOUND ** params.d

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.d:
            raise DimensionMismatch(f"points have d={x.shape[1]}, density has d={self.d}")
        counts = np.array(self.params.counts)
        # every point lies in exactly one cell [2 r h, 2 (r + 1) h]; bumps vanish on cell edges
        cell = np.clip(np.floor(x / (2.0 * self._h)).astype(int), 0, counts - 1)
        local = (x - (2.0 * cell + 1.0) * self._h) / self._h
        bump = np.prod(phi(local), axis=1)
        active = self._w[tuple(cell.T)]
        inside = np.all((x >= 0.0) & (x <= 1.0), axis=1)
        return np.where(inside, 1.0 + self.params.rho * active * bump, 0.0)

    def describe(self):
        p = self.params
        return {"density": "bump", "d": p.d, "h": list(p.h), "rho": p.rho, "w": p.w.tolist()}


def bump_density(params):
    return BumpDensity(params)


def replicate_rng(seed, k):
    """Generator for replicate ``k``: a pure function of ``(seed, k)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(k),)))


def rejection_sample(density, n, envelope=None, seed=0, rng=None):
    """Draw ``n`` points from ``density`` by uniform-proposal rejection.

    Raises
    ------
    BadEnvelope
        When an evaluated density value exceeds ``envelope``.
    """
    if envelope is None:
        envelope = density.sup
    if rng is None:
        rng = np.random.default_rng(seed)
    d = density.d
    batch = int(math.ceil(1.1 * n * envelope)) + 16
    kept, total = [], 0
    while total < n:
        x = rng.random((batch, d))
        fx = density(x)
        if np.any(fx > envelope):
            raise BadEnvelope(f"density value {fx.max():.6g} exceeds envelope {envelope:.6g}")
        accept = rng.random(batch) * envelope < fx
        kept.append(x[accept])
        total += int(accept.sum())
    return SampleSet(np.concatenate(kept)[:n])


def epanechnikov(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def epanechnikov_cdf(u):
    u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
    return 0.5 + 0.75 * u - 0.25 * u ** 3


def convolution_kde(sample, h, t, kernel=epanechnikov):
    """Classical product-kernel estimate ``(1/(n V_h)) sum_j prod_i K((t_i - X_ji)/h_i)``."""
    h = np.broadcast_to(np.asarray(h, dtype=float), (sample.d,))
    t = np.atleast_2d(np.asarray(t, dtype=float))
    if t.shape[1] != sample.d:
        t = t.reshape(-1, sample.d)
    vals = np.ones((t.shape[0], sample.n))
    for i in range(sample.d):
        vals = vals * kernel((t[:, i : i + 1] - sample.points[None, :, i]) / h[i])
    out = vals.sum(axis=1) / (sample.n * np.prod(h))
    return float(out[0]) if out.size == 1 else out


def _boundary_mean_uniform(spec, t, nodes=16):
    """``int_0^1 K_{W,h}(t, x) dx`` for d = 1 by Gauss on the kernel support."""
    kernel, h = spec.kernels[0], spec.bandwidth[0]
    x, w = np.polynomial.legendre.leggauss(max(nodes, kernel.order + 1))
    t = np.asarray(t, dtype=float)[:, None]
    lo = np.where(t > 0.5, t - h, t)
    xs = lo + 0.5 * h * (x + 1.0)
    return (0.5 * h * w * (kernel(np.where(t > 0.5, t - xs, xs - t) / h) / h)).sum(axis=1)


def bias_demo(p, h_list, panels=64, nodes=16, order=1):
    """Integrated bias ``||E f_h - 1||_p`` on the uniform density, d = 1.

    Both expectations are exact: the naive Epanechnikov mean is
    ``F(t/h) - F((t-1)/h)`` with ``F`` the kernel CDF, and the boundary mean
    integrates the kernel over its support with an exact Gauss rule. Only
    the outer integral over ``t`` is numerical, on panels split at ``h``,
    ``1/2`` and ``1 - h`` where the integrands change form.

    Returns
    -------
    list of (h, naive_bias, boundary_bias)
    """
    rows = []
    for h in h_list:
        breaks = np.unique([0.0, h, 0.5, 1.0 - h, 1.0])
        t_parts, w_parts = [], []
        for a, b in zip(breaks[:-1], breaks[1:]):
            t, w = composite_gauss(a, b, panels, nodes)
            t_parts.append(t)
            w_parts.append(w)
        t, w = np.concatenate(t_parts), np.concatenate(w_parts)
        naive = epanechnikov_cdf(t / h) - epanechnikov_cdf((t - 1.0) / h)
        spec = ProductKernelSpec((make_w(order),), (h,))
        boundary = _boundary_mean_uniform(spec, t)
        rows.append(
            (
                float(h),
                float(np.dot(w, np.abs(naive - 1.0) ** p) ** (1.0 / p)),
                float(np.dot(w, np.abs(boundary - 1.0) ** p) ** (1.0 / p)),
            )
        )
    return rows


@dataclass
class RiskEntry:
    n: int
    replicates: int
    risk: float
    stderr: float
    norms: np.ndarray = field(repr=False)


@dataclass
class RiskReport:
    p: float
    q: float
    entries: list

    @property
    def sample_sizes(self):
        return [e.n for e in self.entries]

    @property
    def slope(self):
        return rate_slope(self) if len(self.entries) >= 2 else None


def _map(func, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(k) for k in items]


def mc_risk(estimator, density, n, p, q, replicates, seed, grid=None, workers=1):
    """Monte Carlo estimate of ``(E ||f_hat - f||_p^q)^{1/q}``.

    ``estimator(sample, grid)`` returns the estimate on the full-cube grid.
    Replicate ``k`` draws from :func:`replicate_rng` ``(seed, k)``; results
    are reduced in replicate order whatever the worker count.
    """
    if replicates < 2:
        raise ValueError("replicates must be >= 2")
    grid = grid or CubeGrid(density.d)
    truth = grid.evaluate(density)

    def one(k):
        sample = rejection_sample(density, n, rng=replicate_rng(seed, k))
        return lp_norm(estimator(sample, grid) - truth, grid, p)

    norms = np.array(_map(one, range(replicates), workers))
    powers = norms ** q
    mean = float(powers.mean())
    risk = mean ** (1.0 / q)
    if mean > 0:
        stderr = (1.0 / q) * mean ** (1.0 / q - 1.0) * float(powers.std(ddof=1)) / math.sqrt(replicates)
    else:
        stderr = 0.0
    return RiskEntry(n=int(n), replicates=int(replicates), risk=risk, stderr=stderr, norms=norms)


def rate_slope(report):
    """Least-squares slope of ``log risk`` against ``log n``.

    Accepts a :class:`RiskReport` or an iterable of ``(n, risk)`` pairs.
    """
    if isinstance(report, RiskReport):
        pairs = [(e.n, e.risk) for e in report.entries]
    else:
        pairs = list(report)
    if len(pairs) < 2:
        raise InsufficientPoints(f"need at least 2 sample sizes, got {len(pairs)}")
    x = np.log([float(a) for a, _ in pairs])
    y = np.log([float(b) for _, b in pairs])
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def fixed_estimator(spec):
    def run(sample, grid):
        return grid.estimate(spec, sample)

    return run


def gl_estimator(cfg):
    def run(sample, grid):
        fit = fit_family(sample, cfg, grid)
        trace = select_from_fit(fit, cfg)
        return fit.estimates[trace.chosen]

    return run


def oracle_experiment(density, cfg, n, replicates, seed, grid=None, workers=1):
    """Per-replicate ratio of the selected estimator's loss to the family's best.

    Returns a list of dicts with keys ``replicate``, ``chosen``, ``best``,
    ``loss_selected``, ``loss_best``, ``ratio`` and ``losses`` (per index).
    """
    grid = grid or cfg.grid(density.d)
    truth = grid.evaluate(density)

    def one(k):
        sample = rejection_sample(density, n, rng=replicate_rng(seed, k))
        fit = fit_family(sample, cfg, grid)
        trace = select_from_fit(fit, cfg)
        losses = {idx: lp_norm(fit.estimates[idx] - truth, grid, cfg.p) for idx in fit.indices}
        best = min(fit.indices, key=lambda idx: losses[idx])
        return {
            "replicate": k,
            "chosen": trace.chosen,
            "best": best,
            "loss_selected": losses[trace.chosen],
            "loss_best": losses[best],
            "ratio": losses[trace.chosen] / losses[best],
            "losses": losses,
        }

    return _map(one, range(replicates), workers)
