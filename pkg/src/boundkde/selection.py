"""Goldenshluger-Lepski selection over an iso or ani estimator family.

For every candidate ``ell`` the rule compares the estimators
``f_{ell ^ ell'}`` and ``f_{ell'}`` against the penalized majorant and picks

    ell_hat = argmin_ell  B(ell) + (1 + tau) M(ell),
    B(ell)  = max_{ell'} { ||f_{ell ^ ell'} - f_{ell'}||_p - (1 + tau) (M(ell') + M(ell ^ ell')) }_+ .

All candidates are evaluated once on a shared full-cube grid, so each
pairwise norm is a weighted sum over cached vectors.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .families import FamilyConfig, family_member, index_set, meet
from .lp_engine import CubeGrid, QuadratureConfig, lp_norm, m_hat

__all__ = [
    "SelectionConfig",
    "SelectionTrace",
    "FamilyFit",
    "fit_family",
    "pairwise_norms",
    "b_hat",
    "select",
    "select_from_fit",
]


@dataclass(frozen=True)
class SelectionConfig:
    p: float = 2.0
    q: float = 1.0
    tau: float = 1.0
    c: float = 1.0
    mode: str = "iso"
    orders: tuple = None
    quad: QuadratureConfig = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be >= 1")
        if self.orders is not None:
            object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))

    def family(self, n, d):
        return FamilyConfig(n=n, d=d, c=self.c, mode=self.mode, orders=self.orders)

    def grid(self, d):
        return CubeGrid(d, self.quad)


@dataclass
class SelectionTrace:
    """Everything the rule computed, in enumeration order."""

    indices: list
    m_hat: list
    b_hat: list
    objective: list
    chosen: tuple
    pairwise_norms: list = field(repr=False)
    p: float = 2.0
    q: float = 1.0
    tau: float = 1.0

    def records(self):
        return [
            {"ell": list(idx), "m_hat": m, "b_hat": b, "objective": o}
            for idx, m, b, o in zip(self.indices, self.m_hat, self.b_hat, self.objective)
        ]

    def to_dict(self):
        return {
            "p": self.p,
            "q": self.q,
            "tau": self.tau,
            "chosen": list(self.chosen),
            "records": self.records(),
            "pairwise_norms": [list(row) for row in self.pairwise_norms],
        }

    @classmethod
    def from_dict(cls, data):
        recs = data["records"]
        return cls(
            indices=[tuple(r["ell"]) for r in recs],
            m_hat=[float(r["m_hat"]) for r in recs],
            b_hat=[float(r["b_hat"]) for r in recs],
            objective=[float(r["objective"]) for r in recs],
            chosen=tuple(data["chosen"]),
            pairwise_norms=[[float(v) for v in row] for row in data["pairwise_norms"]],
            p=float(data["p"]),
            q=float(data["q"]),
            tau=float(data["tau"]),
        )


@dataclass
class FamilyFit:
    """Cached family evaluation on one sample."""

    family: FamilyConfig
    grid: CubeGrid
    indices: list
    specs: dict
    estimates: dict
    m_hats: dict


def fit_family(sample, cfg, grid=None, workers=1):
    """Evaluate every family member and its majorant on the shared grid."""
    family = cfg.family(sample.n, sample.d)
    grid = grid or cfg.grid(sample.d)
    if grid.d != sample.d:
        raise DimensionMismatch(f"grid has d={grid.d}, sample has d={sample.d}")
    indices = index_set(family)
    specs = {idx: family_member(family, idx, indices) for idx in indices}

    def work(idx):
        est = grid.estimate(specs[idx], sample)
        return est, m_hat(family, idx, sample, cfg.p, grid, spec=specs[idx])

    if workers > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, indices))
    else:
        results = [work(idx) for idx in indices]
    estimates = {idx: r[0] for idx, r in zip(indices, results)}
    m_hats = {idx: r[1] for idx, r in zip(indices, results)}
    return FamilyFit(family, grid, indices, specs, estimates, m_hats)


def pairwise_norms(fit, p):
    """Matrix ``N[i, j] = ||f_{ell_i ^ ell_j} - f_{ell_j}||_p``."""
    k = len(fit.indices)
    out = np.zeros((k, k))
    for i, a in enumerate(fit.indices):
        for j, b in enumerate(fit.indices):
            low = meet(a, b)
            # the meet is always a family member: coordinates come from a or b
            assert low in fit.estimates, f"meet {low} of {a} and {b} left the family"
            if low != b:
                out[i, j] = lp_norm(fit.estimates[low] - fit.estimates[b], fit.grid, p)
    return out


def b_hat(idx, indices, norms, m_hats, tau):
    """Positive part of the worst penalized pairwise discrepancy for ``idx``.

    ``norms`` is the matrix from :func:`pairwise_norms` in ``indices`` order.
    """
    i = indices.index(idx)
    best = 0.0
    for j, other in enumerate(indices):
        penalty = (1.0 + tau) * (m_hats[other] + m_hats[meet(idx, other)])
        best = max(best, float(norms[i][j]) - penalty)
    return best


def select_from_fit(fit, cfg):
    norms = pairwise_norms(fit, cfg.p)
    bs = [b_hat(idx, fit.indices, norms, fit.m_hats, cfg.tau) for idx in fit.indices]
    ms = [fit.m_hats[idx] for idx in fit.indices]
    objective = [b + (1.0 + cfg.tau) * m for b, m in zip(bs, ms)]
    # strict '<' keeps the first (smoothest) index on ties
    best = 0
    for i, value in enumerate(objective):
        if value < objective[best]:
            best = i
    return SelectionTrace(
        indices=list(fit.indices),
        m_hat=ms,
        b_hat=bs,
        objective=objective,
        chosen=fit.indices[best],
        pairwise_norms=norms.tolist(),
        p=cfg.p,
        q=cfg.q,
        tau=cfg.tau,
    )


def select(sample, cfg, grid=None, workers=1):
    """Run the selection rule; return the trace and the chosen kernel spec."""
    fit = fit_family(sample, cfg, grid, workers)
    trace = select_from_fit(fit, cfg)
    return trace, fit.specs[trace.chosen]
