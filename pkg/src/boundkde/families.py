"""Candidate estimator families indexed by integer vectors ``ell``.

Bandwidths are restricted to ``H_n = {h in (0, h_n*]^d : n V_h >= (log n)^c}``
with ``h_n* = exp(-sqrt(log n))``. Every index is stored as a tuple of ints:
length one in isotropic mode (``h = (e^-ell, ..., e^-ell)``), length ``d``
in anisotropic mode (``h_i = e^-ell_i``).
"""

from dataclasses import dataclass, field
import itertools
import math

from .boundary_kernels import ProductKernelSpec
from .errors import EmptyFamily, IndexNotInFamily
from .legendre_kernels import make_w

__all__ = [
    "FamilyConfig",
    "h_star",
    "m_of_ell",
    "in_bandwidth_set",
    "bandwidth_of",
    "iso_index_set",
    "ani_index_set",
    "index_set",
    "meet",
    "family_member",
]

DEFAULT_ANI_ORDER = 2


@dataclass(frozen=True)
class FamilyConfig:
    n: int
    d: int
    c: float = 1.0
    mode: str = "iso"
    orders: tuple = field(default=None)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.mode not in ("iso", "ani"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "ani":
            orders = self.orders
            if orders is None:
                orders = (DEFAULT_ANI_ORDER,) * self.d
            orders = tuple(int(m) for m in orders)
            if len(orders) != self.d:
                raise ValueError(f"ani mode needs {self.d} kernel orders, got {len(orders)}")
            object.__setattr__(self, "orders", orders)
        elif self.orders is not None:
            object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))


def h_star(n):
    """Largest admissible bandwidth ``exp(-sqrt(log n))``."""
    return math.exp(-math.sqrt(math.log(n)))


def m_of_ell(n, ell):
    """Kernel order paired with ``ell`` in the isotropic family."""
    return int(math.floor(math.log(n) / (2 * ell) + 0.5))


def in_bandwidth_set(h, n, c):
    """Membership test for ``H_n``, evaluated literally."""
    hs = h_star(n)
    volume = math.prod(h)
    return all(0.0 < hi <= hs for hi in h) and n * volume >= math.log(n) ** c


def bandwidth_of(cfg, idx):
    if cfg.mode == "iso":
        (ell,) = idx
        return (math.exp(-ell),) * cfg.d
    return tuple(math.exp(-li) for li in idx)


def _ell_min(n):
    ell = 1
    while math.exp(-ell) > h_star(n):
        ell += 1
    return ell


def _empty(cfg):
    return EmptyFamily(
        f"no index satisfies both h <= h_n* = {h_star(cfg.n):.6g} and "
        f"n V_h >= (log n)^c = {math.log(cfg.n) ** cfg.c:.6g} "
        f"(n={cfg.n}, d={cfg.d}, c={cfg.c}, mode={cfg.mode})"
    )


def iso_index_set(cfg):
    """Ascending list of admissible isotropic indices ``(ell,)``."""
    out = []
    ell = _ell_min(cfg.n)
    # n V_h decreases in ell, so membership stops at the first failure
    while in_bandwidth_set(bandwidth_of(cfg, (ell,)), cfg.n, cfg.c):
        out.append((ell,))
        ell += 1
    if not out:
        raise _empty(cfg)
    return out


def ani_index_set(cfg):
    """Lexicographically ordered admissible anisotropic index vectors."""
    lo = _ell_min(cfg.n)
    # every coordinate other than i sits at >= lo, which bounds ell_i from above
    hi = lo
    while cfg.n * math.exp(-(hi + 1) - (cfg.d - 1) * lo) >= math.log(cfg.n) ** cfg.c:
        hi += 1
    out = [
        idx
        for idx in itertools.product(range(lo, hi + 1), repeat=cfg.d)
        if in_bandwidth_set(tuple(math.exp(-li) for li in idx), cfg.n, cfg.c)
    ]
    if not out:
        raise _empty(cfg)
    return out


def index_set(cfg):
    return iso_index_set(cfg) if cfg.mode == "iso" else ani_index_set(cfg)


def meet(a, b):
    """Coordinatewise minimum of two indices."""
    return tuple(min(x, y) for x, y in zip(a, b))


def family_member(cfg, idx, members=None):
    """Kernel spec ``(W(ell), h(ell))`` of the family member ``idx``.

    ``members`` may pass a precomputed index list to skip re-enumeration.
    """
    idx = tuple(int(v) for v in (idx if isinstance(idx, (tuple, list)) else (idx,)))
    if members is None:
        members = index_set(cfg)
    if idx not in members:
        raise IndexNotInFamily(f"index {idx} is not in the {cfg.mode} family for n={cfg.n}, d={cfg.d}")
    if cfg.mode == "iso":
        kernels = (make_w(m_of_ell(cfg.n, idx[0])),) * cfg.d
    else:
        kernels = tuple(make_w(m) for m in cfg.orders)
    return ProductKernelSpec(kernels=kernels, bandwidth=bandwidth_of(cfg, idx))
