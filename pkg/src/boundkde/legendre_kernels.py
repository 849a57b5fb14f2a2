"""Minimal-norm polynomial kernels of order m on [0, 1].

The kernel of order ``m`` is the truncated reproducing kernel at the left
endpoint of the orthonormal shifted Legendre basis,

    w_m(u) = sum_{r=0}^{m} phi_r(0) phi_r(u),   phi_r(u) = sqrt(2r+1) Q_r(2u - 1),

and vanishes outside [0, 1]. It integrates to one, annihilates the monomials
u, ..., u^m, has ``||w_m||_2 = m + 1`` and ``||w_m||_inf = w_m(0) = (m + 1)^2``.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, sqrt

import numpy as np

from .errors import OrderTooLarge

__all__ = [
    "M_MAX",
    "HILBERT_MAX_ORDER",
    "OrderedKernel",
    "legendre_phi",
    "make_w",
    "hilbert_coeffs",
    "kernel_eval",
    "kernel_lp_norm",
]

M_MAX = 40
HILBERT_MAX_ORDER = 8

# Horner on the monomial form loses ~ 5.8**m * eps near u = 1; above this order
# the kernel is summed in the Legendre basis instead.
_HORNER_MAX_ORDER = 5


def _legendre_table(m, x):
    """Rows Q_0(x), ..., Q_m(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((m + 1,) + x.shape)
    out[0] = 1.0
    if m >= 1:
        out[1] = x
    for k in range(2, m + 1):
        out[k] = ((2 * k - 1) * x * out[k - 1] - (k - 1) * out[k - 2]) / k
    return out


def legendre_phi(r, u):
    """Orthonormal shifted Legendre polynomial ``sqrt(2r+1) Q_r(2u-1)``.

    Parameters
    ----------
    r : int
        Degree, ``r >= 0``.
    u : float or ndarray
        Evaluation point(s) in [0, 1].

    Returns
    -------
    float or ndarray
    """
    if r < 0:
        raise ValueError("degree must be non-negative")
    u = np.asarray(u, dtype=float)
    val = sqrt(2 * r + 1) * _legendre_table(r, 2.0 * u - 1.0)[r]
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True, eq=False)
class OrderedKernel:
    """Kernel ``w_m`` supported on [0, 1].

    ``coeffs`` holds the monomial coefficients ``a_0, ..., a_m`` and
    ``legendre`` the coefficients ``phi_r(0)`` in the orthonormal shifted
    Legendre basis; both describe the same polynomial.
    """

    order: int
    coeffs: tuple
    legendre: tuple

    @property
    def sup_norm(self):
        return float((self.order + 1) ** 2)

    @property
    def l2_norm(self):
        return float(self.order + 1)

    def __call__(self, u):
        return kernel_eval(self, u)

    def __eq__(self, other):
        if not isinstance(other, OrderedKernel):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        return f"OrderedKernel(order={self.order})"


@lru_cache(maxsize=None)
def _integer_coeffs(m):
    # phi_r(0) phi_r(u) = (2r+1) sum_k (-1)^k C(r,k) C(r+k,k) u^k, all integers
    return tuple(
        (-1) ** k * sum((2 * r + 1) * comb(r, k) * comb(r + k, k) for r in range(k, m + 1))
        for k in range(m + 1)
    )


@lru_cache(maxsize=None)
def make_w(m, m_max=M_MAX):
    """Build the order-``m`` kernel from its Legendre expansion.

    The monomial coefficients are accumulated exactly in integer arithmetic
    and rounded once to double precision.

    Raises
    ------
    OrderTooLarge
        If ``m > m_max``.
    """
    m = int(m)
    if m < 0:
        raise ValueError("kernel order must be non-negative")
    if m > m_max:
        raise OrderTooLarge(f"kernel order {m} exceeds m_max={m_max}")
    coeffs = tuple(float(a) for a in _integer_coeffs(m))
    legendre = tuple((-1) ** r * sqrt(2 * r + 1) for r in range(m + 1))
    return OrderedKernel(order=m, coeffs=coeffs, legendre=legendre)


def hilbert_coeffs(m):
    """Solve ``H_m a = e_0`` exactly over the rationals.

    ``H_m`` is the Hilbert matrix of size ``m + 1``. Independent of the
    Legendre route in :func:`make_w`; used to cross-check it.
    """
    m = int(m)
    if m < 0:
        raise ValueError("kernel order must be non-negative")
    if m > HILBERT_MAX_ORDER:
        raise OrderTooLarge(f"Hilbert solve limited to m <= {HILBERT_MAX_ORDER}, got {m}")
    size = m + 1
    aug = [[Fraction(1, i + j + 1) for j in range(size)] + [Fraction(int(i == 0))] for i in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pivot = aug[col][col]
        aug[col] = [v / pivot for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return np.array([float(row[-1]) for row in aug])


def kernel_eval(k, u):
    """Evaluate ``k`` at ``u``; zero outside the closed interval [0, 1]."""
    u = np.asarray(u, dtype=float)
    inside = (u >= 0.0) & (u <= 1.0)
    uc = np.where(inside, u, 0.0)
    if k.order <= _HORNER_MAX_ORDER:
        val = np.full(uc.shape, k.coeffs[-1])
        for a in k.coeffs[-2::-1]:
            val = val * uc + a
    else:
        q = _legendre_table(k.order, 2.0 * uc - 1.0)
        # legendre[r] * sqrt(2r+1) = (-1)^r (2r+1)
        w = np.array([(-1) ** r * (2 * r + 1) for r in range(k.order + 1)], dtype=float)
        val = np.tensordot(w, q, axes=1)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _roots_in_unit_interval(k):
    if k.order == 0:
        return np.empty(0)
    # Legendre series on [0, 1]: better conditioned than the monomial companion matrix.
    series = np.polynomial.Legendre(
        [(-1) ** r * (2 * r + 1) for r in range(k.order + 1)], domain=[0.0, 1.0]
    )
    roots = series.roots()
    roots = roots[np.abs(roots.imag) < 1e-10].real
    return np.sort(roots[(roots > 0.0) & (roots < 1.0)])


def kernel_lp_norm(k, p, panels=4, nodes=48):
    """``(int_0^1 |w_m|^p)^(1/p)``.

    ``p = 2`` uses the Parseval identity on the Legendre coefficients. Other
    exponents integrate by Gauss-Legendre on panels split at the real roots
    of the kernel, so ``|w_m|^p`` is smooth inside each panel.
    """
    p = float(p)
    if p < 1.0:
        raise ValueError("p must be >= 1")
    if p == 2.0:
        return float(np.sqrt(np.sum(np.square(k.legendre))))
    breaks = np.concatenate([[0.0], _roots_in_unit_interval(k), [1.0]])
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        edges = np.linspace(a, b, panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            total += 0.5 * (hi - lo) * np.dot(w, np.abs(kernel_eval(k, t)) ** p)
    return float(total ** (1.0 / p))
