"""Boundary-corrected kernel density estimation on [0, 1]^d with
Goldenshluger-Lepski selection of the bandwidth (and kernel order)."""

__version__ = "0.1.0"

from .boundary_kernels import (
    ProductKernelSpec,
    SampleSet,
    boundary_kernel_eval,
    estimate,
    estimate_grid,
    estimate_tensor,
    sigma,
)
from .errors import (
    BadEnvelope,
    BoundKDEError,
    DimensionMismatch,
    EmptyFamily,
    GridMismatch,
    IndexNotInFamily,
    InsufficientPoints,
    InvalidAmplitude,
    OrderTooLarge,
    OutOfDomain,
    ParseError,
)
from .families import FamilyConfig, family_member, h_star, index_set, m_of_ell
from .legendre_kernels import OrderedKernel, hilbert_coeffs, kernel_eval, kernel_lp_norm, legendre_phi, make_w
from .lp_engine import CubeGrid, QuadratureConfig, lp_norm
from .selection import SelectionConfig, SelectionTrace, select

__all__ = [
    "ProductKernelSpec",
    "SampleSet",
    "boundary_kernel_eval",
    "estimate",
    "estimate_grid",
    "estimate_tensor",
    "sigma",
    "BadEnvelope",
    "BoundKDEError",
    "DimensionMismatch",
    "EmptyFamily",
    "GridMismatch",
    "IndexNotInFamily",
    "InsufficientPoints",
    "InvalidAmplitude",
    "OrderTooLarge",
    "OutOfDomain",
    "ParseError",
    "FamilyConfig",
    "family_member",
    "h_star",
    "index_set",
    "m_of_ell",
    "OrderedKernel",
    "hilbert_coeffs",
    "kernel_eval",
    "kernel_lp_norm",
    "legendre_phi",
    "make_w",
    "CubeGrid",
    "QuadratureConfig",
    "lp_norm",
    "SelectionConfig",
    "SelectionTrace",
    "select",
]
