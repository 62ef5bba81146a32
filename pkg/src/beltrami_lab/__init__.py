"""Numerical laboratory for Beltrami equations with degenerate distortion.

Modules
-------
grid
    Periodic sampling grids, pixel sets and grid I/O.
beurling
    FFT Beurling and Cauchy transforms with plane (non periodic) corrections.
neumann
    Neumann series solver for ``dbar f = mu df`` and the term decay checks.
radial
    Closed-form radial maps and one dimensional log-space quadrature.
weights, functionals
    Weighted regularity integrands, the eps-sweep, weight conversion and
    rearrangement comparisons.
area
    Image areas against the area distortion bounds.
cli
    The ``beltrami-lab`` experiment runner.
"""

from .area import eh_bound_check, exp_area_bound_check, image_area, qc_series_set_bounds
from .beurling import BeurlingTransform, CauchyTransform, make_plan, plane_beurling, principal_cauchy
from .functionals import decreasing_rearrangement, eps_sweep, hlp_check, weight_conversion_check, weighted_integral_2d
from .grid import ComplexGrid, PixelSet, read_binary, sample, write_binary
from .neumann import (
    BeltramiField,
    DecayBoundParams,
    NeumannBeltramiSolver,
    SolutionField,
    neumann_solve,
    truncate_coefficient,
    verify_decay,
)
from .radial import RadialProfile, RadialSet, catalog_profile, truncation_sweep, weighted_integral
from .weights import WeightSpec, parse_weight

__version__ = "0.1.0"

__all__ = [
    "BeltramiField",
    "BeurlingTransform",
    "CauchyTransform",
    "ComplexGrid",
    "DecayBoundParams",
    "NeumannBeltramiSolver",
    "PixelSet",
    "RadialProfile",
    "RadialSet",
    "SolutionField",
    "WeightSpec",
    "catalog_profile",
    "decreasing_rearrangement",
    "eh_bound_check",
    "eps_sweep",
    "exp_area_bound_check",
    "hlp_check",
    "image_area",
    "make_plan",
    "neumann_solve",
    "parse_weight",
    "plane_beurling",
    "principal_cauchy",
    "qc_series_set_bounds",
    "read_binary",
    "sample",
    "truncate_coefficient",
    "truncation_sweep",
    "verify_decay",
    "weight_conversion_check",
    "weighted_integral",
    "weighted_integral_2d",
    "write_binary",
]
