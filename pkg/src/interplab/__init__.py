"""Numerical laboratory for real interpolation between [0, inf]-valued
functions and for nonlinear semigroups generated by m-accretive operators."""

from .grids import GridFunction, GridMismatchError, LogGrid
from .spaces import (
    SpaceSpec,
    UnsupportedSpaceError,
    dilation_apply,
    dilation_norm,
    hardy_apply,
    hardy_analytic_bound,
    hardy_norm_estimate,
    l1_cap_linf_space,
    l1_space,
    linf_space,
    norm,
    square_space,
    weighted_lp,
)

__version__ = "0.1.0"
