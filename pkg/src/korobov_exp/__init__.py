"""Minimal errors, complexities, and grid splines for Korobov spaces with exponential weights."""

from .grids import RegularGrid, error_bounds, f_n, mesh_spt, mesh_uexp, out_of_vn_mass, uexp_design
from .minimal_errors import (
    CertificationStall,
    complexity,
    complexity_bracket,
    error_l2_all,
    error_linf_all,
    initial_error,
    lower_bound_norm,
)
from .space import SequenceFamily, SpaceError, WeightedSpace, kernel, load_space
from .spectrum import ResourceCapExceeded, Spectrum
from .spline import SplineInterpolant, empirical_wc_error, gram_oracle, interpolate, power_function
from .tractability import diagnostics, fit_rate, verdicts, wt_complexity_bound

__version__ = "0.1.0"

__all__ = [
    "CertificationStall", "RegularGrid", "ResourceCapExceeded", "SequenceFamily", "SpaceError",
    "Spectrum", "SplineInterpolant", "WeightedSpace", "complexity", "complexity_bracket",
    "diagnostics", "empirical_wc_error", "error_bounds", "error_l2_all", "error_linf_all",
    "f_n", "fit_rate", "gram_oracle", "initial_error", "interpolate", "kernel", "load_space",
    "lower_bound_norm", "mesh_spt", "mesh_uexp", "out_of_vn_mass", "power_function",
    "uexp_design", "verdicts", "wt_complexity_bound",
]
