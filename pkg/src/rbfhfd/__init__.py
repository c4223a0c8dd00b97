"""Compact RBF-FD (Hermite) differentiation formulas with Gaussian and
multiquadric kernels.

Exact weight series in ``t = (eps*h)^2``, numeric weights, local truncation
errors, flat-limit checks against compact finite differences and optimal
shape parameters.
"""

from .analysis import (
    LtePoly,
    OptimalEpsResult,
    apply_formula,
    lte_numeric,
    lte_poly_derived,
    lte_poly_template,
    optimal_eps,
)
from .formulas import (
    FormulaId,
    catalog,
    weights_auto,
    weights_flat,
    weights_numeric,
    weights_series,
)
from .jets import TestFunctionId
from .kernels import KernelKind, OperatorKind
from .series import TruncatedSeries

__version__ = "0.1.0"

__all__ = [
    "FormulaId",
    "KernelKind",
    "OperatorKind",
    "TestFunctionId",
    "TruncatedSeries",
    "LtePoly",
    "OptimalEpsResult",
    "catalog",
    "weights_series",
    "weights_numeric",
    "weights_flat",
    "weights_auto",
    "apply_formula",
    "lte_numeric",
    "lte_poly_template",
    "lte_poly_derived",
    "optimal_eps",
]
