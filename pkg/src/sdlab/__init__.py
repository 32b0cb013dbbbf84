"""Short-interval arithmetic statistics: exact sieves and Dirichlet-series
coefficients, divisor-distribution laws, singular-series expansions, and
zero-detour contour experiments."""

from . import arith, contourlab, errors, intervals, powerseries, sdexpand, specfun

__version__ = "0.1.0"

__all__ = [
    "arith",
    "contourlab",
    "errors",
    "intervals",
    "powerseries",
    "sdexpand",
    "specfun",
    "__version__",
]
