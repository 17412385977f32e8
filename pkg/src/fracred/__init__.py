"""Fractional calculus toolkit.

Exact operators on power sums, uniform-grid quadratures, Mittag-Leffler
evaluation, reduction of multi-term Caputo equations to single-order
systems, a predictor-corrector solver and a sector stability test.
"""

from .errors import FracredError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "FracredError", "__version__"]
