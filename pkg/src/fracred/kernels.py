"""Selects the compiled history kernels when available, else the numpy twins.

Set ``FRACRED_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("FRACRED_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

product_trapezoid = _impl.product_trapezoid
l1_caputo = _impl.l1_caputo
abm_solve = _impl.abm_solve

__all__ = ["BACKEND", "product_trapezoid", "l1_caputo", "abm_solve"]
