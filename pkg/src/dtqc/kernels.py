"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
implementation is used. Set ``DTQC_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("DTQC_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

MAX_SITES = _impl.MAX_SITES
enumerate_constrained = _impl.enumerate_constrained
pxp_coo = _impl.pxp_coo
occupations = _impl.occupations
region_counts = _impl.region_counts
