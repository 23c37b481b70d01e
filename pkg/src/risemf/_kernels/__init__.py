"""Per-slot search kernels.

The compiled extension is used when it imports; otherwise the numpy version.
Set ``RISEMF_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _search_py

try:
    if os.environ.get("RISEMF_PURE_PYTHON"):
        raise ImportError("pure-python backend requested")
    from ._search_ext import search as _compiled_search
except ImportError:
    _compiled_search = None

BACKEND = "compiled" if _compiled_search is not None else "python"


def _c(a, dtype=np.complex128):
    return np.ascontiguousarray(a, dtype=dtype)


def search(Hd, Hra, Hur, hdp, hrp, weights, phasors, Wu, Wa,
           bl, br, v, dfac, bw, noise, pmax, backend=None):
    """Dispatch to the selected backend (``'compiled'`` or ``'python'``)."""
    backend = backend or BACKEND
    args = (_c(Hd), _c(Hra), _c(Hur), _c(hdp), _c(hrp), _c(weights, np.float64),
            _c(phasors), _c(Wu), _c(Wa), float(bl), float(br), float(v), float(dfac),
            float(bw), float(noise), float(pmax))
    if backend == "compiled":
        if _compiled_search is None:
            raise RuntimeError("compiled kernel not built")
        return _compiled_search(*args)
    return _search_py.search(*args)
