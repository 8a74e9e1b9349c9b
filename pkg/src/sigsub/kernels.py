"""Backend selection for the hot kernels.

The compiled extension ``sigsub._kernels`` is used when it imports;
otherwise the numpy implementations in ``sigsub._fallback`` take over.
Setting ``SIGSUB_PURE_PYTHON=1`` forces the fallback.
"""
import os

import numpy as np

from . import _fallback

BACKEND = "python"
_impl = _fallback
if not os.environ.get("SIGSUB_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback


def _backend(name):
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def fisher_pvalues(k0, k1, n0, n1, backend=None):
    k0 = np.ascontiguousarray(k0, dtype=np.int64)
    k1 = np.ascontiguousarray(k1, dtype=np.int64)
    return _backend(backend).fisher_pvalues(k0, k1, int(n0), int(n1))


def coherent_threshold(us, vs, scores, V, m, s, backend=None):
    us = np.ascontiguousarray(us, dtype=np.int64)
    vs = np.ascontiguousarray(vs, dtype=np.int64)
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    return _backend(backend).coherent_threshold(us, vs, scores, int(V), int(m), int(s))
