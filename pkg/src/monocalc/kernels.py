"""Backend selection for the graph kernels.

The compiled extension is used when it was built; otherwise the numpy
versions are used. Setting ``MONOCALC_PURE=1`` forces the numpy backend.
"""
import os

import numpy as np

from . import _kernels_py

_impl = _kernels_py
BACKEND = "python"
if os.environ.get("MONOCALC_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

__all__ = ["BACKEND", "min_gap", "min_gap_many", "min_pairwise_gap",
           "fitz_max", "fitz_max_many"]


def _c2(a):
    return np.ascontiguousarray(a, dtype=float)


def min_gap(ys, yss, x, xs):
    return float(_impl.min_gap(_c2(ys), _c2(yss), _c2(x), _c2(xs)))


def min_gap_many(ys, yss, X, XS):
    return np.asarray(_impl.min_gap_many(_c2(ys), _c2(yss), _c2(X), _c2(XS)))


def min_pairwise_gap(ys, yss):
    return float(_impl.min_pairwise_gap(_c2(ys), _c2(yss)))


def fitz_max(ys, yss, x, xs):
    return float(_impl.fitz_max(_c2(ys), _c2(yss), _c2(x), _c2(xs)))


def fitz_max_many(ys, yss, X, XS):
    return np.asarray(_impl.fitz_max_many(_c2(ys), _c2(yss), _c2(X), _c2(XS)))
