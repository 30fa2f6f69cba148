"""Pure numpy kernels over sampled graphs.

Every function takes the graph as two 2-D arrays ``ys`` (points) and
``yss`` (covectors) of shape ``(m, n)``. The compiled module ``_ckernels``
exposes the same functions with the same signatures.
"""
import numpy as np


def min_gap(ys, yss, x, xs):
    """min_i <x - y_i, xs - y*_i>."""
    return float(np.min(np.einsum("ij,ij->i", x - ys, xs - yss)))


def min_gap_many(ys, yss, X, XS):
    out = np.empty(X.shape[0])
    for k in range(X.shape[0]):
        out[k] = np.min(np.einsum("ij,ij->i", X[k] - ys, XS[k] - yss))
    return out


def min_pairwise_gap(ys, yss):
    """Smallest <y_i - y_j, y*_i - y*_j> over all pairs i < j (inf if m < 2)."""
    m = ys.shape[0]
    best = np.inf
    for i in range(m - 1):
        g = np.einsum("ij,ij->i", ys[i] - ys[i + 1:], yss[i] - yss[i + 1:])
        best = min(best, float(g.min()))
    return best


def fitz_max(ys, yss, x, xs):
    """max_i <y_i, xs> + <x, y*_i> - <y_i, y*_i>."""
    return float(np.max(ys @ xs + yss @ x - np.einsum("ij,ij->i", ys, yss)))


def fitz_max_many(ys, yss, X, XS):
    diag = np.einsum("ij,ij->i", ys, yss)
    vals = XS @ ys.T + X @ yss.T - diag[None, :]
    return vals.max(axis=1)
