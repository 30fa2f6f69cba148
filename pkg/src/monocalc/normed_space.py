"""Finite-dimensional p-normed spaces, their duals and duality mappings.

Points of X and covectors of X* are both plain ``numpy`` arrays of length
``dim``; the pairing is the Euclidean dot product. The norm on X is the
p-norm and the norm on X* is the conjugate q-norm, ``1/p + 1/q = 1``.
"""
from dataclasses import dataclass

import numpy as np

__all__ = ["NormedSpace", "DimensionError", "duality_map", "eps_duality_gap"]

DEFAULT_TOL = 1e-8


class DimensionError(ValueError):
    """Array length does not match the dimension of the space."""


@dataclass(frozen=True)
class NormedSpace:
    """The space (R^dim, ||.||_p) together with its dual (R^dim, ||.||_q).

    Parameters
    ----------
    dim : int
        Dimension, at least 1.
    p : float
        Exponent in the open interval (1, inf). The endpoints are rejected
        because the duality mapping is multivalued there.
    """

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        p = float(self.p)
        if not (1.0 < p < np.inf):
            raise ValueError(f"p must lie strictly between 1 and inf, got {self.p!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", p)

    @property
    def q(self):
        """Dual exponent."""
        return self.p / (self.p - 1.0)

    @property
    def is_hilbert(self):
        """True when J is the identity (p = 2, or any p in one dimension)."""
        return self.p == 2.0 or self.dim == 1

    def check(self, v, name="vector"):
        a = np.asarray(v, dtype=float).reshape(-1)
        if a.shape[0] != self.dim:
            raise DimensionError(f"{name} has length {a.shape[0]}, expected {self.dim}")
        return a

    def zero(self):
        return np.zeros(self.dim)

    def pair(self, x, xs):
        """Duality product <x, x*>."""
        return float(np.dot(self.check(x, "x"), self.check(xs, "x*")))

    def norm(self, x):
        return _pnorm(self.check(x), self.p)

    def dual_norm(self, xs):
        return _pnorm(self.check(xs), self.q)

    def duality_map(self, x):
        """J(x) = grad of 1/2 ||x||_p^2, a covector."""
        return _jmap(self.check(x), self.p)

    def dual_duality_map(self, xs):
        """Inverse of J: the duality map of X* back into X."""
        return _jmap(self.check(xs), self.q)

    def eps_duality_gap(self, u, w):
        """Fenchel-Young gap 1/2||u||^2 + 1/2||w||_*^2 - <u, w>.

        ``w`` lies in the eps-enlargement J_eps(u) exactly when the gap is
        at most eps, and in J(u) when it vanishes.
        """
        u = self.check(u, "u")
        w = self.check(w, "w")
        return 0.5 * _pnorm(u, self.p) ** 2 + 0.5 * _pnorm(w, self.q) ** 2 - float(np.dot(u, w))


def _pnorm(a, p):
    if p == 2.0:
        return float(np.linalg.norm(a))
    m = np.max(np.abs(a)) if a.size else 0.0
    if m == 0.0:
        return 0.0
    # scaled to avoid overflow in |a|^p
    return float(m * np.sum((np.abs(a) / m) ** p) ** (1.0 / p))


def _jmap(a, p):
    if p == 2.0:
        return a.copy()
    nrm = _pnorm(a, p)
    if nrm == 0.0:
        return np.zeros_like(a)
    r = np.abs(a) / nrm
    return nrm * np.sign(a) * r ** (p - 1.0)


def duality_map(space, x):
    """Module-level alias for :meth:`NormedSpace.duality_map`."""
    return space.duality_map(x)


def eps_duality_gap(space, u, w):
    """Module-level alias for :meth:`NormedSpace.eps_duality_gap`."""
    return space.eps_duality_gap(u, w)
