"""Monotone operators on a :class:`NormedSpace` and their evaluation.

An operator is evaluated pointwise into a structural set description
(empty set, singleton, coordinate box, finitely generated cone, finite
point list). The descriptions support nearest-point queries, which is all
the solvers and probes need.

Operators that are subdifferentials, or more generally have a cheap
Euclidean resolvent ``(I + s T)^{-1}``, expose it through
:meth:`OperatorSpec.resolvent`; the resolvent engine builds on it.
"""
import numpy as np
from scipy.optimize import lsq_linear, nnls

from . import kernels
from .normed_space import DimensionError, NormedSpace

__all__ = [
    "SetDescription", "EmptySet", "Singleton", "Box", "Cone", "FinitePoints", "SumSet",
    "OperatorSpec", "SubdiffOracle", "SingleValuedMap", "LinearMap",
    "NormalCone", "SampledGraph", "NonMonotoneError",
    "abs_operator", "indicator_ball", "indicator_box", "linear", "zero",
    "identity", "graph", "min_monotonicity_gap", "is_monotone_graph",
]

#: relative slack used when deciding whether a point sits on a kink or boundary
BOUNDARY_TOL = 1e-12


class NonMonotoneError(ValueError):
    """A graph flagged (or required to be) monotone is not."""


# ---------------------------------------------------------------- sets

class SetDescription:
    """Closed convex (or finite) subset of R^n described by its structure."""

    is_empty = False
    is_singleton = False

    def project(self, v):
        """Euclidean nearest point of the set to ``v``."""
        raise NotImplementedError

    def distance(self, v):
        if self.is_empty:
            return np.inf
        v = np.asarray(v, dtype=float)
        return float(np.linalg.norm(v - self.project(v)))

    def contains(self, v, tol=1e-9):
        v = np.asarray(v, dtype=float)
        return self.distance(v) <= tol * max(1.0, float(np.linalg.norm(v)))

    def select(self):
        """One element of the set (the least-norm one where cheap)."""
        return self.project(np.zeros(self.dim))

    def image_project(self, M, c):
        """Element ``s`` of the set minimising ``||M s - c||_2``."""
        raise NotImplementedError

    def shift(self, b):
        raise NotImplementedError

    def as_affine(self):
        """``(offset, M, lo, hi)`` with the set equal to ``{offset + M u : lo <= u <= hi}``."""
        raise NotImplementedError(f"{type(self).__name__} is not a convex polyhedral set")


class EmptySet(SetDescription):
    is_empty = True

    def __init__(self, dim):
        self.dim = dim

    def project(self, v):
        raise ValueError("empty set has no nearest point")

    def image_project(self, M, c):
        raise ValueError("empty set has no nearest point")

    def shift(self, b):
        return self

    def __repr__(self):
        return "EmptySet()"


class Singleton(SetDescription):
    is_singleton = True

    def __init__(self, point):
        self.point = np.asarray(point, dtype=float).reshape(-1)
        self.dim = self.point.shape[0]

    def project(self, v):
        return self.point.copy()

    def image_project(self, M, c):
        return self.point.copy()

    def shift(self, b):
        return Singleton(self.point + b)

    def as_affine(self):
        return self.point, np.zeros((self.dim, 0)), np.zeros(0), np.zeros(0)

    def __repr__(self):
        return f"Singleton({self.point.tolist()})"


class Box(SetDescription):
    """Product of closed intervals ``[lo_i, hi_i]``; bounds may be infinite."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float).reshape(-1)
        self.hi = np.asarray(hi, dtype=float).reshape(-1)
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise ValueError("box bounds must satisfy lo <= hi")
        self.dim = self.lo.shape[0]
        self.is_singleton = bool(np.all(self.lo == self.hi))

    def project(self, v):
        return np.clip(v, self.lo, self.hi)

    def image_project(self, M, c):
        free = self.lo < self.hi
        s = self.lo.copy()
        if not free.any():
            return s
        M = np.atleast_2d(M)
        rhs = c - M[:, ~free] @ s[~free]
        res = lsq_linear(M[:, free], rhs, bounds=(self.lo[free], self.hi[free]),
                         tol=1e-14, method="bvls")
        s[free] = res.x
        return s

    def shift(self, b):
        return Box(self.lo + b, self.hi + b)

    def as_affine(self):
        return np.zeros(self.dim), np.eye(self.dim), self.lo, self.hi

    def __repr__(self):
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"


class Cone(SetDescription):
    """``apex + {sum_k t_k g_k : t_k >= 0}`` for generator rows ``g_k``."""

    def __init__(self, apex, generators):
        self.apex = np.asarray(apex, dtype=float).reshape(-1)
        self.dim = self.apex.shape[0]
        self.generators = np.asarray(generators, dtype=float).reshape(-1, self.dim)

    def project(self, v):
        return self.image_project(np.eye(self.dim), np.asarray(v, dtype=float))

    def image_project(self, M, c):
        M = np.atleast_2d(M)
        G = M @ self.generators.T
        t, _ = nnls(G, c - M @ self.apex)
        return self.apex + self.generators.T @ t

    def shift(self, b):
        return Cone(self.apex + b, self.generators)

    def as_affine(self):
        k = self.generators.shape[0]
        return self.apex, self.generators.T, np.zeros(k), np.full(k, np.inf)

    def __repr__(self):
        return f"Cone({self.apex.tolist()}, {self.generators.tolist()})"


class FinitePoints(SetDescription):
    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.dim = self.points.shape[1]
        self.is_singleton = self.points.shape[0] == 1

    def project(self, v):
        d = np.linalg.norm(self.points - v, axis=1)
        return self.points[int(np.argmin(d))].copy()

    def image_project(self, M, c):
        d = np.linalg.norm(self.points @ np.atleast_2d(M).T - c, axis=1)
        return self.points[int(np.argmin(d))].copy()

    def shift(self, b):
        return FinitePoints(self.points + b)

    def __repr__(self):
        return f"FinitePoints({self.points.tolist()})"


class SumSet(SetDescription):
    """Minkowski sum of polyhedral descriptions (singleton, box, cone)."""

    def __init__(self, parts):
        parts = list(parts)
        self.dim = parts[0].dim
        self.is_empty = any(p.is_empty for p in parts)
        self.parts = parts
        if not self.is_empty:
            affs = [p.as_affine() for p in parts]
            self._offset = sum(a[0] for a in affs)
            self._M = np.hstack([a[1] for a in affs])
            self._lo = np.concatenate([a[2] for a in affs])
            self._hi = np.concatenate([a[3] for a in affs])
            self.is_singleton = self._M.shape[1] == 0 or bool(np.all(self._lo == self._hi))

    def image_project(self, M, c):
        M = np.atleast_2d(M)
        if self._M.shape[1] == 0:
            return self._offset.copy()
        A = M @ self._M
        rhs = c - M @ self._offset
        if np.all(np.isinf(self._lo)) and np.all(np.isinf(self._hi)):
            u = np.linalg.lstsq(A, rhs, rcond=None)[0]
        else:
            u = lsq_linear(A, rhs, bounds=(self._lo, self._hi), tol=1e-14, method="bvls").x
        return self._offset + self._M @ u

    def project(self, v):
        return self.image_project(np.eye(self.dim), np.asarray(v, dtype=float))

    def shift(self, b):
        return SumSet(self.parts + [Singleton(b)])

    def as_affine(self):
        return self._offset, self._M, self._lo, self._hi

    def __repr__(self):
        return f"SumSet({self.parts!r})"


# ---------------------------------------------------------- operators

class OperatorSpec:
    """Base class of monotone operators ``X =>> X*``."""

    single_valued = False
    name = "operator"

    def __init__(self, space):
        if not isinstance(space, NormedSpace):
            raise TypeError("space must be a NormedSpace")
        self.space = space

    def eval(self, x, tol=BOUNDARY_TOL):
        """Set description of T(x); the empty set outside Dom(T)."""
        raise NotImplementedError

    @property
    def has_resolvent(self):
        return False

    def resolvent(self, v, step):
        """Euclidean resolvent ``(I + step*T)^{-1} v``."""
        raise NotImplementedError(f"{self.name} has no Euclidean resolvent")

    def apply(self, x):
        """Value at ``x`` of a single-valued operator."""
        if not self.single_valued:
            raise TypeError(f"{self.name} is not single-valued")
        return self.eval(x).point

    def anchor(self):
        """Some graph point ``(u, u*)``; used for a priori bounds."""
        u = self.space.zero()
        S = self.eval(u)
        if S.is_empty:
            raise NotImplementedError(f"{self.name} needs an explicit anchor")
        return u, S.select()

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} on R^{self.space.dim}>"


class SubdiffOracle(OperatorSpec):
    """Subdifferential of a proper lsc convex function.

    Parameters
    ----------
    space : NormedSpace
    f : callable
        Function value oracle; returns ``inf`` outside the domain.
    prox : callable
        ``prox(v, s)`` returns argmin_z s*f(z) + 1/2 ||z - v||_2^2.
    subgrad : callable, optional
        Returns one subgradient at a point of the domain.
    subdiff : callable, optional
        Returns the full :class:`SetDescription` of the subdifferential.
        Takes precedence over ``subgrad`` in :meth:`eval`.
    """

    def __init__(self, space, f, prox, subgrad=None, subdiff=None, name="subdiff"):
        super().__init__(space)
        self.f = f
        self._prox = prox
        self._subgrad = subgrad
        self._subdiff = subdiff
        self.name = name

    @property
    def has_resolvent(self):
        return True

    def resolvent(self, v, step):
        return np.asarray(self._prox(np.asarray(v, dtype=float), float(step)), dtype=float)

    prox = resolvent

    def eval(self, x, tol=BOUNDARY_TOL):
        x = self.space.check(x)
        if self._subdiff is not None:
            return self._subdiff(x, tol)
        if not np.isfinite(self.f(x)):
            return EmptySet(self.space.dim)
        if self._subgrad is not None:
            return Singleton(self._subgrad(x))
        raise NotImplementedError(f"{self.name}: no subgradient oracle supplied")


class SingleValuedMap(OperatorSpec):
    """Continuous monotone map given by a callable, optional Jacobian."""

    single_valued = True

    def __init__(self, space, fn, jacobian=None, name="map"):
        super().__init__(space)
        self.fn = fn
        self.jacobian = jacobian
        self.name = name

    def apply(self, x):
        return np.asarray(self.fn(self.space.check(x)), dtype=float).reshape(-1)

    def eval(self, x, tol=BOUNDARY_TOL):
        return Singleton(self.apply(x))


class LinearMap(SingleValuedMap):
    """x -> M x with M + M^T positive semidefinite."""

    def __init__(self, space, matrix, name="linear", psd_tol=1e-10):
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        if M.shape != (space.dim, space.dim):
            raise DimensionError(f"matrix has shape {M.shape}, expected {(space.dim,) * 2}")
        lmin = float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())
        if lmin < -psd_tol:
            raise NonMonotoneError(f"symmetric part has eigenvalue {lmin:.3e} < 0")
        self.matrix = M
        super().__init__(space, lambda x: M @ x, jacobian=lambda x: M, name=name)

    @property
    def has_resolvent(self):
        return True

    def resolvent(self, v, step):
        return np.linalg.solve(np.eye(self.space.dim) + step * self.matrix, v)


class NormalCone(SubdiffOracle):
    """Normal cone to a Euclidean ball or a box.

    Use :meth:`ball` or :meth:`box` to construct.
    """

    def __init__(self, space, kind, a, b, name):
        self.kind = kind
        if kind == "ball":
            self.center = space.check(a, "center")
            self.radius = float(b)
            if not self.radius >= 0:
                raise ValueError("radius must be nonnegative")
            proj, sub, inside = self._ball_proj, self._ball_cone, self._ball_in
        elif kind == "box":
            self.lo = space.check(a, "lo")
            self.hi = space.check(b, "hi")
            if np.any(self.lo > self.hi):
                raise ValueError("box must be nonempty (lo <= hi)")
            proj, sub, inside = self._box_proj, self._box_cone, self._box_in
        else:
            raise ValueError(f"unknown set kind {kind!r}")
        super().__init__(space, lambda x: 0.0 if inside(x) else np.inf,
                         lambda v, s: proj(v), subdiff=sub, name=name)

    @classmethod
    def ball(cls, space, center, radius):
        return cls(space, "ball", center, radius, "indicator_ball")

    @classmethod
    def box(cls, space, lo, hi):
        return cls(space, "box", lo, hi, "indicator_box")

    def project(self, v):
        return self.resolvent(v, 1.0)

    def anchor(self):
        if self.kind == "ball":
            return self.center.copy(), self.space.zero()
        return 0.5 * (self.lo + self.hi), self.space.zero()

    def _ball_in(self, x, tol=BOUNDARY_TOL):
        return np.linalg.norm(x - self.center) <= self.radius * (1 + tol) + tol

    def _ball_proj(self, v):
        d = v - self.center
        n = np.linalg.norm(d)
        if n <= self.radius:
            return np.array(v, dtype=float)
        return self.center + (self.radius / n) * d

    def _ball_cone(self, x, tol):
        d = x - self.center
        n = float(np.linalg.norm(d))
        r = self.radius
        if n > r * (1 + tol) + tol:
            return EmptySet(self.space.dim)
        if r == 0.0:
            full = np.full(self.space.dim, np.inf)
            return Box(-full, full)
        if n < r * (1 - tol) - tol or n == 0.0:
            return Singleton(self.space.zero())
        return Cone(self.space.zero(), [d / n])

    def _box_in(self, x, tol=BOUNDARY_TOL):
        slack = tol * np.maximum(1.0, np.maximum(np.abs(self.lo), np.abs(self.hi)))
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def _box_proj(self, v):
        return np.clip(v, self.lo, self.hi)

    def _box_cone(self, x, tol):
        if not self._box_in(x, tol):
            return EmptySet(self.space.dim)
        slack = tol * np.maximum(1.0, np.maximum(np.abs(self.lo), np.abs(self.hi)))
        at_lo = x <= self.lo + slack
        at_hi = x >= self.hi - slack
        lo = np.where(at_lo, -np.inf, 0.0)
        hi = np.where(at_hi, np.inf, 0.0)
        return Box(lo, hi)


class SampledGraph(OperatorSpec):
    """Finite list of graph pairs ``(y_i, y*_i)``.

    With ``monotone=True`` the pairs are checked to be pairwise
    monotonically related (``NonMonotoneError`` otherwise).
    """

    def __init__(self, space, points, covectors, monotone=False, tol=1e-10, name="graph"):
        super().__init__(space)
        ys = np.atleast_2d(np.asarray(points, dtype=float))
        yss = np.atleast_2d(np.asarray(covectors, dtype=float))
        if space.dim == 1:
            ys = ys.reshape(-1, 1)
            yss = yss.reshape(-1, 1)
        if ys.shape[0] == 0:
            raise ValueError("sampled graph must be nonempty")
        if ys.shape != yss.shape or ys.shape[1] != space.dim:
            raise DimensionError(f"graph arrays have shapes {ys.shape}, {yss.shape}")
        self.points = np.ascontiguousarray(ys)
        self.covectors = np.ascontiguousarray(yss)
        self.name = name
        self.monotone = False
        if monotone:
            gap = kernels.min_pairwise_gap(self.points, self.covectors)
            if gap < -tol:
                raise NonMonotoneError(f"graph is not monotone (min pairwise gap {gap:.3e})")
            self.monotone = True

    @classmethod
    def from_pairs(cls, space, pairs, **kw):
        xs = [np.atleast_1d(np.asarray(a, dtype=float)) for a, _ in pairs]
        ws = [np.atleast_1d(np.asarray(b, dtype=float)) for _, b in pairs]
        return cls(space, xs, ws, **kw)

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return zip(self.points, self.covectors)

    def eval(self, x, tol=BOUNDARY_TOL):
        x = self.space.check(x)
        hit = np.all(np.abs(self.points - x) <= tol * np.maximum(1.0, np.abs(x)), axis=1)
        if not hit.any():
            return EmptySet(self.space.dim)
        return FinitePoints(self.covectors[hit])

    def anchor(self):
        return self.points[0].copy(), self.covectors[0].copy()

    def inverse(self):
        """The inverse relation, a graph on the dual space."""
        dual = NormedSpace(self.space.dim, self.space.q)
        return SampledGraph(dual, self.covectors, self.points, monotone=self.monotone)


# ----------------------------------------------------------- the zoo

def abs_operator(space, center=None):
    """Subdifferential of ``||x - center||_1`` (``|x - c|`` on the line)."""
    c = space.zero() if center is None else space.check(center, "center")

    def f(x):
        return float(np.sum(np.abs(x - c)))

    def prox(v, s):
        d = v - c
        return c + np.sign(d) * np.maximum(np.abs(d) - s, 0.0)

    def subdiff(x, tol):
        d = x - c
        kink = np.abs(d) <= tol * np.maximum(1.0, np.abs(c))
        s = np.sign(d)
        return Box(np.where(kink, -1.0, s), np.where(kink, 1.0, s))

    op = SubdiffOracle(space, f, prox, subgrad=lambda x: np.sign(x - c),
                       subdiff=subdiff, name="abs")
    op.center = c
    op.anchor = lambda: (c.copy(), space.zero())
    return op


def indicator_ball(space, center, radius):
    return NormalCone.ball(space, center, radius)


def indicator_box(space, lo, hi):
    return NormalCone.box(space, lo, hi)


def linear(space, matrix):
    return LinearMap(space, matrix)


def zero(space):
    return LinearMap(space, np.zeros((space.dim, space.dim)), name="zero")


def identity(space):
    return LinearMap(space, np.eye(space.dim), name="identity")


def graph(space, pairs, monotone=True):
    return SampledGraph.from_pairs(space, pairs, monotone=monotone)


# -------------------------------------------------------- diagnostics

def _split(G, z):
    x, xs = z
    return G.space.check(x, "x"), G.space.check(xs, "x*")


def min_monotonicity_gap(G, z):
    """min over the samples of ``<x - y, x* - y*>`` for ``z = (x, x*)``.

    Nonnegative exactly when ``z`` is monotonically related to every
    sample. The sample minimum bounds the true infimum from above.
    """
    if len(G) == 0:
        raise ValueError("empty graph")
    x, xs = _split(G, z)
    return kernels.min_gap(G.points, G.covectors, x, xs)


def is_monotone_graph(G, tol=1e-10):
    """Brute-force O(m^2) check that all sample pairs are monotonically related."""
    return kernels.min_pairwise_gap(G.points, G.covectors) >= -tol
