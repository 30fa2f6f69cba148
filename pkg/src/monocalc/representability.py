"""Fitzpatrick functions of sampled graphs and representability certificates.

For a finite monotone sample G = {(y_i, y*_i)} the Fitzpatrick function is a
maximum of finitely many affine functions, and the conjugate of the
Fitzpatrick function of the inverse relation is the polyhedral function

    h(x, x*) = min { sum_i mu_i <y_i, y*_i> : sum_i mu_i (y_i, y*_i) = (x, x*),
                     mu in the unit simplex }

(+inf outside the convex hull of G). One checks h - pi = 1/2 sum_ij mu_i mu_j
<y_i - y_j, y*_i - y*_j> >= 0 for monotone samples, with equality on G.
"""
import hashlib
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .operator_core import NonMonotoneError, is_monotone_graph

__all__ = ["fitzpatrick_value", "fitzpatrick_values", "representative_value",
           "GridSpec", "CertificateReport", "certify_representative", "graph_hash"]

LP_FEAS_TOL = 1e-9


def _z(G, z):
    x, xs = z
    return G.space.check(x, "x"), G.space.check(xs, "x*")


def fitzpatrick_value(G, z):
    """Sample Fitzpatrick function ``max_i <y_i, x*> + <x, y*_i> - <y_i, y*_i>``."""
    if len(G) == 0:
        raise ValueError("empty graph")
    x, xs = _z(G, z)
    return kernels.fitz_max(G.points, G.covectors, x, xs)


def fitzpatrick_values(G, X, XS):
    """Vectorised :func:`fitzpatrick_value` over rows of ``X`` and ``XS``."""
    X = np.atleast_2d(np.asarray(X, dtype=float)).reshape(-1, G.space.dim)
    XS = np.atleast_2d(np.asarray(XS, dtype=float)).reshape(-1, G.space.dim)
    return kernels.fitz_max_many(G.points, G.covectors, X, XS)


def representative_value(G, z):
    """Conjugate of the sample Fitzpatrick function of the inverse, at ``z``.

    Solved as a linear program over convex weights; returns ``inf`` when
    ``z`` lies outside the convex hull of the samples.
    """
    x, xs = _z(G, z)
    target = np.concatenate([x, xs])
    pts = np.hstack([G.points, G.covectors])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    slack = LP_FEAS_TOL * np.maximum(1.0, np.abs(target))
    if np.any(target < lo - slack) or np.any(target > hi + slack):
        return np.inf
    cost = np.einsum("ij,ij->i", G.points, G.covectors)
    A_eq = np.vstack([pts.T, np.ones(len(G))])
    b_eq = np.append(target, 1.0)
    res = None
    for method in ("highs-ds", "highs-ipm"):
        res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method=method,
                      options={"primal_feasibility_tolerance": 1e-10,
                               "dual_feasibility_tolerance": 1e-10})
        if res.status == 2:
            return np.inf
        if res.status == 0 and np.max(np.abs(A_eq @ res.x - b_eq)) <= LP_FEAS_TOL:
            return float(cost @ res.x)
    # degenerate instance: neither method met the feasibility tolerance
    raise ArithmeticError(f"LP for representative value did not converge ({res.message})")


def graph_hash(G):
    """SHA-256 of the sample arrays (float64, little endian)."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(G.points, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(G.covectors, dtype="<f8").tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid ``[lo, hi]`` with spacing ``step`` on every axis of X x X*."""

    lo: float = -2.0
    hi: float = 2.0
    step: float = 0.1

    def __post_init__(self):
        if not (self.step > 0 and self.hi >= self.lo):
            raise ValueError("grid needs step > 0 and hi >= lo")

    def axis(self):
        k = int(round((self.hi - self.lo) / self.step))
        return self.lo + self.step * np.arange(k + 1)

    def points(self, dim):
        """All grid points as two arrays (x part, x* part) of shape (M, dim)."""
        ax = self.axis()
        full = np.array(list(itertools.product(ax, repeat=2 * dim)))
        return full[:, :dim], full[:, dim:]

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi, "step": self.step}


@dataclass
class CertificateReport:
    """Sample-level certificate that h >= pi with equality on the graph."""

    min_slack: float
    equality_points: np.ndarray
    violations: np.ndarray
    status: str
    grid: GridSpec
    graph_hash: str
    n_infinite: int = 0
    graph_equality: bool = True
    n_grid_equality: int = 0
    notes: list = field(default_factory=list)

    def coverage(self, G):
        """Largest distance from a graph sample to the nearest grid equality point."""
        grid_eq = self.equality_points[:self.n_grid_equality]
        if len(grid_eq) == 0:
            return np.inf
        pts = np.hstack([G.points, G.covectors])
        d = np.linalg.norm(pts[:, None, :] - grid_eq[None, :, :], axis=2)
        return float(d.min(axis=1).max())

    def to_json(self):
        return {
            "status": self.status,
            "min_slack": self.min_slack,
            "n_equality": int(len(self.equality_points)),
            "n_violations": int(len(self.violations)),
            "grid_spec": self.grid.to_dict(),
            "graph_hash": self.graph_hash,
        }


def certify_representative(G, grid=None, tol=1e-8):
    """Evaluate h on a grid over X x X* and on the samples themselves.

    Raises :class:`NonMonotoneError` when G is not monotone. The status is
    ``"pass"`` when no point has ``h < pi - tol`` and every sample
    satisfies ``|h - pi| <= tol``.
    """
    if not is_monotone_graph(G):
        raise NonMonotoneError("certification needs a monotone sample")
    grid = GridSpec() if grid is None else grid
    gx, gxs = grid.points(G.space.dim)
    X = np.vstack([gx, G.points])
    XS = np.vstack([gxs, G.covectors])
    pi = np.einsum("ij,ij->i", X, XS)
    h = np.array([representative_value(G, (a, b)) for a, b in zip(X, XS)])
    finite = np.isfinite(h)
    slack = np.where(finite, h - pi, np.inf)
    scale = np.maximum(1.0, np.abs(pi))
    eq = finite & (np.abs(slack) <= tol * scale)
    bad = slack < -tol * scale
    m = gx.shape[0]
    graph_eq = bool(np.all(eq[m:]))
    both = np.hstack([X, XS])
    report = CertificateReport(
        min_slack=float(slack[finite].min()) if finite.any() else np.inf,
        equality_points=both[eq],
        violations=both[bad],
        status="pass" if (not bad.any() and graph_eq) else "fail",
        grid=grid,
        graph_hash=graph_hash(G),
        n_infinite=int((~finite).sum()),
        graph_equality=graph_eq,
        n_grid_equality=int(eq[:m].sum()),
    )
    if not graph_eq:
        report.notes.append("some samples have h != pi")
    return report
