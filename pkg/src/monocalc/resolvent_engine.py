"""Generalized resolvents and Moreau-Yosida regularization.

Every solve in this module is an instance of the inclusion

    x* in lam * T(z) + J(z - x)                                    (*)

The Moreau-Yosida system is (*) with ``x* = 0``; the translated inclusion
used by the lower-limit probe is (*) with ``lam = 1``.

Solver selection
----------------
* J is the identity and T has a Euclidean resolvent: closed form,
  ``z = (I + lam T)^{-1}(x + x*)``.
* one dimension: the scalar equation is strictly increasing with slope at
  least one, so the root is bracketed a priori and found by Brent's method.
* otherwise: damped Newton with a Levenberg-Marquardt fallback, either on
  the single-valued residual or, when T carries a resolvent, on the normal
  map ``v -> (v - R(v)) + J(R(v) - x) - x*``. Iterates of the normal map
  always produce an exact selection of T at ``z = R(v)``.

For p < 2 the Newton variable is ``w = J(z - x)`` instead of z, since J is
not Lipschitz where a coordinate of ``z - x`` vanishes.

Residuals are reported relative to the size of the terms before any
cancellation: with ``lam t = sum_k a_k`` split into the pieces of T,
``||lam t + w - x*||_q / || sum_k |a_k| + |w| + |x*| ||_q`` (absolute when
every term vanishes). There is no absolute floor, so the Moreau-Yosida
system keeps its relative accuracy when ``lam`` is small.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .operator_core import BOUNDARY_TOL, SampledGraph, SingleValuedMap

__all__ = [
    "InclusionSolution", "SolverFailure", "solve_inclusion", "solve_my_system",
    "moreau_yosida", "solve_translated_inclusion", "verify_solution",
    "Yosida", "sample_graph", "DEFAULT_TOL", "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000

_CBRT_EPS = np.cbrt(np.finfo(float).eps)


@dataclass(frozen=True)
class InclusionSolution:
    """Solution of ``x* in lam T(z) + J(z - x)``.

    ``t_star`` is the selected element of T(z). ``w_star`` is defined as
    ``x* - lam t_star``, so the decomposition is exact as stored; it agrees
    with ``J(z - x)`` up to the residual and is an element of ``J_eps(z - x)``
    for small ``eps``.
    """

    z: np.ndarray
    t_star: np.ndarray
    w_star: np.ndarray
    residual: float
    iterations: int
    x: np.ndarray
    x_star: np.ndarray
    lam: float


class SolverFailure(RuntimeError):
    """The iteration budget ran out before the residual dropped below tol."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best
        self.best_residual = best.residual if best is not None else np.inf


def _scale(space, mag, w, xs):
    s = space.dual_norm(mag + np.abs(w) + np.abs(xs))
    return s if s > 0 else 1.0


def _relres(space, lt, w, xs, mag=None):
    mag = np.abs(lt) if mag is None else mag
    return space.dual_norm(lt + w - xs) / _scale(space, mag, w, xs)


def _parts(T):
    """(multivalued part with resolvent or None, list of single-valued callables)."""
    if hasattr(T, "split"):
        return T.split()
    if T.single_valued:
        return None, [T.apply]
    if T.has_resolvent:
        return T, []
    raise TypeError(f"cannot solve inclusions for {T!r}")


def solve_inclusion(T, x, x_star, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, z0=None,
                    polish=False):
    """Solve (*) for z; raises :class:`SolverFailure` on a missed tolerance.

    With ``polish`` the iterative solvers continue until they stop making
    progress instead of stopping just below ``tol``; used where the result
    feeds finite differences of an outer solve.
    """
    if isinstance(T, SampledGraph):
        raise TypeError("inclusions over a finite sample are not solvable; "
                        "use a maximal operator")
    sp = T.space
    x = sp.check(x, "x")
    xs = sp.check(x_star, "x*")
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")

    def finish(z, t, mag, its, d=None):
        # d is the solver's own displacement z - x when it tracks one; recomputing
        # it from z would cancel digits once z is close to x
        w = sp.duality_map(z - x if d is None else d)
        res = _relres(sp, lam * t, w, xs, lam * mag)
        return InclusionSolution(z, t, xs - lam * t, res, its, x, xs, lam)

    P, G = _parts(T)

    if sp.is_hilbert and not G:
        v = x + xs
        z = P.resolvent(v, lam)
        t = T.apply(z) if T.single_valued else (v - z) / lam
        sol = finish(z, t, np.abs(t), 1)
    elif sp.dim == 1:
        sol = _solve_scalar(P, G, x, xs, lam, finish, z0)
    elif sp.p < 2:
        sol = _solve_newton_dual(sp, P, G, x, xs, lam, tol, max_iter, finish, z0, polish)
    else:
        sol = _solve_newton(sp, P, G, x, xs, lam, tol, max_iter, finish, z0, polish)

    if not np.isfinite(sol.residual) or sol.residual > tol:
        raise SolverFailure(
            f"residual {sol.residual:.3e} above tol {tol:.1e} after {sol.iterations} "
            f"iterations ({T.name})", sol)
    return sol


def _selection(P, G, v, lam):
    """z, the element of T(z) generated by the (normal-map) variable v, and
    the componentwise magnitude of its pieces."""
    if P is None:
        z = v
        t = np.zeros_like(v)
    else:
        z = P.resolvent(v, lam)
        t = (v - z) / lam
    mag = np.abs(t)
    for g in G:
        gz = g(z)
        t = t + gz
        mag = mag + np.abs(gz)
    return z, t, mag


def _solve_scalar(P, G, x, xs, lam, finish, z0):
    c = float(x[0] + xs[0])

    def phi(v):
        z, t, _ = _selection(P, G, np.array([v]), lam)
        # J is the identity on the line
        return float(lam * t[0] + z[0] - c)

    v0 = c if (z0 is None or P is not None) else float(z0[0])
    f0 = phi(v0)
    its = 1
    if f0 == 0.0:
        v = v0
    else:
        # slope >= 1, so the root lies within |phi(v0)| of v0
        span = abs(f0) * (1 + 1e-9) + 1e-300
        a, b = (v0 - span, v0) if f0 > 0 else (v0, v0 + span)
        fa = phi(a) if f0 > 0 else f0
        fb = f0 if f0 > 0 else phi(b)
        while fa > 0 or fb < 0:
            span *= 2
            a, b = (v0 - span, v0) if f0 > 0 else (v0, v0 + span)
            fa, fb = phi(a), phi(b)
        if fa == 0.0:
            v = a
        elif fb == 0.0:
            v = b
        else:
            v, info = brentq(phi, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                             maxiter=500, full_output=True, disp=False)
            its += info.function_calls
        cands = [v, np.nextafter(v, -np.inf), np.nextafter(v, np.inf)]
        v = min(cands, key=lambda u: abs(phi(u)))
    z, t, mag = _selection(P, G, np.array([v]), lam)
    return finish(z, t, mag, its)


def _solve_newton(sp, P, G, x, xs, lam, tol, max_iter, finish, z0, polish=False):
    """Newton in the normal-map variable, or in ``d = z - x`` when T is single-valued."""
    if P is None:
        def phi(d):
            z, t, mag = _selection(P, G, x + d, lam)
            w = sp.duality_map(d)
            F = lam * t + w - xs
            return F, sp.dual_norm(F) / _scale(sp, lam * mag, w, xs)

        d0 = sp.zero() if z0 is None else sp.check(z0, "z0") - x
        d, its = _newton(phi, d0, tol, max_iter, polish)
        z, t, mag = _selection(P, G, x + d, lam)
        return finish(z, t, mag, its, d)

    def phi(v):
        z, t, mag = _selection(P, G, v, lam)
        w = sp.duality_map(z - x)
        F = lam * t + w - xs
        return F, sp.dual_norm(F) / _scale(sp, lam * mag, w, xs)

    if z0 is None:
        v0 = x + xs
    else:
        z0 = sp.check(z0, "z0")
        # normal-map variable consistent with z0 at an exact solution
        v0 = z0 + xs - sp.duality_map(z0 - x) - lam * sum((g(z0) for g in G), 0.0)
    v, its = _newton(phi, v0, tol, max_iter, polish)
    z, t, mag = _selection(P, G, v, lam)
    return finish(z, t, mag, its)


def _solve_newton_dual(sp, P, G, x, xs, lam, tol, max_iter, finish, z0, polish=False):
    """Newton in the dual variable ``w = J(z - x)`` for ``p < 2``.

    J is only Hoelder continuous where a coordinate of ``z - x`` vanishes,
    which stalls Newton in z; its inverse, the duality map of the dual
    space (exponent q > 2), is continuously differentiable. With a
    multivalued part the natural map ``z - R(z + s)``,
    ``s = x* - w - lam sum G(z)``, is driven to zero, and the reported
    point is the exact selection at ``R(z + s)``.
    """
    def point(w):
        z = x + sp.dual_duality_map(w)
        gz = [g(z) for g in G]
        s = xs - w - lam * sum(gz, np.zeros(sp.dim))
        return z, s, gz

    def phi(w):
        z, s, gz = point(w)
        if P is None:
            mag = sum((np.abs(v) for v in gz), np.zeros(sp.dim))
            return -s, sp.dual_norm(s) / _scale(sp, lam * mag, w, xs)
        zr, t, mag = _selection(P, G, z + s, lam)
        return z - zr, _relres(sp, lam * t, sp.duality_map(zr - x), xs, lam * mag)

    if z0 is None:
        zg = P.resolvent(x + xs, lam) if P is not None else x
    else:
        zg = sp.check(z0, "z0")
    w, its = _newton(phi, sp.duality_map(zg - x), tol, max_iter, polish)
    z, s, gz = point(w)
    if P is None:
        t = sum(gz, np.zeros(sp.dim))
        mag = sum((np.abs(v) for v in gz), np.zeros(sp.dim))
        return finish(z, t, mag, its, sp.dual_duality_map(w))
    z, t, mag = _selection(P, G, z + s, lam)
    return finish(z, t, mag, its)


def _fd_jacobian(phi, v, F):
    """Central differences; ``phi`` may itself come from a nested solve."""
    n = v.shape[0]
    Jm = np.empty((F.shape[0], n))
    # steps follow the size of the iterate: the dual variable can be tiny
    vmax = float(np.max(np.abs(v)))
    typ = vmax if vmax > 0 else 1.0
    for i in range(n):
        h = _CBRT_EPS * max(typ, abs(v[i]))
        e = v.copy()
        e[i] += h
        Fp = phi(e)[0]
        e[i] = v[i] - h
        Jm[:, i] = (Fp - phi(e)[0]) / (2.0 * h)
    return Jm


def _directions(Jm, F, tol_met):
    """Newton direction, then Levenberg-Marquardt directions of growing damping.

    LM is skipped once the residual already meets the tolerance: a failed
    Newton line search there means the noise floor has been reached.
    """
    try:
        yield np.linalg.solve(Jm, -F), 1e-8
    except np.linalg.LinAlgError:
        pass
    if tol_met:
        return
    JtJ = Jm.T @ Jm
    g = Jm.T @ F
    mu = 1e-8 * max(1.0, np.trace(JtJ))
    for _ in range(10):
        yield np.linalg.solve(JtJ + mu * np.eye(len(F)), -g), 0.1
        mu *= 30.0


def _newton(phi, v, tol, max_iter, polish=False):
    """Damped Newton on ``phi(v) = (F, rel)``.

    ``F`` drives the steps (merit ``||F||_2``); ``rel`` is the relative
    residual of the inclusion, used for termination. With ``polish`` the
    iteration runs until the merit stops decreasing.
    """
    F, rel = phi(v)
    nf = float(np.linalg.norm(F))
    # aim below tol so an independent re-check has room
    target = 1e-2 * tol
    it = 0
    while it < max_iter and (rel > target or polish):
        it += 1
        Jm = _fd_jacobian(phi, v, F)
        moved = False
        # polishing past the target only takes steps that keep fast convergence
        fast = rel <= target
        for d, tmin in _directions(Jm, F, rel <= tol):
            if not np.all(np.isfinite(d)):
                continue
            t = 1.0
            while t >= (0.25 if fast else tmin):
                vn = v + t * d
                Fn, rn = phi(vn)
                nn = float(np.linalg.norm(Fn))
                if nn < 0.5 * nf if fast else nn <= (1.0 - 1e-4 * t) * nf:
                    moved = True
                    break
                t *= 0.5
            if moved:
                break
        if not moved:
            # the Jacobian is deterministic, so retrying from v cannot help
            break
        v, F, rel, nf = vn, Fn, rn, nn
    return v, it


def solve_my_system(T, x, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, z0=None,
                    polish=False):
    """Resolvent system ``0 in lam T(z) + J(z - x)``.

    Returns the solution with ``t_star`` in T(z) and ``w_star = -lam t_star``,
    which equals ``J(z - x)`` up to the residual.
    """
    return solve_inclusion(T, x, T.space.zero(), lam, tol, max_iter, z0, polish)


def moreau_yosida(T, lam, x, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Moreau-Yosida regularization ``T_lam(x) = J(x - R_lam(x)) / lam``."""
    sol = solve_my_system(T, x, lam, tol, max_iter)
    return T.space.duality_map(sol.x - sol.z) / lam


def solve_translated_inclusion(T, x, x_star, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                               z0=None):
    """Exact solution of ``x* in T(z) + J(z - x)``.

    The exact solution is in particular an eps-solution for every eps >= 0.
    """
    return solve_inclusion(T, x, x_star, 1.0, tol, max_iter, z0)


def verify_solution(T, sol, tol=BOUNDARY_TOL):
    """Recompute the residual of ``sol`` from scratch.

    T is re-evaluated at ``z`` and the distance from
    ``(x* - J(z - x)) / lam`` to T(z) is measured, relative as in the
    solvers. Returns ``inf`` when ``z`` falls outside Dom(T).
    """
    sp = T.space
    S = T.eval(sol.z, tol)
    if S.is_empty:
        return np.inf
    w = sp.duality_map(sol.z - sol.x)
    target = (sol.x_star - w) / sol.lam
    s = S.project(target)
    mag = np.abs(s)
    if hasattr(T, "split"):
        # magnitudes of the pieces, as in the solver's scaling
        _, G = T.split()
        single = sum((g(sol.z) for g in G), np.zeros(sp.dim))
        mag = np.abs(s - single) + sum((np.abs(g(sol.z)) for g in G), np.zeros(sp.dim))
    return _relres(sp, sol.lam * s, w, sol.x_star, sol.lam * mag)


class Yosida(SingleValuedMap):
    """The Moreau-Yosida regularization ``T_lam`` as an operator.

    Single-valued and everywhere defined. When J is the identity and T has
    a Euclidean resolvent, so does ``T_lam``, through the identity
    ``(I + s T_lam)^{-1} v = v + s/(lam + s) * ((I + (lam + s) T)^{-1} v - v)``.
    """

    def __init__(self, T, lam, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        if not lam > 0:
            raise ValueError(f"lam must be positive, got {lam}")
        self.base = T
        self.lam = float(lam)
        self.tol = tol
        self.max_iter = max_iter
        self._closed = T.space.is_hilbert and T.has_resolvent
        self._last = None
        super().__init__(T.space, self._value, name=f"{T.name}_yosida")

    def _value(self, x):
        if self._closed:
            z = self.base.resolvent(x, self.lam)
        else:
            # outer solvers call this at nearby points, so warm-start the inner
            # solve; polished so that outer finite differences see no solver noise
            z = solve_my_system(self.base, x, self.lam, self.tol, self.max_iter, z0=self._last,
                                polish=True).z
            self._last = z
        if isinstance(self.base, SingleValuedMap):
            # T_lam(x) = T(R_lam x) avoids cancellation in x - R_lam x for small lam
            return self.base.apply(z)
        return self.space.duality_map(x - z) / self.lam

    @property
    def has_resolvent(self):
        return self._closed

    def resolvent(self, v, step):
        if not self._closed:
            return super().resolvent(v, step)
        v = np.asarray(v, dtype=float)
        lam = self.lam
        return v + (step / (lam + step)) * (self.base.resolvent(v, lam + step) - v)

    def anchor(self):
        u = self.space.zero()
        return u, self.apply(u)


def sample_graph(T, xs, lam=1.0, tol=DEFAULT_TOL, monotone=False):
    """Graph points ``(R_lam(x), T_lam(x))`` of T, one per row of ``xs``.

    Each pair lies on the graph of T, so this samples any maximal monotone
    operator, including its kinks and boundary faces.
    """
    pts, cov = [], []
    for x in np.atleast_2d(np.asarray(xs, dtype=float)):
        sol = solve_my_system(T, x, lam, tol)
        pts.append(sol.z)
        cov.append(sol.t_star)
    return SampledGraph(T.space, pts, cov, monotone=monotone, name=f"{T.name}_samples")
