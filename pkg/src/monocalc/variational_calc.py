"""Variational sums and compositions of monotone operators.

The variational sum of T1 and T2 is the intersection, over parameter
schedules ``(lambda_n, mu_n) -> 0`` with ``lambda_n + mu_n > 0``, of the
lower limits of ``T1_{lambda_n} + T2_{mu_n}``; the variational composition
is the analogous intersection of lower limits of ``A* T_{lambda_n} A``.
Both intersections are approximated by a finite :class:`ScheduleFamily`,
so an accept verdict certifies membership in a superset of the exact
object.
"""
from dataclasses import dataclass, field

import numpy as np

from .limit_probe import (ACCEPT, INCONCLUSIVE, NESTED_TOL_RATIO, REJECT, Schedule,
                          liminf_probe)
from .normed_space import DimensionError
from .operator_core import (BOUNDARY_TOL, EmptySet, OperatorSpec, Singleton,
                            SingleValuedMap, SumSet)
from .resolvent_engine import DEFAULT_MAX_ITER, DEFAULT_TOL, Yosida

__all__ = [
    "LinearOp", "ScheduleFamily", "MultivaluedEndpointError", "RegularizedSum",
    "Composition", "LiftSet", "VariationalReport", "regularized_sum_eval",
    "variational_sum_probe", "lift_eval", "variational_composition_probe",
    "pointwise_sum_contains", "merge_verdicts",
]


class MultivaluedEndpointError(ValueError):
    """A zero regularization parameter was used where the operator is multivalued."""


@dataclass(frozen=True)
class LinearOp:
    """Linear map ``A: Y -> X`` stored as an ``(dim X, dim Y)`` matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "matrix", M)

    @property
    def shape(self):
        return self.matrix.shape

    def __call__(self, y):
        return self.matrix @ np.asarray(y, dtype=float)

    def adjoint(self, xs):
        return self.matrix.T @ np.asarray(xs, dtype=float)


class ScheduleFamily(list):
    """Nonempty list of schedules of one class.

    ``kind="pair"`` for variational sums, ``kind="lambda"`` for
    compositions.
    """

    def __init__(self, schedules, kind):
        super().__init__(schedules)
        if not self:
            raise ValueError("schedule family must be nonempty")
        for s in self:
            if s.kind != kind:
                raise ValueError(f"expected {kind} schedules, got {s.kind}")
        self.kind = kind

    # lengths end near the smallest parameter that double precision resolves:
    # pair residuals can decay like lambda**(1/3), composition residuals like lambda
    PAIR_DEFAULTS = ((0.5, 45), (0.3, 26), (0.7, 85))
    LAMBDA_DEFAULTS = ((0.5, 30), (0.3, 18), (0.7, 58))

    @classmethod
    def default_pairs(cls):
        return cls([Schedule.pair(1.0, 1.0, d, N) for d, N in cls.PAIR_DEFAULTS], "pair")

    @classmethod
    def default_lambdas(cls):
        return cls([Schedule.lam(1.0, d, N) for d, N in cls.LAMBDA_DEFAULTS], "lambda")


def _term(T, lam, tol, max_iter):
    return Yosida(T, lam, tol, max_iter) if lam > 0 else T


class RegularizedSum(OperatorSpec):
    """``T1_lam + T2_mu``; a zero parameter keeps the operator itself."""

    def __init__(self, T1, T2, lam, mu, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        if T1.space != T2.space:
            raise DimensionError("operators live on different spaces")
        if lam < 0 or mu < 0:
            raise ValueError("regularization parameters must be nonnegative")
        super().__init__(T1.space)
        self.operands = (T1, T2)
        self.params = (float(lam), float(mu))
        self.terms = (_term(T1, lam, tol, max_iter), _term(T2, mu, tol, max_iter))
        self.single_valued = all(t.single_valued for t in self.terms)
        self.name = f"{T1.name}_{lam:g}+{T2.name}_{mu:g}"

    def eval(self, x, tol=BOUNDARY_TOL):
        sets = [t.eval(x, tol) for t in self.terms]
        if any(s.is_empty for s in sets):
            return EmptySet(self.space.dim)
        if all(isinstance(s, Singleton) for s in sets):
            return Singleton(sets[0].point + sets[1].point)
        return SumSet(sets)

    def split(self):
        multi = [t for t in self.terms if not t.single_valued]
        smooth = [t for t in self.terms if t.single_valued]
        if len(multi) > 1:
            raise TypeError("both terms multivalued: at least one parameter must be positive")
        if multi and not multi[0].has_resolvent:
            raise TypeError(f"{multi[0].name} has no resolvent")
        return (multi[0] if multi else None), [t.apply for t in smooth]

    def anchor(self):
        u = self.space.zero()
        S = self.eval(u)
        if S.is_empty:
            raise NotImplementedError("no anchor at the origin")
        return u, S.select()


def regularized_sum_eval(T1, T2, lam, mu, x, tol=DEFAULT_TOL):
    """Value of ``T1_lam(x) + T2_mu(x)`` (a single covector).

    An operator with a zero parameter enters unregularized and must be
    single-valued at ``x``; otherwise :class:`MultivaluedEndpointError`
    names it.
    """
    out = np.zeros(T1.space.dim)
    for T, p in ((T1, lam), (T2, mu)):
        if p > 0:
            out += Yosida(T, p, tol).apply(x)
            continue
        S = T.eval(x)
        if S.is_empty or not S.is_singleton:
            raise MultivaluedEndpointError(
                f"{T.name} is {'undefined' if S.is_empty else 'multivalued'} at "
                f"{np.asarray(x).tolist()}; a zero parameter needs a single value")
        out += S.select()
    return out


def pointwise_sum_contains(T1, T2, x, xs, tol=1e-9):
    """Membership of ``x*`` in the Minkowski sum ``T1(x) + T2(x)``."""
    sets = [T1.eval(x), T2.eval(x)]
    if any(s.is_empty for s in sets):
        return False
    return SumSet(sets).contains(xs, tol)


def merge_verdicts(verdicts):
    """Accept iff every schedule accepts, reject iff some schedule rejects."""
    if any(v == REJECT for v in verdicts):
        return REJECT
    if verdicts and all(v == ACCEPT for v in verdicts):
        return ACCEPT
    return INCONCLUSIVE


@dataclass
class VariationalReport:
    """Per-schedule probe reports and their merged verdict."""

    reports: list
    schedules: list
    verdict: str
    diagnostics: list = field(default_factory=list)


def variational_sum_probe(T1, T2, z, fam=None, tol_accept=1e-4, tol_reject=1e-2,
                          tol_solver=None, tol_inner=None, max_iter=DEFAULT_MAX_ITER):
    """Probe ``z`` against the variational sum of T1 and T2.

    Each pair schedule yields a lower-limit probe of
    ``n -> T1_{lambda_n} + T2_{mu_n}``.
    """
    fam = ScheduleFamily.default_pairs() if fam is None else fam
    if getattr(fam, "kind", "pair") != "pair":
        raise ValueError("variational sums need pair schedules")
    tol_solver = NESTED_TOL_RATIO * tol_accept if tol_solver is None else tol_solver
    tol_inner = NESTED_TOL_RATIO * tol_solver if tol_inner is None else tol_inner
    reports = []
    for s in fam:
        lams, mus = s.values(), s.second_values()

        def seq(n, lams=lams, mus=mus):
            return RegularizedSum(T1, T2, lams[n - 1], mus[n - 1], tol_inner, max_iter)

        reports.append(liminf_probe(seq, z, s, tol_accept, tol_reject, tol_solver, max_iter))
    return VariationalReport(reports, list(fam), merge_verdicts([r.verdict for r in reports]))


class Composition(SingleValuedMap):
    """``A* T_lam A`` on Y, single-valued and everywhere defined."""

    def __init__(self, T, A, lam, space_y, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        if A.shape != (T.space.dim, space_y.dim):
            raise DimensionError(f"A has shape {A.shape}, expected {(T.space.dim, space_y.dim)}")
        self.outer = T
        self.A = A
        self.lam = float(lam)
        self.reg = Yosida(T, lam, tol, max_iter)
        super().__init__(space_y, lambda y: A.adjoint(self.reg.apply(A(y))),
                         name=f"A*{T.name}_{lam:g}A")

    def anchor(self):
        u = self.space.zero()
        return u, self.apply(u)


class LiftSet:
    """``(T# + N_A)(y, Ay) = {(A* u, w - u) : u in X* free, w in T(Ay)}``.

    Only defined on the graph of A; see :func:`lift_eval`.
    """

    def __init__(self, A, fiber, y):
        self.A = A
        self.fiber = fiber  # T(Ay)
        self.y = y
        self.is_empty = fiber.is_empty

    def distance(self, ys, xs_part):
        """Euclidean distance in Y* of the best element with X*-part ``xs_part``."""
        if self.is_empty:
            return np.inf
        c = np.asarray(ys, dtype=float) + self.A.adjoint(xs_part)
        w = self.fiber.image_project(self.A.matrix.T, c)
        return float(np.linalg.norm(self.A.adjoint(w) - c))

    def contains(self, ys, xs_part, tol=1e-9):
        c = np.asarray(ys, dtype=float) + self.A.adjoint(xs_part)
        return self.distance(ys, xs_part) <= tol * max(1.0, float(np.linalg.norm(c)))

    def extract_ystar(self, hint):
        """A ``y*`` with ``(y*, 0)`` in the lift, the one closest to ``hint``.

        For single-valued T this is ``A* T(Ay)`` regardless of the hint.
        """
        if self.is_empty:
            raise ValueError("lift is empty at this point")
        w = self.fiber.image_project(self.A.matrix.T, np.asarray(hint, dtype=float))
        return self.A.adjoint(w)


class _EmptyLift(LiftSet):
    def __init__(self, A, dim):
        super().__init__(A, EmptySet(dim), None)


def lift_eval(T, A, y, x, tol=BOUNDARY_TOL):
    """Evaluate ``T# + N_A`` on ``Y x X`` at ``(y, x)``.

    Empty off the graph of A. ``(y*, 0)`` belongs to the result exactly
    when ``y*`` belongs to ``A* T A (y)``.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    x = T.space.check(x, "x")
    if A.shape != (T.space.dim, y.shape[0]):
        raise DimensionError(f"A has shape {A.shape}, expected {(T.space.dim, y.shape[0])}")
    Ay = A(y)
    if np.linalg.norm(x - Ay) > 1e-12 * max(1.0, np.linalg.norm(Ay)):
        return _EmptyLift(A, T.space.dim)
    return LiftSet(A, T.eval(Ay, tol), y)


def variational_composition_probe(T, A, z, space_y, fam=None, tol_accept=1e-4,
                                  tol_reject=1e-2, tol_solver=None, tol_inner=None,
                                  max_iter=DEFAULT_MAX_ITER, cross_check=True):
    """Probe ``z = (y, y*)`` against the variational composition ``(A* T A)_v``.

    With ``cross_check`` every step also recomputes ``A* T_lam A`` at the
    iterate through :func:`lift_eval` and records any disagreement beyond
    the inner tolerance; a disagreement makes the schedule inconclusive.
    """
    fam = ScheduleFamily.default_lambdas() if fam is None else fam
    if getattr(fam, "kind", "lambda") != "lambda":
        raise ValueError("variational compositions need lambda schedules")
    tol_solver = NESTED_TOL_RATIO * tol_accept if tol_solver is None else tol_solver
    tol_inner = NESTED_TOL_RATIO * tol_solver if tol_inner is None else tol_inner
    reports = []
    diagnostics = []
    for s in fam:
        lams = s.values()
        made = {}

        def seq(n, lams=lams, made=made):
            C = Composition(T, A, lams[n - 1], space_y, tol_inner, max_iter)
            made[n] = C
            return C

        rep = liminf_probe(seq, z, s, tol_accept, tol_reject, tol_solver, max_iter)
        if cross_check and rep.residuals:
            worst = 0.0
            for n, yn in enumerate(rep.iterates, start=1):
                C = made[n]
                direct = C.apply(yn)
                lift = lift_eval(C.reg, A, yn, A(yn))
                other = lift.extract_ystar(direct)
                err = float(np.linalg.norm(direct - other)) / max(1.0, float(np.linalg.norm(direct)))
                worst = max(worst, err)
            if worst > tol_solver:
                rep.diagnostics.append(f"lift cross-check disagreement {worst:.3e}")
                rep.verdict = INCONCLUSIVE
            rep.diagnostics.append(f"lift cross-check max relative gap {worst:.3e}")
        reports.append(rep)
    return VariationalReport(reports, list(fam), merge_verdicts([r.verdict for r in reports]),
                             diagnostics)
