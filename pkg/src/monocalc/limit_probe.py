"""Membership probes for the sequential lower limit of monotone operators.

A pair ``(x, x*)`` belongs to ``liminf T_n`` exactly when the solutions
``x_n`` of ``x* in T_n(x_n) + J(x_n - x)`` converge to ``x``. The probe
runs this for finitely many ``n`` and turns the residuals
``r_n = ||x_n - x||`` into a three-valued verdict.
"""
from dataclasses import dataclass, field

import numpy as np

from .resolvent_engine import DEFAULT_MAX_ITER, SolverFailure, solve_translated_inclusion

__all__ = ["Schedule", "ProbeReport", "liminf_probe", "verdict_of",
           "ACCEPT", "REJECT", "INCONCLUSIVE", "TAIL_WINDOW"]

ACCEPT, REJECT, INCONCLUSIVE = "accept", "reject", "inconclusive"
TAIL_WINDOW = 5
#: inner solves run this factor below the tolerance of the level above
NESTED_TOL_RATIO = 1e-2


@dataclass(frozen=True)
class Schedule:
    """Geometric parameter sequence ``first * decay**(n - 1)``, n = 1..N.

    ``kind`` is ``"eps"`` (probe slack), ``"lambda"`` (regularization
    parameters tending to 0+) or ``"pair"`` (``lambda_n, mu_n`` for
    variational sums, where ``second`` is ``mu0``). In pair schedules one of
    the two sequences may vanish identically only if ``allow_zero`` is set.
    """

    kind: str
    first: float
    decay: float = 0.5
    N: int = 30
    second: float = None
    allow_zero: bool = False

    def __post_init__(self):
        if self.kind not in ("eps", "lambda", "pair"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not (0.0 < self.decay < 1.0):
            raise ValueError(f"decay must lie in (0, 1), got {self.decay}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        vals = [self.first] + ([self.second] if self.kind == "pair" else [])
        if not all(v is not None and np.isfinite(v) for v in vals):
            raise ValueError("schedule values must be finite numbers")
        if self.kind == "pair":
            if min(vals) < 0 or sum(vals) <= 0:
                raise ValueError("pair schedules need lambda0, mu0 >= 0 and lambda0 + mu0 > 0")
            if min(vals) == 0 and not self.allow_zero:
                raise ValueError("a vanishing pair component requires allow_zero=True")
        elif self.first <= 0:
            raise ValueError(f"{self.kind}0 must be positive, got {self.first}")

    @classmethod
    def eps(cls, eps0=1.0, decay=0.5, N=30):
        return cls("eps", eps0, decay, N)

    @classmethod
    def lam(cls, lambda0=1.0, decay=0.5, N=30):
        return cls("lambda", lambda0, decay, N)

    @classmethod
    def pair(cls, lambda0=1.0, mu0=1.0, decay=0.5, N=30, allow_zero=False):
        return cls("pair", lambda0, decay, N, mu0, allow_zero)

    def values(self):
        """Array of the first component for n = 1..N."""
        return self.first * self.decay ** np.arange(self.N)

    def second_values(self):
        return self.second * self.decay ** np.arange(self.N)

    def to_dict(self):
        key = "eps0" if self.kind == "eps" else "lambda0"
        d = {key: self.first, "decay": self.decay, "N": self.N}
        if self.kind == "pair":
            d["mu0"] = self.second
            if self.allow_zero:
                d["allow_zero"] = True
        return d


@dataclass
class ProbeReport:
    """Outcome of one lower-limit probe."""

    residuals: list
    w_norms: list
    params: list
    verdict: str
    tail_slope: float
    bound: float = np.inf
    diagnostics: list = field(default_factory=list)
    iterates: list = field(default_factory=list)
    truncated: bool = False

    def partial_verdicts(self, tol_accept, tol_reject):
        return [verdict_of(self.residuals[:k], tol_accept, tol_reject)
                for k in range(1, len(self.residuals) + 1)]


def verdict_of(residuals, tol_accept, tol_reject, window=TAIL_WINDOW):
    """Three-valued verdict from a residual sequence.

    Accept needs the last residual at most ``tol_accept`` and a
    non-increasing tail (up to ``1e-2 * tol_accept``); reject needs every
    tail residual at least ``tol_reject``. Anything else is inconclusive.
    """
    r = np.asarray(residuals, dtype=float)
    if r.size == 0 or not np.all(np.isfinite(r)):
        return INCONCLUSIVE
    tail = r[-min(window, r.size):]
    if tail[-1] <= tol_accept and np.all(np.diff(tail) <= NESTED_TOL_RATIO * tol_accept):
        return ACCEPT
    if np.all(tail >= tol_reject):
        return REJECT
    return INCONCLUSIVE


def _tail_slope(r, window=TAIL_WINDOW):
    tail = np.asarray(r[-min(window, len(r)):], dtype=float)
    if tail.size < 2 or np.all(tail == 0):
        return 0.0
    logs = np.log10(np.maximum(tail, 1e-300))
    return float(np.polyfit(np.arange(tail.size), logs, 1)[0])


def _a_priori_bound(T, x, xs):
    # monotonicity against one graph point (u, u*) of T:
    # r^2 <= <u - x, u* - x*> + (||u - x|| + ||u* - x*||_*) r
    sp = T.space
    u, us = T.anchor()
    c = sp.norm(u - x) + sp.dual_norm(us - xs)
    e = max(0.0, sp.pair(u - x, us - xs))
    return 0.5 * (c + np.sqrt(c * c + 4 * e))


def liminf_probe(seq, z, sched, tol_accept=1e-4, tol_reject=1e-2, tol_solver=None,
                 max_iter=DEFAULT_MAX_ITER, warm_start=True):
    """Probe whether ``z = (x, x*)`` lies in ``liminf_n T_n``.

    Parameters
    ----------
    seq : callable
        ``n -> OperatorSpec`` for n = 1..N (1-based).
    z : tuple
        ``(x, x*)``.
    sched : Schedule
        Fixes N and the reported parameter column. The solver always
        returns the exact solution of the eps-free inclusion, which is an
        eps-solution for every eps, so eps never changes the residuals.
        A solver failure ends the run with an inconclusive verdict.
    tol_accept, tol_reject : float
        Verdict thresholds; see :func:`verdict_of`.
    tol_solver : float, optional
        Relative residual tolerance of each step; defaults to
        ``1e-2 * tol_accept``.
    """
    if tol_solver is None:
        tol_solver = NESTED_TOL_RATIO * tol_accept
    x, xs = z
    params = sched.values()
    residuals, w_norms, used, iterates = [], [], [], []
    diagnostics = []
    bound = np.inf
    prev = None
    failed = truncated = False
    for n in range(1, sched.N + 1):
        T = seq(n)
        sp = T.space
        if n == 1:
            x = sp.check(x, "x")
            xs = sp.check(xs, "x*")
        try:
            b = _a_priori_bound(T, x, xs)
        except NotImplementedError:
            b = np.inf
        bound = b if n == 1 else max(bound, b)
        try:
            sol = solve_translated_inclusion(T, x, xs, tol_solver, max_iter,
                                             z0=prev if warm_start else None)
        except SolverFailure as exc:
            diagnostics.append(f"step {n}: {exc}")
            truncated = True
            break
        r = sp.norm(sol.z - x)
        wn = sp.dual_norm(sol.w_star)
        if not (np.isfinite(r) and np.isfinite(wn)):
            diagnostics.append(f"step {n}: non-finite iterate")
            truncated = True
            break
        if r > b * (1 + 1e-6) + 1e-9:
            diagnostics.append(f"step {n}: |x_n - x| = {r:.3e} exceeds a priori bound {b:.3e}")
            failed = True
        residuals.append(r)
        w_norms.append(wn)
        used.append(float(params[n - 1]))
        iterates.append(sol.z)
        prev = sol.z
    if failed or truncated:
        verdict = INCONCLUSIVE
    else:
        verdict = verdict_of(residuals, tol_accept, tol_reject)
    return ProbeReport(residuals, w_norms, used, verdict, _tail_slope(residuals) if residuals else 0.0,
                       bound, diagnostics, iterates, truncated)
