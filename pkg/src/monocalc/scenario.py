"""Declarative scenario files: schema validation, defaults, and object builders."""
import copy
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .limit_probe import NESTED_TOL_RATIO, Schedule
from .normed_space import NormedSpace
from .representability import GridSpec
from .resolvent_engine import DEFAULT_MAX_ITER, DEFAULT_TOL, Yosida
from .variational_calc import LinearOp, ScheduleFamily
from .zoo import ScenarioError, build_operator, depends_on_n, eval_param

__all__ = ["Scenario", "ScenarioError", "load_scenario", "SCHEMA"]

SCHEMA = json.loads(resources.files("monocalc").joinpath("scenario.schema.json").read_text())

TASKS = ("my_eval", "probe", "varsum", "varcomp", "fitzpatrick", "certify")
# operator slots each task needs
_NEEDS = {
    "my_eval": ("T",), "probe": ("T",), "varsum": ("T1", "T2"), "varcomp": ("T",),
    "fitzpatrick": ("G",), "certify": ("G",),
}
_DEFAULT_TOL = {"solver": None, "inner": None, "accept": 1e-4, "reject": 1e-2, "certify": 1e-8}


def _reject_constant(name):
    raise ScenarioError(f"non-finite literal {name} in scenario")


def _vec(space, v, name):
    a = np.atleast_1d(np.asarray(eval_param(v), dtype=float))
    if a.size == 1 and space.dim > 1:
        a = np.full(space.dim, a[0])
    return space.check(a, name)


@dataclass
class Scenario:
    """Validated scenario with all defaults filled in.

    ``to_dict`` returns the echo written into the summary; feeding it back
    through :meth:`from_dict` gives an equal scenario.
    """

    task: str
    space: dict
    operators: dict
    space_y: dict = None
    A: list = None
    point: dict = None
    points: list = None
    random_points: dict = None
    lam: float = 1.0
    schedules: list = None
    tolerances: dict = field(default_factory=dict)
    max_iter: int = DEFAULT_MAX_ITER
    grid: dict = None
    seed: int = 0
    out: str = "out"

    # ---------------------------------------------------------------- parsing
    @classmethod
    def from_dict(cls, raw):
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ScenarioError(f"schema violation at {path}: {exc.message}") from None
        d = copy.deepcopy(raw)
        task = d["task"]
        ops = d.get("operators", {})
        missing = [k for k in _NEEDS[task] if k not in ops]
        if missing:
            raise ScenarioError(f"task {task} needs operators {missing}")
        tol = dict(_DEFAULT_TOL)
        tol.update(d.get("tolerances", {}))
        if tol["solver"] is None:
            tol["solver"] = DEFAULT_TOL if task == "my_eval" else NESTED_TOL_RATIO * tol["accept"]
        if tol["inner"] is None:
            tol["inner"] = NESTED_TOL_RATIO * tol["solver"]
        if tol["accept"] >= tol["reject"]:
            raise ScenarioError("tolerances need accept < reject")
        sc = cls(
            task=task, space=d["space"], operators=ops, space_y=d.get("space_y"),
            A=d.get("A"), point=d.get("point"), points=d.get("points"),
            random_points=d.get("random_points"), lam=float(d.get("lambda", 1.0)),
            schedules=d.get("schedules"), tolerances=tol,
            max_iter=int(d.get("max_iter", DEFAULT_MAX_ITER)),
            grid=d.get("grid"), seed=int(d.get("seed", 0)), out=d.get("out", "out"),
        )
        sc._check()
        return sc

    def _check(self):
        """Semantic checks the schema cannot express; builds everything once."""
        t = self.task
        if t in ("probe", "varsum", "varcomp") and self.point is None:
            raise ScenarioError(f"task {t} needs a point")
        if t in ("my_eval", "fitzpatrick") and not (self.points or self.point or self.random_points):
            raise ScenarioError(f"task {t} needs point, points or random_points")
        if t == "varcomp" and (self.A is None or self.space_y is None):
            raise ScenarioError("varcomp needs A and space_y")
        if self.grid is not None:
            try:
                GridSpec(**self.grid)
            except ValueError as exc:
                raise ScenarioError(str(exc)) from None
        if self.random_points is not None:
            lo, hi = self.random_points.get("lo", -2.0), self.random_points.get("hi", 2.0)
            if not lo < hi:
                raise ScenarioError("random_points needs lo < hi")
        try:
            self.schedule_family()
            sp = self.normed_space()
            for k in _NEEDS[t]:
                is_graph = self.operators[k]["name"] == "graph"
                if is_graph != (k == "G"):
                    raise ScenarioError(f"operator {k} of task {t} must "
                                        f"{'' if k == 'G' else 'not '}be a sampled graph")
                self.operator(k, 1)
            if t == "varcomp":
                A = self.linear_op()
                if A.shape != (sp.dim, self.normed_space_y().dim):
                    raise ScenarioError(f"A has shape {A.shape}, expected "
                                        f"{(sp.dim, self.normed_space_y().dim)}")
            self.target()
            self.evaluation_points()
        except ScenarioError:
            raise
        except (ValueError, TypeError) as exc:
            # includes DimensionError and NonMonotoneError from the builders
            raise ScenarioError(f"{type(exc).__name__}: {exc}") from None

    # ---------------------------------------------------------------- builders
    def normed_space(self):
        return NormedSpace(self.space["dim"], float(self.space["p"]))

    def normed_space_y(self):
        return NormedSpace(self.space_y["dim"], float(self.space_y["p"]))

    def linear_op(self):
        return LinearOp(np.asarray(self.A, dtype=float))

    def operator(self, key, n=None):
        """Operator slot ``key``, evaluated at step ``n`` for families."""
        return build_operator(self.normed_space(), self.operators[key], n)

    def is_family(self, key):
        return depends_on_n(self.operators[key])

    def target(self):
        """The probe point as ``(x, x*)`` arrays (varcomp lives on Y)."""
        if self.point is None:
            return None
        sp = self.normed_space_y() if self.task == "varcomp" else self.normed_space()
        x = _vec(sp, self.point["x"], "x")
        xs = _vec(sp, self.point.get("x_star", 0.0), "x*")
        return x, xs

    def evaluation_points(self):
        """Rows of ``x`` and ``x*`` for my_eval and fitzpatrick tasks."""
        if self.task not in ("my_eval", "fitzpatrick"):
            return None
        sp = self.normed_space()
        if self.random_points is not None:
            rp = self.random_points
            rng = np.random.default_rng(self.seed)
            lo, hi = rp.get("lo", -2.0), rp.get("hi", 2.0)
            X = rng.uniform(lo, hi, (rp["count"], sp.dim))
            XS = rng.uniform(lo, hi, (rp["count"], sp.dim)) if self.task == "fitzpatrick" \
                else np.zeros_like(X)
            return X, XS
        pts = self.points if self.points else [self.point]
        X = np.array([_vec(sp, q["x"], "x") for q in pts])
        XS = np.array([_vec(sp, q.get("x_star", 0.0), "x*") for q in pts])
        return X, XS

    def schedule_family(self):
        """List of :class:`Schedule` for probe-type tasks (defaults if absent)."""
        t = self.task
        if t not in ("probe", "varsum", "varcomp"):
            return None
        if self.schedules is None:
            if t == "probe":
                return [Schedule.eps()]
            if t == "varsum":
                return list(ScheduleFamily.default_pairs())
            return list(ScheduleFamily.default_lambdas())
        out = []
        for s in self.schedules:
            decay, N = s.get("decay", 0.5), s.get("N", 30)
            try:
                if t == "varsum":
                    if "lambda0" not in s or "mu0" not in s:
                        raise ScenarioError("varsum schedules need lambda0 and mu0")
                    out.append(Schedule.pair(s["lambda0"], s["mu0"], decay, N,
                                             s.get("allow_zero", False)))
                elif "mu0" in s:
                    raise ScenarioError("mu0 only applies to varsum schedules")
                elif "eps0" in s:
                    if t == "varcomp":
                        raise ScenarioError("varcomp schedules need lambda0")
                    out.append(Schedule.eps(s["eps0"], decay, N))
                else:
                    out.append(Schedule.lam(s["lambda0"], decay, N))
            except ValueError as exc:
                if isinstance(exc, ScenarioError):
                    raise
                raise ScenarioError(f"bad schedule {s}: {exc}") from None
        return out

    def probe_sequence(self, sched):
        """``n -> T_n`` for a probe schedule; lambda schedules regularize T_n."""
        tol_inner = self.tolerances["inner"]
        family = self.is_family("T")
        fixed = None if family else self.operator("T")
        lams = sched.values()

        def seq(n):
            T = self.operator("T", n) if family else fixed
            if sched.kind == "lambda":
                return Yosida(T, lams[n - 1], tol_inner, self.max_iter)
            return T

        return seq

    def grid_spec(self):
        return GridSpec(**self.grid) if self.grid is not None else GridSpec()

    # ---------------------------------------------------------------- echo
    def to_dict(self):
        d = {"task": self.task, "space": self.space, "operators": self.operators}
        for key, val in (("space_y", self.space_y), ("A", self.A), ("point", self.point),
                         ("points", self.points), ("random_points", self.random_points),
                         ("schedules", self.schedules), ("grid", self.grid)):
            if val is not None:
                d[key] = val
        d["lambda"] = self.lam
        d["tolerances"] = self.tolerances
        d["max_iter"] = self.max_iter
        d["seed"] = self.seed
        d["out"] = self.out
        return copy.deepcopy(d)


def load_scenario(path, overrides=None):
    """Read, override and validate a scenario file.

    Raises :class:`ScenarioError` for unreadable, unparsable or invalid
    input. ``overrides`` may set ``seed``, ``out`` and ``tolerances.*``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key.startswith("tol_"):
            raw.setdefault("tolerances", {})[key[4:]] = val
        else:
            raw[key] = val
    return Scenario.from_dict(raw)
