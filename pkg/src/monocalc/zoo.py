"""Named operator constructors used by scenario files.

Numeric parameters may be given as strings in the step index ``n``, such as
``"1/n"`` or ``"0.5**n"``, to describe operator families ``n -> T_n``.
"""
import ast
import operator as _op

import numpy as np

from . import operator_core as oc
from .resolvent_engine import sample_graph

__all__ = ["ZOO", "build_operator", "eval_param", "ScenarioError"]


class ScenarioError(ValueError):
    """Scenario content is malformed or inconsistent."""


_BINOPS = {ast.Add: _op.add, ast.Sub: _op.sub, ast.Mult: _op.mul,
           ast.Div: _op.truediv, ast.Pow: _op.pow}
_UNOPS = {ast.USub: _op.neg, ast.UAdd: _op.pos}


def _eval_expr(node, n):
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body, n)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "n":
        if n is None:
            raise ScenarioError("parameter depends on n but no step index is available")
        return float(n)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_expr(node.left, n), _eval_expr(node.right, n))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_expr(node.operand, n))
    raise ScenarioError(f"unsupported expression element {ast.dump(node)}")


def eval_param(v, n=None):
    """Resolve a number, an expression string in n, or a (nested) list of them."""
    if isinstance(v, list):
        return [eval_param(u, n) for u in v]
    if isinstance(v, str):
        try:
            tree = ast.parse(v, mode="eval")
        except SyntaxError as exc:
            raise ScenarioError(f"bad expression {v!r}") from exc
        val = _eval_expr(tree, n)
    elif isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"expected a number, got {v!r}")
    else:
        val = float(v)
    if not np.isfinite(val):
        raise ScenarioError(f"parameter {v!r} is not finite")
    return val


def depends_on_n(v):
    if isinstance(v, list):
        return any(depends_on_n(u) for u in v)
    if isinstance(v, dict):
        return any(depends_on_n(u) for u in v.values())
    return isinstance(v, str) and "n" in v


def _vec(space, v, n, name):
    a = np.atleast_1d(np.asarray(eval_param(v, n), dtype=float))
    if a.size == 1 and space.dim > 1:
        a = np.full(space.dim, a[0])
    return space.check(a, name)


def _abs(space, entry, n):
    c = entry.get("center", 0.0)
    return oc.abs_operator(space, _vec(space, c, n, "center"))


def _shifted_abs(space, entry, n):
    return oc.abs_operator(space, _vec(space, entry.get("shift", 0.0), n, "shift"))


def _ball(space, entry, n):
    r = eval_param(entry.get("radius", 1.0), n)
    return oc.indicator_ball(space, _vec(space, entry.get("center", 0.0), n, "center"), r)


def _box(space, entry, n):
    lo = _vec(space, entry.get("lo", -1.0), n, "lo")
    hi = _vec(space, entry.get("hi", 1.0), n, "hi")
    return oc.indicator_box(space, lo, hi)


def _linear(space, entry, n):
    if "matrix" not in entry:
        raise ScenarioError("linear needs a matrix")
    return oc.linear(space, np.asarray(eval_param(entry["matrix"], n), dtype=float))


def _graph(space, entry, n):
    if "pairs" in entry:
        pairs = [(eval_param(a, n), eval_param(b, n)) for a, b in entry["pairs"]]
        return oc.graph(space, pairs, monotone=entry.get("monotone", True))
    if "sample" in entry:
        s = entry["sample"]
        base = build_operator(space, s["of"], n)
        lo, hi, step = (eval_param(s.get(k, d)) for k, d in (("lo", -2.0), ("hi", 2.0),
                                                               ("step", 0.1)))
        k = int(round((hi - lo) / step))
        ax = lo + step * np.arange(k + 1)
        grid = np.array(np.meshgrid(*[ax] * space.dim, indexing="ij")).reshape(space.dim, -1).T
        return sample_graph(base, grid, monotone=entry.get("monotone", True))
    raise ScenarioError("graph needs 'pairs' or 'sample'")


ZOO = {
    "abs": _abs,
    "shifted_abs": _shifted_abs,
    "indicator_ball": _ball,
    "indicator_box": _box,
    "linear": _linear,
    "zero": lambda space, entry, n: oc.zero(space),
    "identity": lambda space, entry, n: oc.identity(space),
    "graph": _graph,
}


def build_operator(space, entry, n=None):
    """Instantiate a zoo entry ``{"name": ..., params...}`` on ``space``."""
    if not isinstance(entry, dict) or "name" not in entry:
        raise ScenarioError(f"operator entry must be an object with a name: {entry!r}")
    name = entry["name"]
    if name not in ZOO:
        raise ScenarioError(f"unknown operator {name!r}; known: {sorted(ZOO)}")
    try:
        return ZOO[name](space, entry, n)
    except (ScenarioError, oc.NonMonotoneError):
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ScenarioError(f"{name}: {exc}") from exc
