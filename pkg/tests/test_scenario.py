import numpy as np
import pytest

from monocalc import NormedSpace
from monocalc.scenario import Scenario
from monocalc.zoo import ScenarioError, build_operator, depends_on_n, eval_param

BASE = {"task": "probe", "space": {"dim": 1, "p": 2}, "operators": {"T": {"name": "abs"}},
        "point": {"x": 0, "x_star": 0.5}}


def test_expressions():
    assert eval_param("1/n", 4) == 0.25
    assert eval_param("0.5**n", 3) == 0.125
    assert eval_param(["-n", 2], 2) == [-2.0, 2.0]
    assert depends_on_n({"shift": "1/n"}) and not depends_on_n({"shift": 1})


@pytest.mark.parametrize("bad", ["__import__('os')", "n.real", "abs(n)", "1/0", "1e400", "n"])
def test_expressions_are_restricted(bad):
    with pytest.raises((ScenarioError, ZeroDivisionError)):
        eval_param(bad)


def test_family_operator():
    S = NormedSpace(1, 2.0)
    T3 = build_operator(S, {"name": "shifted_abs", "shift": "1/n"}, 3)
    assert T3.eval(np.array([1 / 3])).contains(np.array([0.2]))


def test_defaults_filled():
    sc = Scenario.from_dict(BASE)
    tol = sc.tolerances
    assert tol["accept"] == 1e-4 and tol["reject"] == 1e-2
    assert tol["solver"] == pytest.approx(1e-6) and tol["inner"] == pytest.approx(1e-8)
    assert [s.N for s in sc.schedule_family()] == [30]


@pytest.mark.parametrize("patch", [
    {"task": "varcomp"}, {"task": "fitzpatrick"}, {"operators": {"T": {"name": "graph",
                                                                        "pairs": [[0, 0]]}}},
    {"schedules": [{"decay": 0.5}]}, {"space": {"dim": 0, "p": 2}},
    {"point": {"x": [0, 1], "x_star": 0}},
])
def test_semantic_errors(patch):
    with pytest.raises(ScenarioError):
        Scenario.from_dict({**BASE, **patch})


def test_random_points_are_seeded():
    doc = {"task": "my_eval", "space": {"dim": 2, "p": 3}, "operators": {"T": {"name": "abs"}},
           "random_points": {"count": 5}, "seed": 3}
    X1, _ = Scenario.from_dict(doc).evaluation_points()
    X2, _ = Scenario.from_dict(doc).evaluation_points()
    X3, _ = Scenario.from_dict({**doc, "seed": 4}).evaluation_points()
    assert np.array_equal(X1, X2) and not np.array_equal(X1, X3)
