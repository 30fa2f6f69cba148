import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monocalc import (
    GridSpec, NonMonotoneError, NormedSpace, abs_operator, certify_representative,
    fitzpatrick_value, fitzpatrick_values, graph, min_monotonicity_gap,
    representative_value, sample_graph,
)

S1 = NormedSpace(1, 2.0)


def a(*v):
    return np.array(v, dtype=float)


def z(x, xs):
    return a(x), a(xs)


def identity_samples(step=0.01):
    return graph(S1, [(y, y) for y in np.arange(-2, 2 + step / 2, step)])


def sign_samples(step=0.1):
    return sample_graph(abs_operator(S1), np.arange(-3, 3 + step / 2, step)[:, None])


def test_fitzpatrick_examples():
    assert fitzpatrick_value(graph(S1, [(0, 0)]), z(0.7, -3.0)) == 0.0
    G = identity_samples()
    assert fitzpatrick_value(G, z(1, 1)) == pytest.approx(1.0, abs=1e-12)
    # max over y of y*0 + 1*y - y^2 at y = 1/2
    assert fitzpatrick_value(G, z(1, 0)) == pytest.approx(0.25, abs=1e-6)


def test_fitzpatrick_is_pairing_on_graph():
    G = sign_samples()
    for y, ys in G:
        assert fitzpatrick_value(G, (y, ys)) == pytest.approx(float(y @ ys), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-3, 3), xs=st.floats(-3, 3))
def test_polar_correspondence(x, xs):
    G = sign_samples(0.25)
    zz = z(x, xs)
    # phi - pi is minus the monotonicity gap, so the signs match exactly
    assert (fitzpatrick_value(G, zz) <= x * xs) == (min_monotonicity_gap(G, zz) >= 0)


def test_vectorized_matches_scalar(rng):
    G = sign_samples()
    X, XS = rng.uniform(-2, 2, (50, 1)), rng.uniform(-2, 2, (50, 1))
    many = fitzpatrick_values(G, X, XS)
    np.testing.assert_allclose(many, [fitzpatrick_value(G, (x, xs)) for x, xs in zip(X, XS)],
                               rtol=1e-13, atol=1e-13)


def test_representative_examples():
    G = sign_samples()
    for y, ys in G:
        assert representative_value(G, (y, ys)) == pytest.approx(float(y @ ys), abs=1e-9)
    assert representative_value(G, z(0, 0.3)) == pytest.approx(0.0, abs=1e-9)
    assert representative_value(G, z(0, 2)) == np.inf


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-2.5, 2.5), xs=st.floats(-0.9, 0.9))
def test_representative_dominates_pairing(x, xs):
    G = sign_samples(0.25)
    h = representative_value(G, z(x, xs))
    assert h >= x * xs - 1e-9
    assert h >= fitzpatrick_value(G, z(x, xs)) - 1e-9


def test_representative_is_convex(rng):
    G = sign_samples(0.25)
    for _ in range(30):
        p, q = rng.uniform(-0.9, 0.9, (2, 2))
        t = float(rng.uniform())
        m = t * p + (1 - t) * q
        hp, hq, hm = (representative_value(G, z(*v)) for v in (p, q, m))
        assert hm <= t * hp + (1 - t) * hq + 1e-9


@pytest.mark.parametrize("G", [sign_samples(0.05), identity_samples(0.05)], ids=["sign", "identity"])
def test_certificate_passes(G):
    grid = GridSpec(-2.0, 2.0, 0.1)
    rep = certify_representative(G, grid)
    assert rep.status == "pass"
    assert rep.min_slack >= -1e-8
    assert len(rep.violations) == 0
    assert rep.coverage(G) <= grid.step
    doc = rep.to_json()
    assert set(doc) >= {"status", "min_slack", "n_equality", "n_violations", "grid_spec",
                        "graph_hash"}


def test_certificate_rejects_non_monotone():
    with pytest.raises(NonMonotoneError):
        certify_representative(graph(S1, [(0, 1), (1, 0)], monotone=False))


def test_certificate_is_deterministic():
    G = sign_samples()
    assert certify_representative(G).to_json() == certify_representative(G).to_json()


def test_fenchel_young_for_sample_pair(rng):
    # h is the conjugate of phi under the swapped pairing <(a, a*), (z, z*)> = a z* + a* z
    G = sign_samples(0.25)
    checked = 0
    for _ in range(300):
        a1, a2, z1 = rng.uniform(-2, 2, 3)
        z2 = rng.uniform(-0.9, 0.9)
        h = representative_value(G, z(z1, z2))
        if not np.isfinite(h):
            # outside the convex hull of the samples the inequality is trivial
            continue
        assert fitzpatrick_value(G, z(a1, a2)) + h >= a1 * z2 + a2 * z1 - 1e-8
        checked += 1
    assert checked >= 100
