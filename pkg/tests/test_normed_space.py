import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from monocalc import DimensionError, NormedSpace, duality_map, eps_duality_gap

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
exponents = st.sampled_from([1.25, 1.5, 2.0, 3.0, 4.5])


def test_hilbert_duality_is_identity():
    S = NormedSpace(2, 2.0)
    np.testing.assert_allclose(duality_map(S, [3.0, 4.0]), [3.0, 4.0])


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_duality_of_zero(p):
    S = NormedSpace(3, p)
    assert np.all(duality_map(S, np.zeros(3)) == 0.0)


def test_duality_p3_closed_form():
    S = NormedSpace(2, 3.0)
    J = duality_map(S, [1.0, 1.0])
    np.testing.assert_allclose(J, [2 ** (-1 / 3)] * 2, rtol=1e-14)
    # independent checks: <x, Jx> = ||x||^2 and ||Jx||_q = ||x||_p
    assert np.dot([1.0, 1.0], J) == pytest.approx(2 ** (2 / 3), rel=1e-14)
    assert np.sum(np.abs(J) ** 1.5) ** (1 / 1.5) == pytest.approx(2 ** (1 / 3), rel=1e-14)


def test_gap_examples():
    S = NormedSpace(2, 2.0)
    assert eps_duality_gap(S, [1.0, 0.0], [1.0, 0.0]) == pytest.approx(0.0, abs=1e-15)
    t = 0.7
    assert eps_duality_gap(S, [0.0, 0.0], [t, 0.0]) == pytest.approx(t * t / 2)
    assert eps_duality_gap(S, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)


def test_bad_space_and_dimension():
    for p in (1.0, 0.5, np.inf):
        with pytest.raises(ValueError):
            NormedSpace(2, p)
    with pytest.raises(ValueError):
        NormedSpace(0, 2.0)
    with pytest.raises(DimensionError):
        NormedSpace(2, 2.0).duality_map([1.0, 2.0, 3.0])


@settings(max_examples=200, deadline=None)
@given(p=exponents, x=arrays(float, 3, elements=finite))
def test_pairing_and_norm(p, x):
    S = NormedSpace(3, p)
    J = S.duality_map(x)
    n = S.norm(x)
    assert S.pair(x, J) == pytest.approx(n * n, rel=1e-10, abs=1e-12)
    assert S.dual_norm(J) == pytest.approx(n, rel=1e-10, abs=1e-12)
    np.testing.assert_allclose(S.dual_duality_map(J), x, rtol=1e-9, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(p=exponents, u=arrays(float, 2, elements=finite), w=arrays(float, 2, elements=finite))
def test_fenchel_young(p, u, w):
    S = NormedSpace(2, p)
    assert eps_duality_gap(S, u, w) >= -1e-10 * (1 + S.norm(u) ** 2 + S.dual_norm(w) ** 2)
    assert eps_duality_gap(S, u, S.duality_map(u)) == pytest.approx(0.0, abs=1e-9 * (1 + S.norm(u) ** 2))


@settings(max_examples=200, deadline=None)
@given(p=exponents, x=arrays(float, 2, elements=finite), y=arrays(float, 2, elements=finite),
       c=st.floats(-5, 5))
def test_monotone_and_homogeneous(p, x, y, c):
    S = NormedSpace(2, p)
    assert np.dot(x - y, S.duality_map(x) - S.duality_map(y)) >= -1e-9
    np.testing.assert_allclose(S.duality_map(c * x), c * S.duality_map(x), rtol=1e-10, atol=1e-10)
