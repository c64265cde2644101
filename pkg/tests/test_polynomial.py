import numpy as np
from hypothesis import given, settings, strategies as st

from resolvent_lab import polynomial as P

coef = st.floats(-3, 3, allow_nan=False)
polys2 = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coef, max_size=5)
pts = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


def test_linear_and_constant():
    p = P.linear([2.0, -1.0], 3.0)
    assert np.allclose(P.evaluate(p, np.array([[1.0, 1.0]])), [4.0])
    assert P.degree(P.constant(5.0, 2)) == 0


def test_power_matches_repeated_product():
    p = P.linear([1.0, 1.0])
    assert P.clean(P.add(P.power(p, 3, 2), P.mul(p, P.mul(p, p)), -1.0), 1e-12) == {}


def test_derive_monomial():
    d = P.derive(P.monomial((2, 1), 3.0), 0)
    assert d == {(1, 1): 6.0}


def test_gaussian_moments_one_dimensional():
    m = P.gaussian_moments(np.array([[2.0]]), [(0,), (1,), (2,), (4,), (6,)])
    assert np.allclose([m[(0,)], m[(1,)], m[(2,)], m[(4,)], m[(6,)]], [1, 0, 2, 12, 120])


def test_gaussian_moments_against_sampling(rng):
    S = np.array([[1.0, 0.3], [0.3, 0.5]])
    X = rng.multivariate_normal(np.zeros(2), S, size=400000)
    m = P.gaussian_moments(S, [(2, 2), (1, 1)])
    assert abs(m[(1, 1)] - 0.3) < 1e-12
    assert abs(m[(2, 2)] - np.mean(X[:, 0] ** 2 * X[:, 1] ** 2)) < 0.02


@settings(max_examples=80, deadline=None)
@given(polys2, polys2, pts)
def test_mul_is_pointwise(p, q, y):
    Y = np.array([y])
    assert np.allclose(P.evaluate(P.mul(p, q), Y), P.evaluate(p, Y) * P.evaluate(q, Y), atol=1e-8)


@settings(max_examples=80, deadline=None)
@given(polys2, pts, st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_affine_substitute_is_composition(p, y, params):
    L = np.array(params[:4]).reshape(2, 2)
    c = np.array(params[4:])
    v = np.array(y)
    lhs = P.evaluate(P.affine_substitute(p, L, c), v[None, :])
    rhs = P.evaluate(p, (L @ v + c)[None, :])
    assert np.allclose(lhs, rhs, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(polys2, pts)
def test_derive_matches_finite_difference(p, y):
    Y = np.array([y])
    h = 1e-6
    fd = (P.evaluate(p, Y + [h, 0]) - P.evaluate(p, Y - [h, 0])) / (2 * h)
    assert np.allclose(P.evaluate(P.derive(p, 0), Y), fd, atol=1e-4)
