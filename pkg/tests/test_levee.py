import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resolvent_lab.gauss import PolyGaussian
from resolvent_lab.levee import (CRElement, ExactProfileError, Generator, Levee, ae_value, direction_limit,
                                 evaluate, generator_approx, heat_flow, layer_quotient_norm, multiply,
                                 poisson_bracket, rescale, sigma, sup_norm, symplectic_matrix)
from resolvent_lab.subspace import AffineSubspace, Subspace


def _gauss_levee(rng, m, k):
    V = Subspace.span(*rng.normal(size=(k, m)))
    A = np.eye(k) * rng.uniform(0.3, 1.0) + 0.1j * np.eye(k)
    return Levee(V, PolyGaussian.gaussian(A, b=rng.normal(size=k), coeff=rng.normal() + 1j * rng.normal()))


def _random_element(rng, m=3, count=3):
    lvs = [_gauss_levee(rng, m, int(rng.integers(1, m + 1))) for _ in range(count)]
    return CRElement(m, lvs + [Levee(Subspace.zero(m), PolyGaussian.constant(0.3))])


def test_linear_form_values(gauss1):
    f = CRElement.linear_form([3.0, 4.0], gauss1)
    y = np.array([0.2, -0.1])
    assert np.isclose(f(y), np.exp(-0.5 * (3 * 0.2 - 4 * 0.1) ** 2))


def test_equal_directions_merge(gauss1):
    f = CRElement.linear_form([1.0, 0.0], gauss1) + CRElement.linear_form([-2.0, 0.0], gauss1)
    assert len(f.levees) == 1
    y = np.array([[0.4, 1.0]])
    assert np.allclose(f(y), np.exp(-0.08) + np.exp(-0.32))


def test_generator_exact_values():
    h = Generator(1.5, [1.0, 2.0])
    y = np.array([0.3, -0.7])
    assert np.isclose(h.element()(y), 1 / (1.5j - (0.3 - 1.4)))
    assert np.isclose(Generator(2.0, [0.0, 0.0]).element()(y), -0.5j)


def test_generator_sup_norm():
    assert abs(sup_norm(Generator(1.0, [1.0, 0.0]).element()) - 1.0) < 1e-9


def test_exact_profile_refuses_gaussian_calculus():
    h = Generator(1.0, [1.0, 0.0]).element()
    with pytest.raises(ExactProfileError):
        multiply(h, h)


def test_generator_approx_accuracy():
    fit = generator_approx(Generator(1.0, [1.0, 0.0]))
    assert fit.sup_error < 0.05
    assert fit.tail_bound < 0.06
    t = np.linspace(-15, 15, 301)
    Y = np.stack([t, np.zeros_like(t)], axis=1)
    assert np.max(np.abs(fit.element(Y) - 1 / (1j - t))) <= fit.sup_error + 1e-12


def test_symplectic_conventions():
    J = symplectic_matrix(1)
    assert np.allclose(J, [[0, 1], [-1, 0]])
    assert sigma([1, 0], [0, 1]) == -1.0


def test_poisson_bracket_finite_difference(reference_pair):
    f, g = reference_pair
    br = poisson_bracket(f, g, 1)
    rng = np.random.default_rng(5)
    for y in rng.normal(size=(6, 2)):
        gf, gg = f.gradient(y)[0], g.gradient(y)[0]
        assert np.isclose(br(y), gf[0] * gg[1] - gf[1] * gg[0], atol=1e-12)


def test_heat_flow_on_constant_unchanged():
    c = CRElement.constant(2, 2.0)
    assert np.isclose(heat_flow(c, 1.0)(np.zeros(2)), 2.0)


def test_direction_limit_and_ae_value_two_levees(gauss1):
    f = CRElement.linear_form([1.0, 0.0], gauss1) + CRElement.linear_form([0.0, 1.0], gauss1)
    V = Subspace.span([0.0, 1.0])
    w = np.array([0.5, 0.0])
    assert np.isclose(direction_limit(f, V, w, [0.0, 1.0]), np.exp(-0.125))
    assert np.isclose(ae_value(f, V, w), np.exp(-0.125))
    assert np.isclose(ae_value(f, AffineSubspace.point([0.5, 0.0])), np.exp(-0.125) + 1.0)


def test_direction_limit_rejects_bad_input(gauss1):
    f = CRElement.linear_form([1.0, 0.0], gauss1)
    V = Subspace.span([0.0, 1.0])
    with pytest.raises(ValueError):
        direction_limit(f, V, [0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        direction_limit(f, V, [0.0, 0.0], [1.0, 0.0])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_multiply_is_pointwise(seed):
    rng = np.random.default_rng(seed)
    f, g = _random_element(rng), _random_element(rng)
    Y = rng.normal(size=(5, 3))
    assert np.allclose(multiply(f, g)(Y), f(Y) * g(Y), atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_algebra_operations_pointwise(seed):
    rng = np.random.default_rng(seed)
    f, g = _random_element(rng), _random_element(rng)
    Y = rng.normal(size=(5, 3))
    assert np.allclose((f + g)(Y), f(Y) + g(Y))
    assert np.allclose((f - g)(Y), f(Y) - g(Y))
    assert np.allclose(f.conj()(Y), np.conj(f(Y)))
    assert np.allclose(rescale(f, 1.7)(Y), f(1.7 * Y))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_sup_norm_dominates_samples_and_limits(seed):
    rng = np.random.default_rng(seed)
    f = _random_element(rng, m=2, count=2)
    s = sup_norm(f)
    Y = 4 * rng.normal(size=(4000, 2))
    assert np.max(np.abs(evaluate(f, Y))) <= s + 1e-8
    for lv in f.levees:
        if lv.direction.dim:
            assert abs(ae_value(f, lv.kernel, np.zeros(2))) <= s + 1e-8
    assert layer_quotient_norm(f, 0) <= s + 1e-8
