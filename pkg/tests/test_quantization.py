import numpy as np
import pytest

from resolvent_lab.fock import FockContext, TruncationError, functional_calculus, op_norm
from resolvent_lab.gauss import PolyGaussian
from resolvent_lab.levee import CRElement, ExactProfileError, Generator, Levee, heat_flow, multiply
from resolvent_lab.quantization import (QuadratureError, berezin_quantize, resolved_degree, twisted_product,
                                        weyl_quantize)
from resolvent_lab.subspace import Subspace


def _close(A, B, tol):
    return op_norm(A - B) <= tol


def test_constant_quantizes_to_multiple_of_identity():
    ctx = FockContext(1, 10)
    Q = weyl_quantize(ctx, CRElement.constant(2, 2.5))
    assert np.allclose(Q.matrix, 2.5 * np.eye(ctx.dim))


def test_vacuum_expectation_oracle(gauss1):
    # <Ω, Q^W(g∘p_x) Ω> = ∫ đξ ĝ(ξ) e^{-ħ ξ²|x|²/4} = (1 + ħ/2)^{-1/2} for g = e^{-t²/2}, |x| = 1
    for hbar in (0.5, 1.0, 2.0):
        ctx = FockContext(1, 60, hbar)
        Q = weyl_quantize(ctx, CRElement.linear_form([0.6, 0.8], gauss1))
        assert abs(Q.matrix[0, 0] - (1 + hbar / 2) ** -0.5) < 1e-10


def test_real_symbol_gives_hermitian_operator(gauss1):
    ctx = FockContext(1, 30)
    f = CRElement.linear_form([1.0, 0.5], gauss1) + CRElement.linear_form([-0.3, 1.0], gauss1)
    M = weyl_quantize(ctx, f).matrix
    assert np.allclose(M, M.conj().T, atol=1e-12)


@pytest.mark.parametrize("a", [0.3, 0.5, 0.8])
def test_functional_calculus_one_levee(a):
    ctx = FockContext(1, 60)
    g = PolyGaussian.gaussian(a, poly={(0,): 1.0, (2,): 0.2})
    x = np.array([0.8, -0.4])
    Q = weyl_quantize(ctx, CRElement.linear_form(x, g), estimate_error=True)
    assert _close(Q, functional_calculus(ctx, g, x), 1e-9)
    assert Q.error < 1e-9


def test_fixed_degree_can_underresolve_and_estimate_flags_it():
    ctx = FockContext(1, 60)
    g = PolyGaussian.gaussian(1.2)
    f = CRElement.linear_form([1.0, 0.0], g)
    Q = weyl_quantize(ctx, f, 40, estimate_error=True, adaptive=False)
    actual = op_norm(Q - functional_calculus(ctx, g, [1.0, 0.0]))
    assert actual > 1e-6
    assert Q.error > 0.1 * actual
    with pytest.raises(QuadratureError):
        weyl_quantize(ctx, f, 40, max_error=1e-8, adaptive=False)
    assert resolved_degree(ctx, g.blocks[0], 40) > 40


def test_two_mode_general_path():
    ctx = FockContext(2, 18, padding=8)
    g = PolyGaussian.gaussian(0.5)
    x = [0.0, 1.0, 0.0, 0.0]
    Q = weyl_quantize(ctx, CRElement.linear_form(x, g), 40)
    assert np.linalg.norm((Q - functional_calculus(ctx, g, x)).compress(6), 2) < 1e-10


def test_scaled_route_agrees_with_direct(gauss1):
    ctx = FockContext(1, 60, 0.5)
    f = CRElement.linear_form([1.0, 0.2], gauss1)
    assert _close(weyl_quantize(ctx, f), weyl_quantize(ctx, f, route="scaled"), 1e-10)
    assert _close(berezin_quantize(ctx, f), berezin_quantize(ctx, f, route="scaled"), 1e-10)


@pytest.mark.parametrize("hbar", [0.5, 1.0, 2.0])
def test_berezin_equals_weyl_of_heat_flow(gauss1, hbar):
    ctx = FockContext(1, 60, hbar)
    f = CRElement.linear_form([1.0, 0.0], gauss1) + CRElement.linear_form([0.3, 1.0], PolyGaussian.gaussian(0.4))
    assert _close(berezin_quantize(ctx, f), weyl_quantize(ctx, heat_flow(f, hbar)), 1e-8)


def test_berezin_positivity(gauss1):
    ctx = FockContext(1, 40)
    lv = CRElement.linear_form([1.0, 0.4], PolyGaussian.gaussian(0.5 + 0.3j, b=[0.2]))
    M = berezin_quantize(ctx, multiply(lv, lv.conj())).matrix
    assert np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0] >= -1e-8


@pytest.mark.parametrize("x1,x2", [([1.0, 0.0], [0.0, 1.0]), ([1.0, 0.3], [0.2, 1.0]), ([1.0, 0.3], [1.2, 0.36])])
def test_twisted_product_one_dimensional_levees(x1, x2):
    # parallel directions multiply into a narrower profile, hence N = 80
    ctx = FockContext(1, 80)
    f1 = CRElement.linear_form(x1, PolyGaussian.gaussian(0.5))
    f2 = CRElement.linear_form(x2, PolyGaussian.gaussian(0.3, poly={(1,): 1.0}))
    tp = twisted_product(f1, f2, 1.0, 1)
    assert _close(weyl_quantize(ctx, f1) @ weyl_quantize(ctx, f2), weyl_quantize(ctx, tp), 1e-8)


def test_twisted_product_full_rank_levee():
    ctx = FockContext(1, 60, 0.5)
    h = CRElement(2, [Levee(Subspace.full(2), PolyGaussian.gaussian(np.array([[0.6, 0.1], [0.1, 0.5]])))])
    f = CRElement.linear_form([1.0, 0.3], PolyGaussian.gaussian(0.5))
    tp = twisted_product(h, f, 0.5, 1)
    assert _close(weyl_quantize(ctx, h) @ weyl_quantize(ctx, f), weyl_quantize(ctx, tp), 1e-8)


def test_twisted_product_tends_to_pointwise_product(reference_pair):
    f, g = reference_pair
    Y = np.random.default_rng(2).normal(size=(8, 2))
    d = [np.max(np.abs(twisted_product(f, g, h, 1)(Y) - multiply(f, g)(Y))) for h in (1.0, 0.1, 0.01)]
    # first-order term is (iħ/2){f, g}, so the gap shrinks linearly
    assert d[0] > d[1] > d[2]
    assert d[2] < 0.15 * d[1]


def test_guards_and_exact_profiles(gauss1):
    with pytest.raises(TruncationError):
        weyl_quantize(FockContext(1, 4), CRElement.linear_form([1.0, 0.0], gauss1))
    with pytest.raises(ExactProfileError):
        weyl_quantize(FockContext(1, 20), Generator(1.0, [1.0, 0.0]).element())
    with pytest.raises(ValueError):
        berezin_quantize(FockContext(1, 20, -1.0), CRElement.linear_form([1.0, 0.0], gauss1))
    with pytest.raises(ValueError):
        weyl_quantize(FockContext(2, 4), CRElement.linear_form([1.0, 0.0], gauss1))
