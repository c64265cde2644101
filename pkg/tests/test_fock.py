import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resolvent_lab.fock import (FockContext, FockOperator, TruncationError, calibrate_sign, coherent,
                                commutator, export_matrix, field_operator, functional_calculus,
                                import_matrix, occupation_basis, op_norm, resolvent_op, weyl_operator)
from resolvent_lab.levee import sigma


def test_occupation_basis_ordering():
    b = occupation_basis(2, 2)
    assert len(b) == 6
    assert b[0] == (0, 0)
    assert [sum(k) for k in b] == sorted(sum(k) for k in b)


def test_dims_and_padding():
    ctx = FockContext(2, 3)
    assert ctx.dim == 10 and ctx.padding == 3 and ctx.work_dim == 28
    assert FockOperator.identity(ctx).matrix.shape == (10, 10)


@pytest.mark.parametrize("kw", [dict(modes=0, cutoff=3), dict(modes=1, cutoff=0), dict(modes=1, cutoff=3, hbar=0.0),
                                dict(modes=1, cutoff=3, padding=-1), dict(modes=1, cutoff=3, complex_sign=2)])
def test_context_validation(kw):
    with pytest.raises(ValueError):
        FockContext(**kw)


def test_calibrated_sign_is_minus_one():
    assert calibrate_sign() == -1


def test_canonical_commutator_on_low_states():
    ctx = FockContext(1, 20, 1.0)
    C = commutator(field_operator(ctx, [1.0, 0.0]), field_operator(ctx, [0.0, 1.0]))
    # [φ(x), φ(y)] = i ħ σ(x, y) on states well inside the truncation
    assert np.allclose(C.compress(10), 1j * sigma([1, 0], [0, 1]) * np.eye(11), atol=1e-12)


@pytest.mark.parametrize("hbar", [1.0, 0.5, -1.0])
def test_ccr_phase_identity(hbar):
    ctx = FockContext(1, 40, hbar)
    x, y = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    lhs = weyl_operator(ctx, x) @ weyl_operator(ctx, y)
    rhs = weyl_operator(ctx, x + y).scaled(np.exp(-0.5j * hbar * sigma(x, y)))
    assert np.linalg.norm((lhs - rhs).compress(10), 2) < 1e-8


def test_vacuum_expectation():
    ctx = FockContext(1, 40, 0.7)
    x = np.array([0.8, -0.3])
    E = weyl_operator(ctx, x)
    assert abs(E.matrix[0, 0] - np.exp(-0.7 * (x @ x) / 4)) < 1e-12


def test_weyl_on_coherent_vacuum():
    ctx = FockContext(1, 40, 1.0)
    x = np.array([0.6, 0.4])
    v = weyl_operator(ctx, x).matrix[:, 0]
    c = coherent(ctx, np.sqrt(ctx.hbar) * ctx.hermitian_vector(x))
    expected = c.coefficients * np.exp(-0.5 * np.vdot(c.amplitude, c.amplitude).real)
    assert np.allclose(v[:15], expected[:15], atol=1e-10)


def test_weyl_unitary_on_low_states():
    ctx = FockContext(2, 6, 1.0)
    E = weyl_operator(ctx, [0.3, 0.1, -0.2, 0.4])
    U = E.work
    assert np.allclose(U.conj().T @ U, np.eye(ctx.work_dim), atol=1e-12)


def test_truncation_guard():
    ctx = FockContext(1, 4, 1.0)
    with pytest.raises(TruncationError):
        weyl_operator(ctx, [5.0, 0.0])
    with pytest.raises(TruncationError):
        coherent(ctx, [3.0])


def test_resolvent_bounded_by_inverse_lambda():
    ctx = FockContext(1, 30, 1.0)
    R = resolvent_op(ctx, 2.0, [1.0, 1.0])
    assert op_norm(R) <= 0.5 + 1e-12
    with pytest.raises(ValueError):
        resolvent_op(ctx, 0.0, [1.0, 0.0])


def test_functional_calculus_matches_exponential():
    ctx = FockContext(1, 20, 1.0)
    E = weyl_operator(ctx, [1.0, 0.0])
    F = functional_calculus(ctx, lambda t: np.exp(1j * t), [1.0, 0.0])
    assert np.allclose(E.work, F.work)


def test_matrix_round_trip(tmp_path):
    ctx = FockContext(1, 5, 1.0)
    E = weyl_operator(ctx, [0.3, 0.2])
    export_matrix(E, tmp_path / "e.mat")
    assert np.array_equal(import_matrix(tmp_path / "e.mat"), E.matrix)
    (tmp_path / "bad.mat").write_text("dim 3\n1 0\n")
    with pytest.raises(ValueError):
        import_matrix(tmp_path / "bad.mat")


@settings(max_examples=20, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_ccr_random_vectors(a, b, c, d):
    ctx = FockContext(1, 40, 1.0)
    x, y = np.array([a, b]), np.array([c, d])
    lhs = weyl_operator(ctx, x) @ weyl_operator(ctx, y)
    rhs = weyl_operator(ctx, x + y).scaled(np.exp(-0.5j * sigma(x, y)))
    assert np.linalg.norm((lhs - rhs).compress(10), 2) < 1e-8
