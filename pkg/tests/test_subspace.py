import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from resolvent_lab import subspace as sp
from resolvent_lab.subspace import AffineSubspace, DimensionError, Subspace, orthonormalize

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def matrices(max_rows=4, m=4):
    return st.integers(1, max_rows).flatmap(lambda k: arrays(float, (k, m), elements=finite))


def test_span_drops_dependent_vectors():
    V = Subspace.span([1, 0, 0], [2, 0, 0], [0, 1, 0])
    assert V.dim == 2
    assert np.allclose(V.basis @ V.basis.T, np.eye(2))


def test_orthonormalize_keeps_input_order():
    V = orthonormalize(np.array([[0.0, 3.0, 0.0], [1.0, 1.0, 0.0]]))
    assert np.allclose(V.basis[0], [0, 1, 0])
    assert np.allclose(V.basis[1], [1, 0, 0])


def test_zero_and_full():
    assert Subspace.zero(3).dim == 0
    assert np.allclose(Subspace.full(3).projector, np.eye(3))
    assert Subspace.zero(3).complement().dim == 3


def test_projection_example():
    V = Subspace.span([1, 1, 0])
    assert np.allclose(sp.project(V, [1, 0, 0]), [0.5, 0.5, 0])


def test_intersection_and_sum_example():
    V1 = Subspace.span([1, 0, 0], [0, 1, 0])
    V2 = Subspace.span([0, 1, 0], [0, 0, 1])
    I = sp.intersect(V1, V2)
    assert I.dim == 1 and np.isclose(abs(I.basis[0, 1]), 1.0)
    assert sp.subspace_sum(V1, V2).dim == 3


def test_sum_decompose_parts():
    V1 = Subspace.span([1, 0, 0, 0], [0, 1, 0, 0])
    V2 = Subspace.span([0, 1, 0, 0], [0, 0, 1, 0])
    U1, U2, U3 = sp.sum_decompose(V1, V2)
    assert (U1.dim, U2.dim, U3.dim) == (1, 1, 1)
    assert sp.equal(sp.subspace_sum(U1, U2, U3), sp.subspace_sum(V1, V2))
    assert sp.contains(V1, U1) and sp.contains(V2, U2)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        sp.contains(Subspace.zero(2), Subspace.zero(3))


def test_affine_offset_must_be_orthogonal():
    V = Subspace.span([1, 0])
    with pytest.raises(ValueError):
        AffineSubspace(V, np.array([1.0, 1.0]))
    A = AffineSubspace.through(V, [3.0, 2.0])
    assert np.allclose(A.offset, [0, 2])


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_projector_idempotent_symmetric(M):
    P = orthonormalize(M, ambient_dim=4).projector
    assert np.allclose(P @ P, P, atol=1e-9)
    assert np.allclose(P, P.T, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_complement_is_orthogonal_and_complete(M):
    V = orthonormalize(M, ambient_dim=4)
    W = V.complement()
    assert V.dim + W.dim == 4
    assert np.allclose(V.projector + W.projector, np.eye(4), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(matrices(), matrices())
def test_intersection_dimension_formula(A, B):
    V1 = orthonormalize(A, ambient_dim=4)
    V2 = orthonormalize(B, ambient_dim=4)
    I = sp.intersect(V1, V2)
    S = sp.subspace_sum(V1, V2)
    assert I.dim + S.dim == V1.dim + V2.dim
    assert sp.contains(V1, I, 1e-6) and sp.contains(V2, I, 1e-6)


@settings(max_examples=60, deadline=None)
@given(matrices(), matrices())
def test_relative_complement(A, B):
    V = orthonormalize(np.vstack([A, B]), ambient_dim=4)
    U = orthonormalize(A, ambient_dim=4)
    R = sp.relative_complement(V, U)
    assert R.dim + U.dim == V.dim
    if R.dim and U.dim:
        assert np.allclose(R.basis @ U.basis.T, 0, atol=1e-8)
