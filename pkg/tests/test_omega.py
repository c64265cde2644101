import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resolvent_lab.levee import ae_value
from resolvent_lab.omega import (Rate, StructuredPath, UnsupportedRateError, absorption, absorption_diagnostics,
                                 affine_subset, ball_membership, bump_probe, character_consistency, convergence,
                                 density_chain, density_path, neighborhood_basis_element, probe_dictionary,
                                 refuting_probe, sample_indices)
from resolvent_lab.subspace import AffineSubspace, Subspace, orthonormalize

E = np.eye(3)


def brute_ball(cand, center, r):
    """Rank test for V' ⊆ V and least-squares distance of w' − w to V."""
    Vc, V = cand.direction.basis, center.direction.basis
    if Vc.shape[0]:
        if np.linalg.matrix_rank(np.vstack([V, Vc]), tol=1e-8) > V.shape[0]:
            return False
    diff = cand.offset - center.offset
    if V.shape[0]:
        coef, *_ = np.linalg.lstsq(V.T, diff, rcond=None)
        diff = diff - V.T @ coef
    return bool(np.linalg.norm(diff) < r)


def test_ball_membership_examples():
    center = AffineSubspace.through(Subspace.span(E[0], E[1]), [0.0, 0.0, 1.0])
    assert ball_membership(AffineSubspace.point([5.0, -3.0, 1.2]), center, 0.5)
    assert not ball_membership(AffineSubspace.point([0.0, 0.0, 2.0]), center, 0.5)
    assert not ball_membership(AffineSubspace.through(Subspace.span(E[2]), [0, 0, 0]), center, 10.0)
    assert ball_membership(AffineSubspace.point([0.0, 0.0, 1.5]), center, 0.5, closed=True)
    with pytest.raises(ValueError):
        ball_membership(center, center, 0.0)


def test_ball_membership_against_oracle(rng):
    for _ in range(300):
        k = int(rng.integers(0, 4))
        V = orthonormalize(rng.normal(size=(k, 3)), ambient_dim=3)
        center = AffineSubspace.through(V, rng.normal(size=3))
        kc = int(rng.integers(0, k + 1))
        inside = rng.random() < 0.7
        rows = (rng.normal(size=(kc, k)) @ V.basis) if inside and k else rng.normal(size=(kc, 3))
        cand = AffineSubspace.through(orthonormalize(rows, ambient_dim=3), rng.normal(size=3))
        r = float(rng.uniform(0.1, 3.0))
        assert ball_membership(cand, center, r) == brute_ball(cand, center, r)


def test_neighborhood_basis_element():
    center = AffineSubspace.through(Subspace.span(E[0], E[1]), [0.0, 0.0, 0.0])
    sub = AffineSubspace.through(Subspace.span(E[0]), [0.0, 0.0, 0.0])
    member = neighborhood_basis_element(center, 1.0, [(sub, 0.5)])
    assert member(AffineSubspace.point([0.0, 3.0, 0.2]))
    assert not member(AffineSubspace.point([0.0, 0.1, 0.2]))
    with pytest.raises(ValueError):
        neighborhood_basis_element(sub, 1.0, [(center, 0.5)])


def test_affine_subset():
    line = AffineSubspace.through(Subspace.span(E[0]), [0, 1, 0])
    plane = AffineSubspace.through(Subspace.span(E[0], E[1]), [0, 0, 0])
    assert affine_subset(line, plane) and not affine_subset(plane, line)


def test_rate_parities():
    r = Rate({1: 1.0, 0: 2.0}, alternating=True)
    assert r(2) == 4.0 and r(3) == -5.0
    assert r.parity_coefficients(1) == {0: -2.0, 1: -1.0}
    with pytest.raises(UnsupportedRateError):
        Rate({0.5: 1.0})


@pytest.mark.parametrize("k", [1, 2, 3])
def test_density_path_converges(rng, k):
    V = orthonormalize(rng.normal(size=(k, 3)), ambient_dim=3)
    target = AffineSubspace.through(V, rng.normal(size=3))
    assert convergence(density_path(target), target).converges
    chain = density_chain(target)
    assert len(chain) == k and chain[-1].base.dim == 0


def _nonconvergent_cases():
    plane = AffineSubspace.through(Subspace.span(E[0], E[1]), [0, 0, 1.0])
    line_base = AffineSubspace.through(Subspace.span(E[0]), [0, 0, 1.0])
    point = AffineSubspace.point([0, 0, 1.0])
    return {
        "bounded": (StructuredPath(line_base, (E[1],), (Rate.const(2.0),)), plane),
        # (−1)^i·i + i vanishes on odd indices
        "alternating": (StructuredPath(line_base, (E[1], E[1]), (Rate({1: 1.0}, True), Rate.linear())), plane),
        "decaying": (StructuredPath(line_base, (E[1],), (Rate({-1: 1.0}),)), plane),
        "two-directions": (StructuredPath(point, (E[0], E[1]), (Rate.linear(), Rate.const(1.0))), plane),
        "oversized": (StructuredPath(point, (E[0],), (Rate.linear(),)), plane),
    }


@pytest.mark.parametrize("name", list(_nonconvergent_cases()))
def test_absorbed_but_not_convergent(name):
    path, target = _nonconvergent_cases()[name]
    assert absorption(path, target).absorbed
    res = convergence(path, target)
    assert res.verdict == "absorbed-only"
    wit = res.witness["point"]
    assert wit.dim < target.dim and affine_subset(wit, target)
    rep = character_consistency(path, target, [refuting_probe(res)])
    assert rep.refuting == (0,)


def test_not_absorbed():
    plane = AffineSubspace.through(Subspace.span(E[0], E[1]), [0, 0, 1.0])
    escape = StructuredPath(AffineSubspace.point([0, 0, 1.0]), (E[2],), (Rate.linear(),))
    assert convergence(escape, plane).verdict == "not-absorbed"
    wrong_dir = StructuredPath(AffineSubspace.through(Subspace.span(E[2]), [0, 0, 0]), (), ())
    assert not absorption(wrong_dir, plane)


def test_character_consistency_on_convergent_path(rng):
    target = AffineSubspace.through(Subspace.span(E[0], E[2]), [0, 0.5, 0])
    rep = character_consistency(density_path(target), target, probe_dictionary(3, seed=1))
    assert rep.max_final_deviation <= 1e-3
    assert rep.refuting == ()


def test_bump_probe_peaks_on_point():
    pt = AffineSubspace.through(Subspace.span(E[0]), [0, 1.0, 2.0])
    assert np.isclose(ae_value(bump_probe(pt), pt), 1.0)


def test_sample_indices_cover_both_parities():
    idx = sample_indices(1000, 8)
    assert {i % 2 for i in idx} == {0, 1} and max(idx) >= 1000


def test_absorption_diagnostics():
    target = AffineSubspace.through(Subspace.span(E[0]), [0, 0, 1.0])
    pts = [density_path(target).point(i) for i in range(1, 30)]
    diag = absorption_diagnostics(pts, target)
    assert max(diag["direction_residual"]) < 1e-12
    assert max(diag["offset_residual"]) < 1e-12
    assert diag["minimal_absorber_dim_estimate"] == 1
    assert diag["verdict"] is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_witness_is_absorbing_subfamily(seed, k):
    rng = np.random.default_rng(seed)
    V = orthonormalize(rng.normal(size=(k, 3)), ambient_dim=3)
    target = AffineSubspace.through(V, rng.normal(size=3))
    U = Subspace(3, V.basis[:-1])
    path = StructuredPath(AffineSubspace.through(U, target.offset), (V.basis[-1],), (Rate.const(float(rng.normal())),))
    res = convergence(path, target)
    assert res.verdict == "absorbed-only"
    sub = StructuredPath(path.base, path.escape_directions, path.rates)
    assert absorption(sub, res.witness["point"]).absorbed
