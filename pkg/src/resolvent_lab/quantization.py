"""Weyl and Berezin quantization of levee sums and the twisted product.

Q^W(g∘P_V) = ∫_V đξ ĝ(ξ) e^{iφ(ξ)} is computed by tensor Gauss-Hermite
quadrature after factoring the real Gaussian envelope of each block of ĝ.
Berezin quantization folds the damping e^{-(ħ/4)|ξ|²} into ĝ before the
same pipeline runs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import polynomial as P
from . import subspace as sp
from scipy.special import roots_hermite

from .config import DEFAULT_QUAD_DEGREE
from .fock import FockContext, FockOperator, TruncationError, field_matrix
from .gauss import (GaussBlock, PolyGaussian, pg_fourier, pg_gaussian_damp, pg_multiply,
                    pg_partial_integral, pg_pullback, pg_scalar)
from .levee import CRElement, ExactProfileError, Levee, ResolventProfile, levee_product, rescale

_CHUNK = 2048
# per-axis node caps for the adaptive degree (1-D blocks, higher-dimensional blocks)
_MAX_DEGREE_1D = 600
_MAX_NODES_ND = 40000


class QuadratureError(ArithmeticError):
    """Doubled-degree error estimate above the requested threshold."""


@dataclass(frozen=True)
class QuadNodes:
    """Phase-space nodes x_ν (rows) and complex weights."""

    points: np.ndarray
    weights: np.ndarray


def _hermgauss_nd(k: int, degree: int):
    s, w = roots_hermite(degree)
    if k == 1:
        return s[:, None], w
    mesh = np.meshgrid(*([s] * k), indexing="ij")
    wm = np.meshgrid(*([w] * k), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1), np.prod(np.stack([m.ravel() for m in wm]), axis=0)


def _sqrt_inv(R: np.ndarray) -> np.ndarray:
    ev, U = np.linalg.eigh(R)
    return (U / np.sqrt(ev)) @ U.T


def block_nodes(blk: GaussBlock, basis: np.ndarray, degree: int):
    """Nodes and weights for ∫ đζ blk(ζ) F(B^T ζ) on a k-dimensional block.

    The real envelope exp(-ζ^T R ζ + Re b^T ζ) is absorbed into the
    Gauss-Hermite weight, leaving only the polynomial and the phase.
    """
    k = blk.dim
    R = blk.A.real
    mu = np.linalg.solve(R, blk.b.real) / 2.0
    L = _sqrt_inv(R)
    s, w = _hermgauss_nd(k, degree)
    zeta = mu + s @ L.T
    expo = -np.einsum("ni,ij,nj->n", zeta, blk.A, zeta) + zeta @ blk.b + np.sum(s * s, axis=1)
    wt = (2.0 * np.pi) ** (-k / 2.0) * abs(np.linalg.det(L)) * w * P.evaluate(blk.poly, zeta) * np.exp(expo)
    return zeta @ basis, wt


def effective_radius(blk: GaussBlock) -> float:
    """‖μ‖ + (3 + √deg)σ_max for the envelope of |blk|."""
    R = blk.A.real
    mu = np.linalg.solve(R, blk.b.real) / 2.0
    sig = 1.0 / np.sqrt(2.0 * np.linalg.eigvalsh(R)[0])
    return float(np.linalg.norm(mu) + (3.0 + np.sqrt(P.degree(blk.poly))) * sig)


def _symbol_transform(lv: Levee, damping: float) -> PolyGaussian:
    if isinstance(lv.g, ResolventProfile):
        raise ExactProfileError("exact rational profiles cannot be quantized; use generator_approx")
    gh = pg_fourier(lv.g)
    return pg_gaussian_damp(gh, damping) if damping else gh


def resolved_degree(ctx: FockContext, blk: GaussBlock, degree: int) -> int:
    """Per-axis node count resolving e^{iφ(x)} over the envelope of ``blk``.

    On states with at most N quanta the relevant field eigenvalues stay
    below Λ = √|ħ|(√(2N+1) + 4). In Gauss-Hermite variables the phase then
    oscillates with frequency k ≤ Λ‖R^{-1/2}‖, and n ≥ k²/4 + 40 nodes
    resolve e^{iks} against e^{-s²}. ``degree`` acts as a floor.
    """
    lam = np.sqrt(abs(ctx.hbar)) * (np.sqrt(2.0 * ctx.cutoff + 1.0) + 4.0)
    k = lam / np.sqrt(np.linalg.eigvalsh(blk.A.real)[0])
    need = int(np.ceil(k * k / 4.0)) + 40
    cap = _MAX_DEGREE_1D if blk.dim == 1 else max(degree, int(_MAX_NODES_ND ** (1.0 / blk.dim)))
    return max(degree, min(need, cap))


def quadrature_nodes(ctx: FockContext, f: CRElement, degree: int, damping: float = 0.0,
                     adaptive: bool = True, factor: int = 1):
    """All nonconstant quadrature nodes of f, plus the constant part.

    Each block uses ``factor`` times its (possibly adapted) per-axis degree.
    """
    const = 0j
    pts, wts = [], []
    for lv in f.levees:
        if lv.direction.dim == 0:
            const += lv.g.constant_value()
            continue
        gh = _symbol_transform(lv, damping)
        for blk in gh.blocks:
            amp = np.sqrt(abs(ctx.hbar)) * effective_radius(blk) / np.sqrt(2.0)
            if amp > ctx.guard * np.sqrt(ctx.cutoff):
                raise TruncationError(
                    f"symbol bulk reaches amplitude {amp:.3g} > {ctx.guard}·√N for N={ctx.cutoff}")
            deg = resolved_degree(ctx, blk, degree) if adaptive else degree
            x, w = block_nodes(blk, lv.direction.basis, factor * deg)
            keep = np.abs(w) > 1e-18 * np.max(np.abs(w))
            pts.append(x[keep])
            wts.append(w[keep])
    if not pts:
        return const, QuadNodes(np.zeros((0, 2 * ctx.modes)), np.zeros(0, complex))
    return const, QuadNodes(np.vstack(pts), np.concatenate(wts))


def _sum_weyl_1mode(ctx: FockContext, nodes: QuadNodes) -> np.ndarray:
    """Σ_ν w_ν E(x_ν) for one mode by rotating E(r e1) = U e^{irΛ} U^T.

    E(r(cos θ, sin θ))_kl = e^{-iθ'(k-l)} Σ_j U_kj U_lj e^{i r λ_j}
    with θ' = -sθ for the complex-structure sign s.
    """
    D = ctx.work_dim
    lam, U = np.linalg.eigh(field_matrix(ctx, [1.0, 0.0]).real)
    x = nodes.points
    r = np.hypot(x[:, 0], x[:, 1])
    s = ctx.sign * (1 if ctx.hbar > 0 else -1)
    theta = -s * np.arctan2(x[:, 1], x[:, 0])
    m = np.arange(-(D - 1), D)
    K = np.zeros((2 * D - 1, D), complex)
    for i in range(0, r.size, _CHUNK):
        sl = slice(i, i + _CHUNK)
        ph = np.exp(-1j * np.outer(m, theta[sl])) * nodes.weights[sl]
        K += ph @ np.exp(1j * np.outer(r[sl], lam))
    diff = np.subtract.outer(np.arange(D), np.arange(D)) + (D - 1)
    return np.einsum("kj,lj,klj->kl", U, U, K[diff], optimize=True)


def _sum_weyl_general(ctx: FockContext, nodes: QuadNodes) -> np.ndarray:
    D = ctx.work_dim
    out = np.zeros((D, D), complex)
    for x, w in zip(nodes.points, nodes.weights):
        lam, U = np.linalg.eigh(field_matrix(ctx, x))
        out += w * ((U * np.exp(1j * lam)) @ U.conj().T)
    return out


def _quantize_raw(ctx: FockContext, f: CRElement, degree: int, damping: float,
                  adaptive: bool, factor: int = 1) -> np.ndarray:
    if f.ambient_dim != 2 * ctx.modes:
        raise ValueError(f"symbol lives on R^{f.ambient_dim}, context expects R^{2 * ctx.modes}")
    const, nodes = quadrature_nodes(ctx, f, degree, damping, adaptive, factor)
    out = const * np.eye(ctx.work_dim, dtype=complex)
    if nodes.weights.size:
        fn = _sum_weyl_1mode if ctx.modes == 1 else _sum_weyl_general
        out = out + fn(ctx, nodes)
    return out


def _quantize(ctx, f, degree, damping, estimate_error, max_error, adaptive):
    work = _quantize_raw(ctx, f, degree, damping, adaptive)
    err = 0.0
    if estimate_error or max_error is not None:
        work2 = _quantize_raw(ctx, f, degree, damping, adaptive, factor=2)
        d = ctx.dim
        err = float(np.linalg.norm((work2 - work)[:d, :d], 2))
    if max_error is not None and err > max_error:
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds {max_error:.3g}")
    return FockOperator(ctx, work, err)


def weyl_quantize(ctx: FockContext, f: CRElement, degree: int = DEFAULT_QUAD_DEGREE,
                  estimate_error: bool = False, max_error: float | None = None,
                  route: str = "direct", adaptive: bool = True) -> FockOperator:
    """Q^W_ħ(f) on the truncated Fock space.

    Parameters
    ----------
    degree : int
        Gauss-Hermite points per axis (a floor when ``adaptive``).
    estimate_error : bool
        Attach ‖Q_degree − Q_{2 degree}‖ as ``error``.
    max_error : float, optional
        Raise :class:`QuadratureError` when the estimate exceeds it.
    route : {"direct", "scaled"}
        "scaled" quantizes f(√ħ ·) at ħ = 1 (same operator, better-scaled nodes).
    adaptive : bool
        Raise the per-block degree to resolve the field spectrum on the
        reported cutoff, see :func:`resolved_degree`.
    """
    if route == "scaled":
        return _scaled(ctx, f, degree, estimate_error, max_error, False, adaptive)
    return _quantize(ctx, f, degree, 0.0, estimate_error, max_error, adaptive)


def berezin_quantize(ctx: FockContext, f: CRElement, degree: int = DEFAULT_QUAD_DEGREE,
                     estimate_error: bool = False, max_error: float | None = None,
                     route: str = "direct", adaptive: bool = True) -> FockOperator:
    """Q^B_ħ(f): Weyl quadrature with e^{-(ħ/4)|ξ|²} folded into ĝ."""
    if not ctx.hbar > 0:
        raise ValueError("Berezin quantization needs ħ > 0")
    if route == "scaled":
        return _scaled(ctx, f, degree, estimate_error, max_error, True, adaptive)
    return _quantize(ctx, f, degree, ctx.hbar / 4.0, estimate_error, max_error, adaptive)


def _scaled(ctx, f, degree, estimate_error, max_error, berezin, adaptive):
    if not ctx.hbar > 0:
        raise ValueError("the scaling route needs ħ > 0")
    one = ctx.replace(hbar=1.0)
    fh = rescale(f, np.sqrt(ctx.hbar))
    op = _quantize(one, fh, degree, 0.25 if berezin else 0.0, estimate_error, max_error, adaptive)
    return FockOperator(ctx, op.work, op.error)


# ---------------------------------------------------------------------------
# twisted product

_JSIGMA_CACHE: dict = {}


def _jsigma(n: int) -> np.ndarray:
    """Matrix of σ(x, y) = x^T Jσ y, Jσ = [[0, -I], [I, 0]]."""
    if n not in _JSIGMA_CACHE:
        eye, z = np.eye(n), np.zeros((n, n))
        _JSIGMA_CACHE[n] = np.block([[z, -eye], [eye, z]])
    return _JSIGMA_CACHE[n]


def twisted_levee_product(l1: Levee, l2: Levee, hbar: float, n: int) -> Levee:
    """Symbol of Q^W(l1) Q^W(l2) as a levee on V1 + V2."""
    if l1.direction.dim == 0 or l2.direction.dim == 0:
        return levee_product(l1, l2)
    for lv in (l1, l2):
        if isinstance(lv.g, ResolventProfile):
            raise ExactProfileError("exact rational profiles do not enter twisted products")
    m = l1.ambient_dim
    B1, B2 = l1.direction.basis, l2.direction.basis
    U1, U2, U3 = sp.sum_decompose(l1.direction, l2.direction)
    W = sp.orthonormalize(np.vstack([U3.basis, U1.basis, U2.basis]), ambient_dim=m)
    kW, u1, u2, u3 = W.dim, U1.dim, U2.dim, U3.dim
    G = np.vstack([U1.basis, U2.basis, U3.basis])
    # γ = (W G^T)^{-1} ζ so that G^T γ = W^T ζ
    Lg = np.linalg.inv(W.basis @ G.T)
    # joint variables v = (ζ, τ); a = B1 x and c = B2 y
    Ma = np.zeros((l1.direction.dim, kW + u3))
    Mc = np.zeros((l2.direction.dim, kW + u3))
    g1_rows = Lg[:u1]
    g2_rows = Lg[u1:u1 + u2]
    g3_rows = Lg[u1 + u2:]
    Ma[:, :kW] = B1 @ U1.basis.T @ g1_rows
    Ma[:, kW:] = B1 @ U3.basis.T
    Mc[:, :kW] = B2 @ U2.basis.T @ g2_rows + B2 @ U3.basis.T @ g3_rows
    Mc[:, kW:] = -B2 @ U3.basis.T
    h1 = pg_fourier(l1.g)
    h2 = pg_fourier(l2.g)
    S = B1 @ _jsigma(n) @ B2.T
    Aph = 0.5j * hbar * (Ma.T @ S @ Mc)
    phase = PolyGaussian(kW + u3, [GaussBlock(0.5 * (Aph + Aph.T), np.zeros(kW + u3, complex),
                                               P.constant(1.0, kW + u3))], validate=False)
    joint = pg_multiply(pg_multiply(pg_pullback(h1, Ma, validate=False),
                                    pg_pullback(h2, Mc, validate=False), validate=False),
                        phase, validate=False)
    Ghat = pg_partial_integral(joint, list(range(kW, kW + u3))) if u3 else \
        PolyGaussian(kW, joint.blocks)
    Ghat = pg_scalar(Ghat, abs(np.linalg.det(Lg)))
    return Levee(W, pg_fourier(Ghat, inverse=True))


def twisted_product(f1: CRElement, f2: CRElement, hbar: float, n: int) -> CRElement:
    """f1 ⋆_ħ f2 with Q^W(f1) Q^W(f2) = Q^W(f1 ⋆_ħ f2)."""
    if f1.ambient_dim != 2 * n or f2.ambient_dim != 2 * n:
        raise ValueError("symbols must live on R^{2n}")
    return CRElement(2 * n, [twisted_levee_product(a, b, hbar, n) for a in f1.levees for b in f2.levees])
