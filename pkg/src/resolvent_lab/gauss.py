"""Closed symbolic calculus for polynomial times complex-Gaussian functions.

A :class:`PolyGaussian` on R^k is a finite sum of blocks
``p(y) exp(-y^T A y + b^T y)`` with ``A`` complex symmetric and ``p`` a
sparse polynomial. Public values have ``Re A`` positive definite, so they
vanish at infinity. The calculus is closed under products, derivatives,
Fourier transforms (normalized with đy = (2π)^{-k/2} d^k y), heat flow
and partial Gaussian integration.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import cubature

from . import polynomial as P
from .config import DEFAULT_SEED, DEFAULT_TOL
from .search import maximize_modulus


class DivergentIntegralError(ArithmeticError):
    """Gaussian integral whose real quadratic part is not positive definite."""


class NotPositiveDefiniteError(ValueError):
    """A public PolyGaussian block has Re A not positive definite."""


@dataclass(frozen=True, eq=False)
class GaussBlock:
    """One Gaussian envelope with its polynomial prefactor."""

    A: np.ndarray
    b: np.ndarray
    poly: dict

    @property
    def dim(self) -> int:
        return self.b.size


def _sym(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    return 0.5 * (A + A.T)


def _min_real_eig(A: np.ndarray) -> float:
    if A.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(0.5 * (A.real + A.real.T))[0])


def _peak_estimate(blk: GaussBlock) -> float:
    """Rough size |c| exp(Re b^T (Re A)^{-1} Re b / 4) of a block."""
    c = max(abs(v) for v in blk.poly.values())
    if blk.dim == 0:
        return c
    R = blk.A.real
    try:
        if _min_real_eig(blk.A) <= 0:
            return np.inf
        e = float(blk.b.real @ np.linalg.solve(R, blk.b.real)) / 4.0
    except np.linalg.LinAlgError:
        return np.inf
    return c * np.exp(min(e, 700.0))


class PolyGaussian:
    """Finite sum of polynomial times complex-Gaussian blocks on R^k.

    Parameters
    ----------
    dim : int
        Number of variables k (0 means a plain complex constant).
    blocks : iterable of GaussBlock
    validate : bool
        Check ``Re A`` positive definite on every block. Internal joint
        forms in intermediate computations skip this check.
    """

    __slots__ = ("dim", "blocks", "__dict__")

    def __init__(self, dim: int, blocks: Iterable[GaussBlock] = (), validate: bool = True,
                 tol=DEFAULT_TOL):
        self.dim = int(dim)
        self.blocks = tuple(_normalize(self.dim, blocks, tol, validate))
        if validate:
            for blk in self.blocks:
                if self.dim and _min_real_eig(blk.A) <= 0:
                    raise NotPositiveDefiniteError("Re A must be positive definite")

    # construction -----------------------------------------------------
    @classmethod
    def from_terms(cls, dim: int, terms) -> "PolyGaussian":
        """Build from ``(coeff, monomial, A, b)`` tuples."""
        blocks = []
        for coeff, mono, A, b in terms:
            mono = tuple(int(m) for m in mono) if dim else ()
            if len(mono) != dim:
                raise ValueError("monomial length must equal dim")
            A = np.zeros((dim, dim)) if A is None else A
            b = np.zeros(dim) if b is None else b
            blocks.append(GaussBlock(_sym(np.reshape(A, (dim, dim))),
                                     np.asarray(b, complex).reshape(dim), {mono: complex(coeff)}))
        return cls(dim, blocks)

    @classmethod
    def gaussian(cls, A, b=None, coeff: complex = 1.0, poly: dict | None = None) -> "PolyGaussian":
        """``coeff * poly(y) * exp(-y^T A y + b^T y)``; scalar A means A·I in 1-D."""
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        k = A.shape[0]
        b = np.zeros(k, complex) if b is None else np.asarray(b, complex).reshape(k)
        poly = P.constant(1.0, k) if poly is None else poly
        return cls(k, [GaussBlock(_sym(A), b, P.scale(poly, coeff))])

    @classmethod
    def constant(cls, c: complex) -> "PolyGaussian":
        return cls(0, [GaussBlock(np.zeros((0, 0), complex), np.zeros(0, complex), P.constant(c, 0))])

    @classmethod
    def zero(cls, dim: int) -> "PolyGaussian":
        return cls(dim, [])

    # views -------------------------------------------------------------
    @property
    def terms(self) -> list:
        """Flattened ``(coeff, monomial, A, b)`` tuples."""
        out = []
        for blk in self.blocks:
            for mono, c in sorted(blk.poly.items()):
                out.append((c, mono, blk.A, blk.b))
        return out

    def is_zero(self) -> bool:
        return not self.blocks

    def constant_value(self) -> complex:
        if self.dim:
            raise ValueError("not a constant")
        return sum((blk.poly.get((), 0.0) for blk in self.blocks), 0j)

    def degree(self) -> int:
        return max((P.degree(b.poly) for b in self.blocks), default=0)

    # evaluation --------------------------------------------------------
    def __call__(self, Y) -> np.ndarray | complex:
        Y = np.asarray(Y, dtype=float)
        single = Y.ndim == 1 and self.dim > 0 or Y.ndim == 0
        if self.dim == 0:
            n = 1 if Y.ndim < 2 else Y.shape[0]
            out = np.full(n, self.constant_value() if self.blocks else 0j)
            return complex(out[0]) if Y.ndim < 2 else out
        Y = Y.reshape(-1, self.dim)
        out = np.zeros(Y.shape[0], complex)
        for blk in self.blocks:
            expo = -np.einsum("ni,ij,nj->n", Y, blk.A, Y) + Y @ blk.b
            out += P.evaluate(blk.poly, Y) * np.exp(expo)
        return complex(out[0]) if single else out

    @cached_property
    def _derivs(self) -> list:
        return [pg_derive(self, j) for j in range(self.dim)]

    def gradient(self, Y) -> np.ndarray:
        """Complex gradient at the rows of ``Y``, shape (npts, k)."""
        Y = np.atleast_2d(np.asarray(Y, float))
        if self.dim == 0:
            return np.zeros((Y.shape[0], 0), complex)
        return np.stack([d(Y) for d in self._derivs], axis=1)

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, PolyGaussian):
            return pg_add(self, other)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, PolyGaussian):
            return pg_add(self, other, -1.0)
        return NotImplemented

    def __neg__(self):
        return pg_scalar(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, PolyGaussian):
            return pg_multiply(self, other)
        if np.isscalar(other):
            return pg_scalar(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> "PolyGaussian":
        return pg_conj(self)

    def __repr__(self) -> str:
        return f"PolyGaussian(dim={self.dim}, blocks={len(self.blocks)}, terms={len(self.terms)})"


# normalization -------------------------------------------------------------

def _same(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
    return x.shape == y.shape and (x.size == 0 or np.max(np.abs(x - y)) <= tol * max(1.0, np.max(np.abs(x))))


def _normalize(dim: int, blocks: Iterable[GaussBlock], tol, validate: bool) -> list:
    merged: list[GaussBlock] = []
    for blk in blocks:
        A = _sym(blk.A).reshape(dim, dim)
        b = np.asarray(blk.b, complex).reshape(dim)
        poly = {tuple(a): complex(c) for a, c in blk.poly.items() if c != 0}
        if not poly:
            continue
        for i, m in enumerate(merged):
            if _same(m.A, A, tol.merge) and _same(m.b, b, tol.merge):
                merged[i] = GaussBlock(m.A, m.b, P.add(m.poly, poly))
                break
        else:
            merged.append(GaussBlock(A, b, poly))
    merged = [m for m in merged if m.poly]
    if not merged or not validate:
        return merged
    peaks = [_peak_estimate(m) for m in merged]
    top = max(peaks)
    return [m for m, p in zip(merged, peaks) if p >= tol.drop * top]


def _raw(dim: int, blocks) -> PolyGaussian:
    return PolyGaussian(dim, blocks, validate=False)


def _check_dim(f: PolyGaussian, g: PolyGaussian) -> None:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")


# algebra -------------------------------------------------------------------

def pg_add(f: PolyGaussian, g: PolyGaussian, s: complex = 1.0) -> PolyGaussian:
    _check_dim(f, g)
    blocks = list(f.blocks) + [GaussBlock(b.A, b.b, P.scale(b.poly, s)) for b in g.blocks]
    return PolyGaussian(f.dim, blocks)


def pg_scalar(f: PolyGaussian, s: complex) -> PolyGaussian:
    return PolyGaussian(f.dim, [GaussBlock(b.A, b.b, P.scale(b.poly, s)) for b in f.blocks])


def pg_sum(items: Sequence[PolyGaussian], dim: int) -> PolyGaussian:
    blocks = [b for it in items for b in it.blocks]
    return PolyGaussian(dim, blocks)


def pg_multiply(f: PolyGaussian, g: PolyGaussian, validate: bool = True) -> PolyGaussian:
    """Pointwise product; exponents and quadratic forms add."""
    _check_dim(f, g)
    blocks = [GaussBlock(x.A + y.A, x.b + y.b, P.mul(x.poly, y.poly))
              for x in f.blocks for y in g.blocks]
    return PolyGaussian(f.dim, blocks, validate=validate)


def pg_conj(f: PolyGaussian) -> PolyGaussian:
    """Complex conjugate function y -> conj(f(y)) for real y."""
    return PolyGaussian(f.dim, [GaussBlock(b.A.conj(), b.b.conj(),
                                           {a: np.conj(c) for a, c in b.poly.items()})
                                for b in f.blocks])


def pg_derive(f: PolyGaussian, j: int) -> PolyGaussian:
    """Exact partial derivative in coordinate ``j`` (0-based)."""
    if not 0 <= j < f.dim:
        raise IndexError(f"coordinate {j} out of range for dim {f.dim}")
    blocks = []
    for blk in f.blocks:
        # d/dy_j exp(-y^T A y + b^T y) = (b_j - 2 (A y)_j) exp(...)
        lin = P.linear(-2.0 * blk.A[j], blk.b[j])
        poly = P.add(P.derive(blk.poly, j), P.mul(blk.poly, lin))
        blocks.append(GaussBlock(blk.A, blk.b, poly))
    return PolyGaussian(f.dim, blocks)


def pg_pullback(f: PolyGaussian, M, c=None, validate: bool = True) -> PolyGaussian:
    """The function ``v -> f(M v + c)`` where ``M`` has shape (k, k_new)."""
    M = np.asarray(M, dtype=float)
    k, k_new = M.shape
    if k != f.dim:
        raise ValueError("matrix rows must equal f.dim")
    c = np.zeros(k) if c is None else np.asarray(c, dtype=float)
    blocks = []
    for blk in f.blocks:
        A = M.T @ blk.A @ M
        b = M.T @ (blk.b - 2.0 * blk.A @ c)
        const = np.exp(-c @ blk.A @ c + blk.b @ c) if k else 1.0
        poly = P.affine_substitute(blk.poly, M, c) if k else {(0,) * k_new: blk.poly[()]}
        blocks.append(GaussBlock(A, b, P.scale(poly, const)))
    return PolyGaussian(k_new, blocks, validate=validate)


def pg_scale(f: PolyGaussian, s: float) -> PolyGaussian:
    """The function y -> f(s y)."""
    return pg_pullback(f, s * np.eye(f.dim)) if f.dim else f


def _det_inv_sqrt(A: np.ndarray) -> complex:
    # principal branch per eigenvalue; all eigenvalues have Re > 0
    ev = np.linalg.eigvals(A)
    return complex(np.prod(1.0 / np.sqrt(ev.astype(complex))))


def _integrate_block(blk: GaussBlock, S: list, R: list) -> GaussBlock:
    A, b = blk.A, blk.b
    ASS = A[np.ix_(S, S)]
    if _min_real_eig(ASS) <= 0:
        raise DivergentIntegralError("Re A restricted to the integrated coordinates is not positive definite")
    ASR = A[np.ix_(S, R)]
    ARR = A[np.ix_(R, R)]
    bS, bR = b[S], b[R]
    Ainv = np.linalg.inv(ASS)
    Ainv = 0.5 * (Ainv + Ainv.T)
    h = Ainv @ bS / 2.0
    H = -Ainv @ ASR
    A_new = ARR - ASR.T @ Ainv @ ASR
    b_new = bR - ASR.T @ Ainv @ bS
    s = len(S)
    const = np.exp(bS @ Ainv @ bS / 4.0) * _det_inv_sqrt(ASS) * 2.0 ** (-s / 2.0)
    # substitute y_S = t + h + H r, y_R = r with new variables (t, r)
    k = s + len(R)
    L = np.zeros((k, k), complex)
    cvec = np.zeros(k, complex)
    for a, i in enumerate(S):
        L[i, a] = 1.0
        L[i, s:] = H[a]
        cvec[i] = h[a]
    for a, i in enumerate(R):
        L[i, s + a] = 1.0
    q = P.affine_substitute(blk.poly, L, cvec)
    moments = P.gaussian_moments(Ainv / 2.0, {a[:s] for a in q})
    poly: dict = {}
    for a, c in q.items():
        m = moments[a[:s]]
        if m != 0:
            key = a[s:]
            poly[key] = poly.get(key, 0.0) + c * m * const
    return GaussBlock(A_new, b_new, poly)


def pg_partial_integral(f: PolyGaussian, S: Sequence[int], validate: bool = True) -> PolyGaussian:
    """Integrate ``f`` over the coordinates ``S`` with the đ normalization.

    Raises
    ------
    DivergentIntegralError
        When some block has ``Re A`` restricted to ``S`` not positive definite.
    """
    S = sorted(set(int(i) for i in S))
    if any(i < 0 or i >= f.dim for i in S):
        raise IndexError("integration index out of range")
    R = [i for i in range(f.dim) if i not in S]
    if not S:
        return f
    blocks = [_integrate_block(blk, S, R) for blk in f.blocks]
    return PolyGaussian(len(R), blocks, validate=validate)


def _fourier_block(blk: GaussBlock, inverse: bool) -> GaussBlock:
    k = blk.dim
    off = (-0.5j if inverse else 0.5j) * np.eye(k)
    A = np.block([[blk.A, off], [off, np.zeros((k, k))]])
    b = np.concatenate([blk.b, np.zeros(k)])
    poly = P.embed(blk.poly, list(range(k)), 2 * k)
    return _integrate_block(GaussBlock(A, b, poly), list(range(k)), list(range(k, 2 * k)))


def pg_fourier(f: PolyGaussian, inverse: bool = False) -> PolyGaussian:
    """Fourier transform ``∫ đy f(y) e^{∓ i x·y}`` (minus sign for forward)."""
    if f.dim == 0:
        return f
    for blk in f.blocks:
        if _min_real_eig(blk.A) <= 0:
            raise DivergentIntegralError("Fourier transform needs Re A positive definite")
    return PolyGaussian(f.dim, [_fourier_block(blk, inverse) for blk in f.blocks])


def pg_heat_flow(f: PolyGaussian, hbar: float) -> PolyGaussian:
    """``(e^{-(ħ/4)|ξ|²} f̂)ˇ``, the heat operator e^{(ħ/4)Δ} applied to f."""
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    if f.dim == 0:
        return f
    damp = PolyGaussian.gaussian(0.25 * hbar * np.eye(f.dim))
    return pg_fourier(pg_multiply(pg_fourier(f), damp), inverse=True)


def pg_gaussian_damp(f: PolyGaussian, c: float) -> PolyGaussian:
    """Multiply by ``exp(-c |y|^2)``."""
    if f.dim == 0 or c == 0:
        return f
    return pg_multiply(f, PolyGaussian.gaussian(c * np.eye(f.dim)))


# norms ---------------------------------------------------------------------

def block_geometry(blk: GaussBlock):
    """Centre, width and polynomial shift of the envelope |block|."""
    R = blk.A.real
    mu = np.linalg.solve(R, blk.b.real) / 2.0
    sigma = 1.0 / np.sqrt(2.0 * np.linalg.eigvalsh(R)[0])
    return mu, sigma, np.sqrt(P.degree(blk.poly))


def effective_box(f: PolyGaussian, nsig: float = 6.0):
    """Box covering the bulk of every block (centre ± (nsig + √deg)σ)."""
    lo = np.full(f.dim, np.inf)
    hi = np.full(f.dim, -np.inf)
    for blk in f.blocks:
        mu, sigma, shift = block_geometry(blk)
        r = (nsig + 2.0 * shift) * sigma
        lo = np.minimum(lo, mu - r)
        hi = np.maximum(hi, mu + r)
    if not f.blocks:
        lo, hi = -np.ones(f.dim), np.ones(f.dim)
    return lo, hi


@dataclass(frozen=True)
class NormReport:
    """Sup-norm bracket and Fourier L1 estimate of a PolyGaussian."""

    sup: float
    sup_upper: float
    argmax: np.ndarray
    l1_fourier: float
    l1_error: float

    def __iter__(self):
        return iter((self.sup, self.l1_fourier))


def pg_sup(f: PolyGaussian, seed: int = DEFAULT_SEED, starts=()):
    """Multistart bounded maximization of |f| on its effective box."""
    if f.dim == 0:
        v = abs(f.constant_value()) if f.blocks else 0.0
        return v, v, np.zeros(0)
    if not f.blocks:
        return 0.0, 0.0, np.zeros(f.dim)
    lo, hi = effective_box(f)
    centres = [block_geometry(b)[0] for b in f.blocks]
    res = maximize_modulus(f, f.gradient, lo, hi, starts=list(centres) + list(starts), seed=seed)
    # per-cell Taylor bound |f(g)| + |∇f(g)| d + ½ max|∇²f| d² on a finer grid
    per = int(max(3, min(4001, np.floor(40000 ** (1.0 / f.dim)))))
    axes = [np.linspace(l, h, per) for l, h in zip(lo, hi)]
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    vals = np.abs(f(mesh))
    grads = np.linalg.norm(np.abs(f.gradient(mesh)), axis=1)
    hess = np.sqrt(sum(np.abs(d.gradient(mesh)) ** 2 for d in f._derivs).sum(axis=1))
    d = 0.5 * float(np.linalg.norm((hi - lo) / (per - 1)))
    upper = max(res.value, float(np.max(vals + grads * d)) + 0.5 * float(hess.max()) * d * d)
    return res.value, upper, res.argmax


def pg_l1(f: PolyGaussian, rtol: float = 1e-7):
    """∫ |f(y)| đy by adaptive cubature over the effective box."""
    if f.dim == 0:
        return (abs(f.constant_value()) if f.blocks else 0.0), 0.0
    if not f.blocks:
        return 0.0, 0.0
    lo, hi = effective_box(f, nsig=9.0)
    norm = (2.0 * np.pi) ** (-f.dim / 2.0)
    res = cubature(lambda Y: np.abs(f(Y)), lo, hi, rtol=rtol, atol=1e-14, max_subdivisions=20000)
    return float(res.estimate) * norm, float(res.error) * norm


def pg_norms(f: PolyGaussian, seed: int = DEFAULT_SEED) -> NormReport:
    """Sup norm of f and the L1 norm of its Fourier transform."""
    sup, upper, arg = pg_sup(f, seed)
    l1, err = pg_l1(pg_fourier(f))
    return NormReport(sup, upper, arg, l1, err)
