"""Levees g∘P and finite sums of them.

A :class:`Levee` pairs a direction subspace V (the range of P) with a
profile g on V's coordinates. A :class:`CRElement` is a finite sum of
levees with pairwise distinct directions. Profiles are either
:class:`~resolvent_lab.gauss.PolyGaussian` values (closed under every
operation) or exact :class:`ResolventProfile` values, which carry the
rational generators 1/(iλ − x·y) for evaluation and norms only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import subspace as sp
from .config import DEFAULT_SEED, DEFAULT_TOL
from .gauss import (PolyGaussian, block_geometry, pg_add, pg_conj, pg_derive,
                    pg_heat_flow, pg_multiply, pg_pullback, pg_scalar, pg_scale, pg_sup)
from .search import maximize_modulus
from .subspace import AffineSubspace, Subspace


class ExactProfileError(TypeError):
    """Operation not available on exact rational profiles."""


# ---------------------------------------------------------------------------
# exact rational profiles

@dataclass(frozen=True, eq=False)
class ResolventProfile:
    """One-variable profile ``sum_j c_j / (i λ_j - s_j t)`` plus a smooth part.

    Parameters
    ----------
    terms : tuple of (complex, float, float)
        ``(c, λ, s)`` triples with λ and s nonzero.
    smooth : PolyGaussian or None
        Optional one-dimensional PolyGaussian summand.
    """

    terms: tuple = ()
    smooth: PolyGaussian | None = None
    dim: int = field(default=1, init=False)

    def __post_init__(self):
        clean = []
        for c, lam, s in self.terms:
            if lam == 0 or s == 0:
                raise ValueError("λ and scale must be nonzero")
            if c != 0:
                clean.append((complex(c), float(lam), float(s)))
        object.__setattr__(self, "terms", tuple(clean))
        if self.smooth is not None and (self.smooth.dim != 1 or self.smooth.is_zero()):
            if self.smooth.dim != 1:
                raise ValueError("smooth part must be one-dimensional")
            object.__setattr__(self, "smooth", None)

    def is_zero(self) -> bool:
        return not self.terms and self.smooth is None

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=float)
        single = Y.ndim <= 1 and Y.size == 1
        t = Y.reshape(-1)
        out = np.zeros(t.size, complex)
        for c, lam, s in self.terms:
            out += c / (1j * lam - s * t)
        if self.smooth is not None:
            out += self.smooth(t[:, None])
        return complex(out[0]) if single else out

    def gradient(self, Y) -> np.ndarray:
        t = np.asarray(Y, dtype=float).reshape(-1)
        out = np.zeros(t.size, complex)
        for c, lam, s in self.terms:
            out += c * s / (1j * lam - s * t) ** 2
        if self.smooth is not None:
            out += self.smooth.gradient(t[:, None])[:, 0]
        return out[:, None]

    def conj(self) -> "ResolventProfile":
        # conj(c/(iλ - s t)) = -conj(c)/(iλ + s t)
        sm = None if self.smooth is None else pg_conj(self.smooth)
        return ResolventProfile(tuple((-np.conj(c), lam, -s) for c, lam, s in self.terms), sm)

    def scaled(self, a: float) -> "ResolventProfile":
        """The profile t -> g(a t) for real nonzero a."""
        sm = None if self.smooth is None else pg_scale(self.smooth, a)
        return ResolventProfile(tuple((c, lam, s * a) for c, lam, s in self.terms), sm)

    def times(self, z: complex) -> "ResolventProfile":
        sm = None if self.smooth is None else pg_scalar(self.smooth, z)
        return ResolventProfile(tuple((c * z, lam, s) for c, lam, s in self.terms), sm)

    def plus(self, other) -> "ResolventProfile":
        if isinstance(other, PolyGaussian):
            sm = other if self.smooth is None else pg_add(self.smooth, other)
            return ResolventProfile(self.terms, sm)
        sm = self.smooth
        if other.smooth is not None:
            sm = other.smooth if sm is None else pg_add(sm, other.smooth)
        # merge identical poles
        merged: dict = {}
        for c, lam, s in self.terms + other.terms:
            key = (lam / s,)
            for k0 in merged:
                if abs(k0[0] - key[0]) <= 1e-14 * max(1.0, abs(key[0])):
                    key = k0
                    break
            c0, lam0, s0 = merged.get(key, (0j, lam, s))
            merged[key] = (c0 + c * s0 / s, lam0, s0)
        return ResolventProfile(tuple(merged.values()), sm)

    def geometry(self):
        """Centre and radius used to size search boxes."""
        r = max((abs(lam / s) for _, lam, s in self.terms), default=1.0)
        lo, hi = -10.0 * r, 10.0 * r
        if self.smooth is not None:
            for blk in self.smooth.blocks:
                mu, sig, sh = block_geometry(blk)
                lo = min(lo, mu[0] - (6 + 2 * sh) * sig)
                hi = max(hi, mu[0] + (6 + 2 * sh) * sig)
        return np.array([(lo + hi) / 2]), (hi - lo) / 2

    def sup(self, seed: int = DEFAULT_SEED) -> float:
        c, r = self.geometry()
        res = maximize_modulus(self, self.gradient, c - r, c + r, starts=[c], seed=seed)
        return res.value


Profile = PolyGaussian | ResolventProfile


def _profile_add(g1, g2):
    if isinstance(g1, ResolventProfile):
        return g1.plus(g2)
    if isinstance(g2, ResolventProfile):
        return g2.plus(g1)
    return pg_add(g1, g2)


def _profile_pullback(g, M: np.ndarray):
    """g∘M for an orthogonal change of basis M (square)."""
    if isinstance(g, ResolventProfile):
        return g.scaled(float(M[0, 0]))
    if g.dim == 0:
        return g
    return pg_pullback(g, M)


def _profile_geometry(g):
    """List of (centre, radius) pairs describing where |g| is large."""
    if isinstance(g, ResolventProfile):
        c, r = g.geometry()
        return [(c, r)]
    out = []
    for blk in g.blocks:
        if g.dim == 0:
            continue
        mu, sig, sh = block_geometry(blk)
        out.append((mu, (6.0 + 2.0 * sh) * sig))
    return out


def _profile_is_zero(g) -> bool:
    return g.is_zero()


# ---------------------------------------------------------------------------
# levees

@dataclass(frozen=True, eq=False)
class Levee:
    """The function ``y -> g(B y)`` with B the stored basis of ``direction``."""

    direction: Subspace
    g: Profile

    def __post_init__(self):
        if self.g.dim != self.direction.dim:
            raise ValueError(f"profile dim {self.g.dim} != direction dim {self.direction.dim}")

    @property
    def ambient_dim(self) -> int:
        return self.direction.ambient_dim

    @property
    def nullity(self) -> int:
        return self.ambient_dim - self.direction.dim

    @property
    def kernel(self) -> Subspace:
        return self.direction.complement()

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=float)
        single = Y.ndim == 1
        Y = Y.reshape(-1, self.ambient_dim)
        if self.direction.dim == 0:
            out = np.full(Y.shape[0], self.g.constant_value() if not self.g.is_zero() else 0j)
        else:
            out = np.asarray(self.g(self.direction.coords(Y)))
        return complex(out[0]) if single else out

    def gradient(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if self.direction.dim == 0:
            return np.zeros_like(Y, dtype=complex)
        return self.g.gradient(self.direction.coords(Y)) @ self.direction.basis

    def is_exact(self) -> bool:
        return isinstance(self.g, ResolventProfile)

    def __repr__(self) -> str:
        return f"Levee(dim V={self.direction.dim}, m={self.ambient_dim})"


def constant_levee(m: int, c: complex) -> Levee:
    return Levee(Subspace.zero(m), PolyGaussian.constant(c))


def linear_form_levee(x, g: Profile) -> Levee:
    """The levee ``y -> g(x·y)`` for a nonzero vector x and one-variable g."""
    x = np.asarray(x, dtype=float)
    nx = float(np.linalg.norm(x))
    if nx == 0:
        raise ValueError("x must be nonzero")
    V = Subspace(x.size, (x / nx)[None, :])
    gs = g.scaled(nx) if isinstance(g, ResolventProfile) else pg_scale(g, nx)
    return Levee(V, gs)


@dataclass(frozen=True)
class Generator:
    """The resolvent function h^λ_x(y) = 1/(iλ − x·y)."""

    lam: float
    x: np.ndarray

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("λ must be nonzero")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).ravel())

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=float)
        return 1.0 / (1j * self.lam - Y @ self.x)

    def element(self) -> "CRElement":
        """Exact CRElement (rational profile; a constant when x = 0)."""
        m = self.x.size
        nx = float(np.linalg.norm(self.x))
        if nx == 0:
            return CRElement.constant(m, 1.0 / (1j * self.lam))
        V = Subspace(m, (self.x / nx)[None, :])
        return CRElement(m, [Levee(V, ResolventProfile(((1.0, self.lam, nx),)))])


# ---------------------------------------------------------------------------
# CRElement

class CRElement:
    """Finite sum of levees with pairwise distinct directions.

    Terms with equal directions (within the inclusion tolerance) are merged
    on construction after re-expressing profiles in a common basis.
    """

    __slots__ = ("ambient_dim", "levees")

    def __init__(self, ambient_dim: int, levees: Iterable[Levee] = (), tol: float | None = None):
        self.ambient_dim = int(ambient_dim)
        merged: list[Levee] = []
        for lv in levees:
            if lv.ambient_dim != self.ambient_dim:
                raise sp.DimensionError("levee ambient dimension mismatch")
            for i, other in enumerate(merged):
                if sp.equal(other.direction, lv.direction, tol):
                    M = lv.direction.basis @ other.direction.basis.T
                    g = _profile_add(other.g, _profile_pullback(lv.g, M))
                    merged[i] = Levee(other.direction, g)
                    break
            else:
                merged.append(lv)
        self.levees = tuple(lv for lv in merged if not _profile_is_zero(lv.g))

    # constructors ------------------------------------------------------
    @classmethod
    def constant(cls, m: int, c: complex) -> "CRElement":
        return cls(m, [constant_levee(m, c)])

    @classmethod
    def unit(cls, m: int) -> "CRElement":
        return cls.constant(m, 1.0)

    @classmethod
    def zero(cls, m: int) -> "CRElement":
        return cls(m, [])

    @classmethod
    def from_levee(cls, V: Subspace, g: Profile) -> "CRElement":
        return cls(V.ambient_dim, [Levee(V, g)])

    @classmethod
    def linear_form(cls, x, g: Profile) -> "CRElement":
        x = np.asarray(x, dtype=float)
        return cls(x.size, [linear_form_levee(x, g)])

    # evaluation --------------------------------------------------------
    def __call__(self, Y):
        return evaluate(self, Y)

    def gradient(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = np.zeros(Y.shape, complex)
        for lv in self.levees:
            out += lv.gradient(Y)
        return out

    def is_exact(self) -> bool:
        return any(lv.is_exact() for lv in self.levees)

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, CRElement):
            _check(self, other)
            return CRElement(self.ambient_dim, self.levees + other.levees)
        if np.isscalar(other):
            return self + CRElement.constant(self.ambient_dim, other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        if isinstance(other, CRElement):
            return self + (-other)
        if np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, CRElement):
            return multiply(self, other)
        if np.isscalar(other):
            return self.scaled(other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self.scaled(other)
        return NotImplemented

    def scaled(self, z: complex) -> "CRElement":
        out = []
        for lv in self.levees:
            g = lv.g.times(z) if isinstance(lv.g, ResolventProfile) else pg_scalar(lv.g, z)
            out.append(Levee(lv.direction, g))
        return CRElement(self.ambient_dim, out)

    def conj(self) -> "CRElement":
        return CRElement(self.ambient_dim, [Levee(lv.direction, lv.g.conj()) for lv in self.levees])

    def __repr__(self) -> str:
        dims = [lv.direction.dim for lv in self.levees]
        return f"CRElement(m={self.ambient_dim}, direction dims={dims})"


def _check(f: CRElement, g: CRElement) -> None:
    if f.ambient_dim != g.ambient_dim:
        raise sp.DimensionError(f"ambient dims differ: {f.ambient_dim} vs {g.ambient_dim}")


def evaluate(f: CRElement, Y):
    """Pointwise value; ``Y`` is a vector or a stack of row vectors."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape[-1] != f.ambient_dim:
        raise sp.DimensionError("point dimension does not match the ambient space")
    single = Y.ndim == 1
    Y2 = Y.reshape(-1, f.ambient_dim)
    out = np.zeros(Y2.shape[0], complex)
    for lv in f.levees:
        out += lv(Y2)
    return complex(out[0]) if single else out


# ---------------------------------------------------------------------------
# products and brackets

def _require_smooth(lv: Levee) -> None:
    if isinstance(lv.g, ResolventProfile):
        raise ExactProfileError("exact rational profiles do not enter products; use generator_approx")


def levee_product(l1: Levee, l2: Levee) -> Levee:
    """Product of two levees as one levee on V1 + V2."""
    _require_smooth(l1)
    _require_smooth(l2)
    V1, V2 = l1.direction, l2.direction
    if V1.dim == 0 and V2.dim == 0:
        return constant_levee(V1.ambient_dim, l1.g.constant_value() * l2.g.constant_value())
    U1, U2, U3 = sp.sum_decompose(V1, V2)
    W = sp.orthonormalize(np.vstack([U3.basis, U1.basis, U2.basis]), ambient_dim=V1.ambient_dim)
    g1 = pg_pullback(l1.g, V1.basis @ W.basis.T, validate=False)
    g2 = pg_pullback(l2.g, V2.basis @ W.basis.T, validate=False)
    return Levee(W, pg_multiply(g1, g2))


def multiply(f: CRElement, g: CRElement) -> CRElement:
    """Pointwise product in normal form."""
    _check(f, g)
    return CRElement(f.ambient_dim, [levee_product(a, b) for a in f.levees for b in g.levees])


def symplectic_matrix(n: int) -> np.ndarray:
    """J with {f, g} = ∇f^T J ∇g, i.e. J = [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    z = np.zeros((n, n))
    return np.block([[z, eye], [-eye, z]])


def sigma(x, y) -> float:
    """σ(x, y) = Σ_j x_{n+j} y_j − x_j y_{n+j} on R^{2n}."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size // 2
    return float(x[n:] @ y[:n] - x[:n] @ y[n:])


def poisson_bracket(f: CRElement, g: CRElement, n: int) -> CRElement:
    """Canonical bracket {f, g} = Σ_j ∂_j f ∂_{n+j} g − ∂_{n+j} f ∂_j g.

    Each partial derivative passes through P by the chain rule, so the
    bracket of two levees is a sum of products of derived levees.
    """
    _check(f, g)
    if f.ambient_dim != 2 * n:
        raise ValueError(f"ambient dimension {f.ambient_dim} is not 2n for n={n}")
    J = symplectic_matrix(n)
    out: list[Levee] = []
    for l1 in f.levees:
        for l2 in g.levees:
            if l1.direction.dim == 0 or l2.direction.dim == 0:
                continue
            _require_smooth(l1)
            _require_smooth(l2)
            O = l1.direction.basis @ J @ l2.direction.basis.T
            for a in range(O.shape[0]):
                for b in range(O.shape[1]):
                    if abs(O[a, b]) <= 1e-15:
                        continue
                    d1 = Levee(l1.direction, pg_derive(l1.g, a))
                    d2 = Levee(l2.direction, pg_scalar(pg_derive(l2.g, b), O[a, b]))
                    if not d1.g.is_zero() and not d2.g.is_zero():
                        out.append(levee_product(d1, d2))
    return CRElement(f.ambient_dim, out)


def heat_flow(f: CRElement, hbar: float) -> CRElement:
    """Apply e^{(ħ/4)Δ} levee by levee."""
    out = []
    for lv in f.levees:
        _require_smooth(lv)
        out.append(Levee(lv.direction, pg_heat_flow(lv.g, hbar)))
    return CRElement(f.ambient_dim, out)


def rescale(f: CRElement, s: float) -> CRElement:
    """The function y -> f(s y)."""
    out = []
    for lv in f.levees:
        if lv.direction.dim == 0:
            out.append(lv)
        elif isinstance(lv.g, ResolventProfile):
            out.append(Levee(lv.direction, lv.g.scaled(s)))
        else:
            out.append(Levee(lv.direction, pg_scale(lv.g, s)))
    return CRElement(f.ambient_dim, out)


# ---------------------------------------------------------------------------
# limits and characters

def _orth_to(V: Subspace, w: np.ndarray, tol: float) -> bool:
    return V.dim == 0 or float(np.max(np.abs(V.basis @ w))) <= tol * max(1.0, float(np.linalg.norm(w)))


def direction_limit(f: CRElement, V: Subspace, w, v, tol: float | None = None) -> complex:
    """lim_{t→∞} f(t v + w) by exact case analysis per levee.

    A levee g∘P contributes g(P w) when P v = 0 and 0 otherwise.
    """
    tol = DEFAULT_TOL.contains if tol is None else tol
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError("v must be a unit vector")
    if np.linalg.norm(v - sp.project(V, v)) > tol:
        raise ValueError("v must lie in V")
    if not _orth_to(V, w, tol):
        raise ValueError("w must be orthogonal to V")
    total = 0j
    for lv in f.levees:
        if lv.direction.dim == 0:
            total += lv.g.constant_value()
        elif np.linalg.norm(lv.direction.coords(v)) <= tol:
            total += complex(lv(w))
    return total


def ae_value(f: CRElement, V, w=None, tol: float | None = None) -> complex:
    """Character value χ(V + w)(f): sum of g(P w) over levees with V ⊆ ker P.

    ``V`` may be an :class:`AffineSubspace`, in which case ``w`` is taken
    from it.
    """
    tol = DEFAULT_TOL.contains if tol is None else tol
    if isinstance(V, AffineSubspace):
        V, w = V.direction, V.offset
    w = np.asarray(w, dtype=float)
    if not _orth_to(V, w, 1e3 * DEFAULT_TOL.orth):
        raise ValueError("w must be orthogonal to V")
    total = 0j
    for lv in f.levees:
        if lv.direction.dim == 0:
            total += lv.g.constant_value()
        elif sp.contains(lv.kernel, V, tol):
            total += complex(lv(w))
    return total


# ---------------------------------------------------------------------------
# generator approximation

@dataclass(frozen=True)
class GeneratorFit:
    """Polynomial-Gaussian stand-in for a generator h^λ_x.

    Attributes
    ----------
    element : CRElement
        The approximating one-direction levee (a constant when x = 0).
    profile : PolyGaussian or None
        Fitted one-variable profile t -> g(t) approximating 1/(iλ − t).
    sup_error : float
        Max |g(t) − 1/(iλ − t)| over the fit window.
    window : tuple of float
        The window in the variable t = x·y.
    tail_bound : float
        Bound |1/(iλ − t)| ≤ 1/√(λ² + T²) outside the window.
    """

    element: CRElement
    profile: PolyGaussian | None
    sup_error: float
    window: tuple
    tail_bound: float


def fit_resolvent_profile(lam: float, quality: int, alpha: float = 2.5,
                          window_factor: float = 20.0) -> tuple:
    """Least-squares fit of 1/(iλ − t) by shifted Gaussian atoms.

    ``quality + 1`` atoms sit at sinh-graded centres on [−T, T] with
    T = window_factor·|λ|, each with width equal to the local spacing.
    """
    if lam == 0:
        raise ValueError("λ must be nonzero")
    if quality < 1:
        raise ValueError("quality must be positive")
    T = window_factor * abs(lam)
    u = np.linspace(-1.0, 1.0, quality + 1)
    centres = T * np.sinh(alpha * u) / np.sinh(alpha)
    widths = np.gradient(centres)
    t = np.linspace(-1.25 * T, 1.25 * T, 6001)
    target = 1.0 / (1j * lam - t)
    Phi = np.exp(-(t[:, None] - centres[None, :]) ** 2 / (2.0 * widths[None, :] ** 2))
    wts = np.where(np.abs(t) <= T, 1.0, 0.3)
    coef, *_ = np.linalg.lstsq(Phi * wts[:, None], target * wts, rcond=1e-12)
    # clip to the modulus bound 1/|λ|
    peak = float(np.max(np.abs(Phi @ coef)))
    if peak > 1.0 / abs(lam):
        coef = coef * (1.0 / abs(lam)) / peak
    blocks = []
    for c, mu, w in zip(coef, centres, widths):
        a = 1.0 / (2.0 * w * w)
        blocks.append(PolyGaussian.gaussian(a, b=[2.0 * a * mu], coeff=c * np.exp(-a * mu * mu)))
    profile = PolyGaussian(1, [blk for g in blocks for blk in g.blocks])
    tw = np.linspace(-T, T, 20001)
    err = float(np.max(np.abs(profile(tw[:, None]) - 1.0 / (1j * lam - tw))))
    return profile, err, (-T, T), 1.0 / np.sqrt(lam * lam + T * T)


def generator_approx(h: Generator, quality: int = 40) -> GeneratorFit:
    """PolyGaussian approximation of h^λ_x as a levee in the direction of x."""
    m = h.x.size
    nx = float(np.linalg.norm(h.x))
    if nx == 0:
        return GeneratorFit(CRElement.constant(m, 1.0 / (1j * h.lam)), None, 0.0, (-np.inf, np.inf), 0.0)
    prof, err, window, tail = fit_resolvent_profile(h.lam, quality)
    V = Subspace(m, (h.x / nx)[None, :])
    return GeneratorFit(CRElement(m, [Levee(V, pg_scale(prof, nx))]), prof, err, window, tail)


# ---------------------------------------------------------------------------
# sup norm via the kernel-intersection lattice

def _kernel_lattice(levees: Sequence[Levee], m: int) -> list:
    """Distinct intersections of levee kernels (including R^m itself)."""
    nodes = [Subspace.full(m)]
    frontier = [Subspace.full(m)]
    kernels = [lv.kernel for lv in levees if lv.direction.dim > 0]
    while frontier:
        nxt = []
        for V in frontier:
            for K in kernels:
                if sp.contains(K, V):
                    continue
                W = sp.intersect(V, K)
                if not any(sp.equal(W, X) for X in nodes):
                    nodes.append(W)
                    nxt.append(W)
        frontier = nxt
    return nodes


def _maximize_on(levees: Sequence[Levee], C: np.ndarray, seed: int):
    """Maximize |Σ levees| over y = C^T s with s ∈ R^d (C has orthonormal rows)."""
    d = C.shape[0]
    const = sum((lv.g.constant_value() for lv in levees if lv.direction.dim == 0), 0j)
    moving = [lv for lv in levees if lv.direction.dim > 0]
    if d == 0 or not moving:
        return abs(const), np.zeros(C.shape[1])

    def fun(S):
        Y = S @ C
        out = np.full(S.shape[0], const, complex)
        for lv in moving:
            out += lv(Y)
        return out

    def grad(S):
        Y = S @ C
        out = np.zeros((S.shape[0], C.shape[1]), complex)
        for lv in moving:
            out += lv.gradient(Y)
        return out @ C.T

    centres, rad = [], 0.0
    rows, rhs = [], []
    for lv in moving:
        Bc = lv.direction.basis @ C.T
        for mu, r in _profile_geometry(lv.g):
            y = lv.direction.basis.T @ mu
            centres.append(C @ y)
            rad = max(rad, float(np.linalg.norm(mu)) + r)
            rows.append(Bc)
            rhs.append(mu)
    stack = np.vstack([lv.direction.basis @ C.T for lv in moving])
    smin = float(np.linalg.svd(stack, compute_uv=False)[-1]) if stack.size else 1.0
    R = rad * len(moving) / max(smin, 1e-3)
    starts = list(centres)
    if rows:
        # joint least-squares centre of all peaks
        sol, *_ = np.linalg.lstsq(np.vstack(rows), np.concatenate(rhs), rcond=None)
        starts.append(sol)
    res = maximize_modulus(fun, grad, -R * np.ones(d), R * np.ones(d), starts=starts, seed=seed)
    return res.value, res.argmax @ C


def sup_norm(f: CRElement, seed: int = DEFAULT_SEED, return_witness: bool = False):
    """‖f‖_∞ as a maximum of character values over the kernel lattice.

    For every distinct intersection V of levee kernels, the levees with
    V ⊆ ker P form a sub-sum; its supremum over V^⊥ is a candidate. Limits
    at infinity are exactly the values of these sub-sums, so the maximum
    over the lattice equals the sup norm up to optimizer tolerance.
    """
    m = f.ambient_dim
    best, witness = 0.0, (Subspace.full(m), np.zeros(m))
    for V in _kernel_lattice(f.levees, m):
        sub = [lv for lv in f.levees if lv.direction.dim == 0 or sp.contains(lv.kernel, V)]
        if not sub:
            continue
        C = V.complement().basis
        val, y = _maximize_on(sub, C, seed)
        if val > best:
            best, witness = val, (V, y)
    return (best, witness) if return_witness else best


def profile_sup(g: Profile, seed: int = DEFAULT_SEED) -> float:
    if isinstance(g, ResolventProfile):
        return g.sup(seed)
    return pg_sup(g, seed)[0]


# ---------------------------------------------------------------------------
# layers

def canonical_layers(f: CRElement) -> dict:
    """Group levees by nullity m − dim V."""
    out: dict[int, list[Levee]] = {}
    for lv in f.levees:
        out.setdefault(lv.nullity, []).append(lv)
    return dict(sorted(out.items()))


def _check_layer(f: CRElement, r: int) -> None:
    if not 0 <= r <= f.ambient_dim:
        raise ValueError(f"nullity r={r} out of range [0, {f.ambient_dim}]")


def layer_quotient_norm(f: CRElement, r: int, seed: int = DEFAULT_SEED) -> float:
    """Quotient norm of the nullity-(r+1) layer: max of its profiles' sup norms."""
    _check_layer(f, r)
    layer = canonical_layers(f).get(r + 1, [])
    return max((profile_sup(lv.g, seed) for lv in layer), default=0.0)


def character_lower_bound(f: CRElement, r: int, seed: int = DEFAULT_SEED) -> float:
    """max_j sup_{w ∈ ran P_j} |χ(ker P_j + w)(f)| over layer-(r+1) levees.

    Only levees of nullity ≤ r + 1 are kept; those of nullity ≤ r vanish on
    these characters, so the value is insensitive to them. The maximization
    runs on the character values themselves and the final optimum is
    re-evaluated through :func:`ae_value`.
    """
    _check_layer(f, r)
    part = CRElement(f.ambient_dim, [lv for lv in f.levees if lv.nullity <= r + 1])
    best = 0.0
    for lvj in canonical_layers(part).get(r + 1, []):
        K = lvj.kernel
        B = lvj.direction.basis
        active = [lv for lv in part.levees if lv.direction.dim == 0 or sp.contains(lv.kernel, K)]
        _, y = _maximize_on(active, B, seed)
        w = sp.project(lvj.direction, y)
        best = max(best, abs(ae_value(part, K, w)))
    return best
