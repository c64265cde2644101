"""Sparse multivariate polynomials as ``{exponent tuple: complex}`` dicts."""
from __future__ import annotations

import numpy as np

Poly = dict  # {tuple[int, ...]: complex}


def constant(c: complex, k: int) -> Poly:
    return {(0,) * k: complex(c)} if c != 0 else {}


def monomial(alpha, c: complex = 1.0) -> Poly:
    return {tuple(int(a) for a in alpha): complex(c)}


def linear(row, const: complex = 0.0) -> Poly:
    """The affine polynomial const + sum_j row_j y_j."""
    row = np.asarray(row)
    k = row.size
    out: Poly = {}
    if const != 0:
        out[(0,) * k] = complex(const)
    for j, r in enumerate(row):
        if r != 0:
            e = [0] * k
            e[j] = 1
            out[tuple(e)] = complex(r)
    return out


def degree(p: Poly) -> int:
    return max((sum(a) for a in p), default=0)


def clean(p: Poly, tol: float = 0.0) -> Poly:
    if not p:
        return {}
    scale = max(abs(c) for c in p.values())
    return {a: c for a, c in p.items() if abs(c) > tol * scale and c != 0}


def add(p: Poly, q: Poly, s: complex = 1.0) -> Poly:
    out = dict(p)
    for a, c in q.items():
        out[a] = out.get(a, 0.0) + s * c
    return {a: c for a, c in out.items() if c != 0}


def scale(p: Poly, s: complex) -> Poly:
    if s == 0:
        return {}
    return {a: s * c for a, c in p.items()}


def mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for a, c in p.items():
        for b, d in q.items():
            e = tuple(x + y for x, y in zip(a, b))
            out[e] = out.get(e, 0.0) + c * d
    return {a: c for a, c in out.items() if c != 0}


def power(p: Poly, n: int, k: int) -> Poly:
    out = constant(1.0, k)
    for _ in range(n):
        out = mul(out, p)
    return out


def derive(p: Poly, j: int) -> Poly:
    out: Poly = {}
    for a, c in p.items():
        if a[j] > 0:
            e = list(a)
            e[j] -= 1
            e = tuple(e)
            out[e] = out.get(e, 0.0) + a[j] * c
    return out


def evaluate(p: Poly, Y: np.ndarray) -> np.ndarray:
    """Evaluate at the rows of ``Y`` (shape (npts, k))."""
    Y = np.atleast_2d(Y)
    out = np.zeros(Y.shape[0], dtype=complex)
    for a, c in p.items():
        term = np.full(Y.shape[0], c, dtype=complex)
        for j, e in enumerate(a):
            if e:
                term = term * Y[:, j] ** e
        out += term
    return out


def affine_substitute(p: Poly, L: np.ndarray, c: np.ndarray | None = None) -> Poly:
    """Return q(v) = p(L v + c) where L has shape (k_old, k_new)."""
    L = np.asarray(L, dtype=complex)
    k_old, k_new = L.shape
    c = np.zeros(k_old, dtype=complex) if c is None else np.asarray(c, dtype=complex)
    if not p:
        return {}
    rows = [linear(L[i], c[i]) if (np.any(L[i] != 0) or c[i] != 0) else {} for i in range(k_old)]
    cache: dict[tuple[int, int], Poly] = {}

    def pw(i: int, e: int) -> Poly:
        key = (i, e)
        if key not in cache:
            cache[key] = constant(1.0, k_new) if e == 0 else mul(pw(i, e - 1), rows[i])
        return cache[key]

    out: Poly = {}
    for a, coef in p.items():
        term = constant(coef, k_new)
        for i, e in enumerate(a):
            if e:
                term = mul(term, pw(i, e))
                if not term:
                    break
        out = add(out, term)
    return out


def embed(p: Poly, positions, k_new: int) -> Poly:
    """Rename variable i to variable positions[i] in a k_new-variable ring."""
    out: Poly = {}
    for a, c in p.items():
        e = [0] * k_new
        for i, ai in enumerate(a):
            e[positions[i]] += ai
        e = tuple(e)
        out[e] = out.get(e, 0.0) + c
    return out


def gaussian_moments(Sigma: np.ndarray, alphas) -> dict:
    """Formal moments E[t^alpha] of a centred Gaussian with covariance Sigma.

    Uses the Isserlis (Stein) recursion
    E[t_i t^beta] = sum_j Sigma_ij beta_j E[t^(beta - e_j)],
    valid for complex symmetric Sigma as an identity of Gaussian integrals.
    """
    Sigma = np.asarray(Sigma, dtype=complex)
    memo: dict[tuple, complex] = {}

    def M(a: tuple) -> complex:
        if a in memo:
            return memo[a]
        s = sum(a)
        if s == 0:
            val = 1.0 + 0j
        elif s % 2:
            val = 0j
        else:
            i = next(idx for idx, v in enumerate(a) if v)
            beta = list(a)
            beta[i] -= 1
            val = 0j
            for j, bj in enumerate(beta):
                if bj:
                    g = list(beta)
                    g[j] -= 1
                    val += Sigma[i, j] * bj * M(tuple(g))
        memo[a] = val
        return val

    return {tuple(a): M(tuple(a)) for a in alphas}

