"""Bounded multistart maximization of |f| for vectorized complex functions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT_SEED, SUP_SEEDS_PER_DIM


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: np.ndarray
    upper: float


def seed_points(lo: np.ndarray, hi: np.ndarray, per_dim: int = SUP_SEEDS_PER_DIM,
                seed: int = DEFAULT_SEED, max_grid: int = 40000) -> np.ndarray:
    """Tensor grid seeds when affordable, seeded uniform samples otherwise."""
    k = lo.size
    if per_dim ** k <= max_grid:
        axes = [np.linspace(l, h, per_dim) for l, h in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    rng = np.random.default_rng(seed)
    return lo + (hi - lo) * rng.random((per_dim * k * 8, k))


def maximize_modulus(fun: Callable[[np.ndarray], np.ndarray],
                     grad: Callable[[np.ndarray], np.ndarray] | None,
                     lo, hi, starts=(), per_dim: int = SUP_SEEDS_PER_DIM,
                     seed: int = DEFAULT_SEED, n_local: int = 12) -> SupResult:
    """Maximize |fun| over the box [lo, hi].

    Parameters
    ----------
    fun : callable
        Maps points of shape (npts, k) to complex values of shape (npts,).
    grad : callable or None
        Complex gradient, shape (npts, k). Finite differences when None.
    lo, hi : array_like
        Box corners.
    starts : sequence of array_like
        Extra local-search starts (e.g. known peak centres).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    k = lo.size
    if k == 0:
        v = abs(complex(fun(np.zeros((1, 0)))[0]))
        return SupResult(v, np.zeros(0), v)
    seeds = seed_points(lo, hi, per_dim, seed)
    extra = np.array([np.clip(np.asarray(s, float), lo, hi) for s in starts]).reshape(-1, k)
    cand = np.vstack([seeds, extra]) if extra.size else seeds
    vals = np.abs(fun(cand))
    order = np.argsort(-vals, kind="stable")
    picks = list(order[:n_local]) + list(range(len(seeds), len(cand)))
    best_v = float(vals[order[0]])
    best_x = cand[order[0]].copy()

    def obj(y):
        v = complex(fun(y[None, :])[0])
        if grad is None:
            return -abs(v) ** 2
        g = grad(y[None, :])[0]
        return -abs(v) ** 2, -2.0 * np.real(np.conj(v) * g)

    seen = set()
    for idx in picks:
        if idx in seen:
            continue
        seen.add(idx)
        res = minimize(obj, cand[idx], jac=grad is not None, method="L-BFGS-B",
                       bounds=list(zip(lo, hi)),
                       options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500})
        v = float(np.sqrt(max(0.0, -float(res.fun))))
        if v > best_v:
            best_v, best_x = v, np.asarray(res.x, float)
    # grid-Lipschitz upper estimate from the seed grid spacing
    upper = best_v
    if len(seeds) > 1 and per_dim > 1:
        h = (hi - lo) / (per_dim - 1)
        if grad is not None:
            g = np.abs(grad(seeds))
            lip = float(np.max(np.linalg.norm(g, axis=1)))
            upper = max(best_v, float(np.max(vals[: len(seeds)])) + 0.5 * lip * float(np.linalg.norm(h)))
    return SupResult(best_v, best_x, upper)
