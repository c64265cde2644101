"""Linear and affine subspaces of R^m held as orthonormal bases."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL


class DimensionError(ValueError):
    """Raised when ambient dimensions do not match."""


def _as_rows(vectors, ambient_dim: int | None) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        arr = np.asarray(vectors, dtype=float)
    else:
        vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
        if not vecs:
            if ambient_dim is None:
                raise DimensionError("ambient_dim is required for an empty vector list")
            return np.zeros((0, ambient_dim))
        sizes = {v.size for v in vecs}
        if len(sizes) != 1:
            raise DimensionError(f"inconsistent vector sizes {sorted(sizes)}")
        arr = np.vstack(vecs)
    if ambient_dim is not None and arr.shape[1] != ambient_dim:
        raise DimensionError(f"vectors live in R^{arr.shape[1]}, expected R^{ambient_dim}")
    return arr


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^m with an orthonormal basis stored as rows.

    Parameters
    ----------
    ambient_dim : int
        The dimension m of the ambient space.
    basis : ndarray, shape (k, m)
        Orthonormal rows spanning the subspace. Use :func:`orthonormalize`
        to build one from arbitrary vectors.
    """

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        if int(self.ambient_dim) < 1:
            raise DimensionError("ambient_dim must be positive")
        b = np.array(self.basis, dtype=float).reshape(-1, self.ambient_dim)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "ambient_dim", int(self.ambient_dim))
        if b.shape[0] > self.ambient_dim:
            raise DimensionError("more basis vectors than the ambient dimension")
        gram = b @ b.T
        if b.shape[0] and np.max(np.abs(gram - np.eye(b.shape[0]))) > 1e3 * DEFAULT_TOL.orth:
            raise ValueError("basis is not orthonormal")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    @classmethod
    def zero(cls, m: int) -> "Subspace":
        return cls(m, np.zeros((0, m)))

    @classmethod
    def full(cls, m: int) -> "Subspace":
        return cls(m, np.eye(m))

    @classmethod
    def span(cls, *vectors, ambient_dim: int | None = None, tol: float | None = None) -> "Subspace":
        return orthonormalize(list(vectors), tol=tol, ambient_dim=ambient_dim)

    def complement(self) -> "Subspace":
        """Orthogonal complement in R^m."""
        m, k = self.ambient_dim, self.dim
        if k == 0:
            return Subspace.full(m)
        if k == m:
            return Subspace.zero(m)
        # Trailing right-singular vectors span the null space of the basis.
        _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(m, _orthonormal_rows(vt[k:]))

    def coords(self, y) -> np.ndarray:
        """Coordinates of P_V y in the stored basis (works on stacked rows)."""
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.ambient_dim:
            raise DimensionError("vector dimension does not match ambient_dim")
        return y @ self.basis.T

    def __repr__(self) -> str:
        return f"Subspace(m={self.ambient_dim}, dim={self.dim})"


def _orthonormal_rows(rows: np.ndarray) -> np.ndarray:
    # one more Gram-Schmidt sweep to clean roundoff
    q, _ = np.linalg.qr(rows.T)
    signs = np.sign(np.sum(q * rows.T, axis=0))
    signs[signs == 0] = 1.0
    return (q * signs).T


def orthonormalize(vectors, tol: float | None = None, ambient_dim: int | None = None) -> Subspace:
    """Orthonormal basis of the span of ``vectors``.

    Modified Gram-Schmidt with a second reorthogonalization pass, in input
    order. A vector is dropped when its residual after removing the current
    span falls below ``tol`` times the largest input norm.

    Parameters
    ----------
    vectors : sequence of array_like or ndarray of shape (k, m)
    tol : float, optional
        Relative rank cutoff, default ``DEFAULT_TOL.rank``.
    ambient_dim : int, optional
        Needed only when ``vectors`` is empty.
    """
    tol = DEFAULT_TOL.rank if tol is None else tol
    arr = _as_rows(vectors, ambient_dim)
    m = arr.shape[1]
    if arr.shape[0] == 0:
        return Subspace.zero(m)
    scale = float(np.max(np.linalg.norm(arr, axis=1)))
    if scale == 0.0:
        return Subspace.zero(m)
    arr = arr / scale
    basis: list[np.ndarray] = []
    for v in arr:
        r = v.copy()
        for _ in range(2):
            for q in basis:
                r -= (q @ r) * q
        nr = np.linalg.norm(r)
        if nr > tol and len(basis) < m:
            basis.append(r / nr)
    return Subspace(m, np.array(basis).reshape(-1, m))


def _check_same(a: Subspace, b: Subspace) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def project(V: Subspace, y) -> np.ndarray:
    """Orthogonal projection P_V y (rows of a 2-D input are projected separately)."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != V.ambient_dim:
        raise DimensionError("vector dimension does not match ambient_dim")
    return (y @ V.basis.T) @ V.basis


def contains(V: Subspace, W: Subspace, tol: float | None = None) -> bool:
    """True iff every basis vector of W lies in V up to residual ``tol``."""
    _check_same(V, W)
    tol = DEFAULT_TOL.contains if tol is None else tol
    if W.dim == 0:
        return True
    if W.dim > V.dim:
        return False
    resid = W.basis - project(V, W.basis)
    return bool(np.max(np.linalg.norm(resid, axis=1)) <= tol)


def equal(V: Subspace, W: Subspace, tol: float | None = None) -> bool:
    """Subspace equality as mutual inclusion."""
    return V.dim == W.dim and contains(V, W, tol) and contains(W, V, tol)


def subspace_sum(*spaces: Subspace, tol: float | None = None) -> Subspace:
    m = spaces[0].ambient_dim
    for s in spaces[1:]:
        _check_same(spaces[0], s)
    rows = np.vstack([s.basis for s in spaces]) if spaces else np.zeros((0, m))
    return orthonormalize(rows, tol=tol, ambient_dim=m)


def intersect(V1: Subspace, V2: Subspace, tol: float | None = None) -> Subspace:
    """V1 ∩ V2 via principal vectors with residual below ``tol``."""
    _check_same(V1, V2)
    tol = DEFAULT_TOL.contains if tol is None else tol
    m = V1.ambient_dim
    if V1.dim == 0 or V2.dim == 0:
        return Subspace.zero(m)
    u, _, _ = np.linalg.svd(V1.basis @ V2.basis.T)
    # principal vectors of V1 whose residual against V2 is below tol;
    # the residual is measured directly since sqrt(1 - cos²) loses half the digits
    cand = u.T @ V1.basis
    keep = [c for c in cand if np.linalg.norm(c - project(V2, c)) <= tol]
    if not keep:
        return Subspace.zero(m)
    # symmetrize: average with the projection onto V2 for stability
    keep = [0.5 * (c + project(V2, c)) for c in keep]
    return orthonormalize(keep, ambient_dim=m)


def relative_complement(V: Subspace, U: Subspace) -> Subspace:
    """Orthogonal complement of U inside V (U is assumed to lie in V)."""
    _check_same(V, U)
    if U.dim == 0:
        return V
    rows = V.basis - project(U, V.basis)
    # rank of V ⊖ U is dim V - dim U; take dominant singular directions
    k = V.dim - U.dim
    if k <= 0:
        return Subspace.zero(V.ambient_dim)
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    return Subspace(V.ambient_dim, _orthonormal_rows(vt[:k]))


def sum_decompose(V1: Subspace, V2: Subspace, tol: float | None = None):
    """Split V1 + V2 as U1 ⊕ U2 ⊕ U3 with U3 = V1 ∩ V2.

    U1 and U2 are the orthogonal complements of U3 inside V1 and V2.

    Returns
    -------
    (U1, U2, U3) : tuple of Subspace
    """
    _check_same(V1, V2)
    U3 = intersect(V1, V2, tol)
    return relative_complement(V1, U3), relative_complement(V2, U3), U3


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """Affine subspace V + w with the offset w orthogonal to V."""

    direction: Subspace
    offset: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.offset, dtype=float).ravel()
        if w.size != self.direction.ambient_dim:
            raise DimensionError("offset dimension does not match the direction")
        scale = max(1.0, float(np.linalg.norm(w)))
        if self.direction.dim and np.max(np.abs(self.direction.basis @ w)) > 1e3 * DEFAULT_TOL.orth * scale:
            raise ValueError("offset must be orthogonal to the direction")
        w.setflags(write=False)
        object.__setattr__(self, "offset", w)

    @classmethod
    def through(cls, direction: Subspace, point) -> "AffineSubspace":
        """The affine subspace direction + point, with the offset normalized."""
        point = np.asarray(point, dtype=float)
        return cls(direction, point - project(direction, point))

    @classmethod
    def point(cls, w) -> "AffineSubspace":
        w = np.asarray(w, dtype=float).ravel()
        return cls(Subspace.zero(w.size), w)

    @property
    def ambient_dim(self) -> int:
        return self.direction.ambient_dim

    @property
    def dim(self) -> int:
        return self.direction.dim

    def __repr__(self) -> str:
        return f"AffineSubspace(dim={self.dim}, offset={np.round(self.offset, 6).tolist()})"
