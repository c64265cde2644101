"""The space Ω of affine subspaces: balls, absorption and convergence.

Structured paths are families ``U + (w0 + Σ_k t_k(i) u_k)`` whose rates are
Laurent polynomials in the index i, optionally multiplied by (−1)^i. Along
each parity class of i the offset is then a vector Laurent polynomial
``Σ_d c_d i^d``, which makes absorption and convergence decidable:

* absorbed in V + w iff U ⊆ V and, on both parity classes, the components
  of c_d (d > 0) orthogonal to V vanish and P_{V⊥} c_0 = w;
* convergent iff absorbed and, on both parity classes,
  U + span{P_V c_d : d > 0} = V.

When the second condition fails on a parity class, that class is itself
absorbed in Ṽ + w̃ with Ṽ = U + span{P_V c_d : d > 0} ⊊ V, which is the
witness (a subfamily absorbed strictly below the target).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import subspace as sp
from .config import DEFAULT_TOL
from .gauss import PolyGaussian
from .levee import CRElement, Levee, ae_value
from .subspace import AffineSubspace, Subspace

OmegaPoint = AffineSubspace


class UnsupportedRateError(ValueError):
    """Rate outside the closed-form Laurent family."""


# ---------------------------------------------------------------------------
# balls

def affine_subset(A: OmegaPoint, B: OmegaPoint, tol: float | None = None) -> bool:
    """A ⊆ B as affine sets."""
    tol = DEFAULT_TOL.contains if tol is None else tol
    if A.ambient_dim != B.ambient_dim:
        raise sp.DimensionError("ambient dimensions differ")
    if not sp.contains(B.direction, A.direction, tol):
        return False
    off = A.offset - sp.project(B.direction, A.offset)
    return bool(np.linalg.norm(off - B.offset) <= tol)


def ball_membership(candidate: OmegaPoint, center: OmegaPoint, r: float,
                    closed: bool = False, tol: float | None = None) -> bool:
    """V'+w' ∈ B_r(V+w): V' ⊆ V and ‖P_{V⊥} w' − w‖ < r (≤ r when closed)."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if not sp.contains(center.direction, candidate.direction, tol):
        return False
    d = float(np.linalg.norm(candidate.offset - sp.project(center.direction, candidate.offset)
                             - center.offset))
    return d <= r if closed else d < r


def neighborhood_basis_element(center: OmegaPoint, r: float,
                               excluded: Sequence[tuple] = ()) -> Callable[[OmegaPoint], bool]:
    """Membership predicate of B_r(center) minus closed balls around proper subsets."""
    for pt, ri in excluded:
        if not ri > 0:
            raise ValueError("excluded radii must be positive")
        if not affine_subset(pt, center) or pt.dim >= center.dim:
            raise ValueError("excluded points must be proper affine subsets of the center")

    def member(candidate: OmegaPoint) -> bool:
        if not ball_membership(candidate, center, r):
            return False
        return not any(ball_membership(candidate, pt, ri, closed=True) for pt, ri in excluded)

    return member


# ---------------------------------------------------------------------------
# rates and paths

@dataclass(frozen=True)
class Rate:
    """t(i) = (−1)^i·Σ_d a_d i^d if ``alternating`` else Σ_d a_d i^d.

    ``coefficients`` maps integer powers d (negative allowed) to reals.
    """

    coefficients: dict
    alternating: bool = False

    def __post_init__(self):
        coeffs = {}
        for d, a in dict(self.coefficients).items():
            if int(d) != d:
                raise UnsupportedRateError("powers must be integers")
            if not np.isfinite(a):
                raise UnsupportedRateError("coefficients must be finite")
            if a != 0:
                coeffs[int(d)] = float(a)
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))

    @classmethod
    def linear(cls, slope: float = 1.0, intercept: float = 0.0) -> "Rate":
        return cls({1: slope, 0: intercept})

    @classmethod
    def const(cls, c: float) -> "Rate":
        return cls({0: c})

    def __call__(self, i) -> np.ndarray:
        i = np.asarray(i, dtype=float)
        out = sum((a * i ** d for d, a in self.coefficients.items()), np.zeros_like(i))
        return out * (-1.0) ** i if self.alternating else out

    def parity_coefficients(self, parity: int) -> dict:
        """Laurent coefficients of t restricted to i ≡ parity (mod 2)."""
        sgn = -1.0 if (self.alternating and parity % 2) else 1.0
        return {d: sgn * a for d, a in self.coefficients.items()}

    @property
    def degree(self) -> int:
        return max(self.coefficients, default=0)

    def diverges(self) -> bool:
        return self.degree > 0

    def as_dict(self) -> dict:
        return {"coefficients": {str(d): a for d, a in self.coefficients.items()},
                "alternating": self.alternating}


@dataclass(frozen=True, eq=False)
class StructuredPath:
    """Points U + (w0 + Σ_k t_k(i) u_k), offsets normalized orthogonal to U."""

    base: OmegaPoint
    escape_directions: tuple
    rates: tuple

    def __post_init__(self):
        dirs = tuple(np.asarray(u, dtype=float).ravel() for u in self.escape_directions)
        rates = tuple(self.rates)
        if len(dirs) != len(rates):
            raise ValueError("one rate per escape direction")
        for u in dirs:
            if u.size != self.base.ambient_dim:
                raise sp.DimensionError("escape direction dimension mismatch")
        for r in rates:
            if not isinstance(r, Rate):
                raise UnsupportedRateError("rates must be Rate instances")
        object.__setattr__(self, "escape_directions", dirs)
        object.__setattr__(self, "rates", rates)

    @property
    def ambient_dim(self) -> int:
        return self.base.ambient_dim

    def point(self, i: int) -> OmegaPoint:
        w = self.base.offset.copy()
        for u, t in zip(self.escape_directions, self.rates):
            w = w + float(t(i)) * u
        return AffineSubspace.through(self.base.direction, w)

    def offset_coefficients(self, parity: int) -> dict:
        """Vector Laurent coefficients {d: c_d} of the raw offset on a parity class."""
        out: dict[int, np.ndarray] = {0: self.base.offset.copy()}
        for u, t in zip(self.escape_directions, self.rates):
            for d, a in t.parity_coefficients(parity).items():
                out[d] = out.get(d, np.zeros(self.ambient_dim)) + a * u
        return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# absorption and convergence

@dataclass(frozen=True)
class AbsorptionResult:
    absorbed: bool
    certificate: dict

    def __bool__(self) -> bool:
        return self.absorbed


@dataclass(frozen=True)
class ConvergenceResult:
    verdict: str  # "converges" | "absorbed-only" | "not-absorbed"
    witness: dict = field(default_factory=dict)

    @property
    def converges(self) -> bool:
        return self.verdict == "converges"


def absorption(path: StructuredPath, target: OmegaPoint, tol: float | None = None) -> AbsorptionResult:
    """Decide absorption of a structured path in ``target`` with a certificate."""
    tol = DEFAULT_TOL.contains if tol is None else tol
    V = target.direction
    cert: dict = {"direction_included": sp.contains(V, path.base.direction, tol), "parities": {}}
    ok = cert["direction_included"]
    perp = V.complement()
    for parity in (0, 1):
        coeffs = path.offset_coefficients(parity)
        bad = [d for d, c in coeffs.items() if d > 0 and np.linalg.norm(sp.project(perp, c)) > tol]
        limit = sp.project(perp, coeffs.get(0, np.zeros(path.ambient_dim)))
        # negative powers vanish in the limit
        match = bool(np.linalg.norm(limit - target.offset) <= tol)
        cert["parities"][parity] = {
            "divergent_normal_powers": bad,
            "limit": limit.tolist(),
            "limit_matches": match,
            "escape_in_V": [bool(np.linalg.norm(sp.project(perp, u)) <= tol)
                            for u in path.escape_directions],
        }
        ok = ok and not bad and match
    return AbsorptionResult(bool(ok), cert)


def _escape_span(path: StructuredPath, V: Subspace, parity: int, tol: float) -> Subspace:
    coeffs = path.offset_coefficients(parity)
    vecs = [sp.project(V, c) for d, c in coeffs.items() if d > 0]
    vecs = [v for v in vecs if np.linalg.norm(v) > tol]
    rows = np.vstack([path.base.direction.basis] + [v[None, :] for v in vecs])
    return sp.orthonormalize(rows, ambient_dim=path.ambient_dim)


def convergence(path: StructuredPath, target: OmegaPoint, tol: float | None = None) -> ConvergenceResult:
    """Decide convergence of a structured path to ``target``.

    A non-convergent but absorbed path gets a witness: a parity class of
    indices and the smaller affine subspace Ṽ + w̃ absorbing it.
    """
    tol = DEFAULT_TOL.contains if tol is None else tol
    ab = absorption(path, target, tol)
    if not ab.absorbed:
        return ConvergenceResult("not-absorbed", {"certificate": ab.certificate})
    V = target.direction
    for parity in (0, 1):
        S = _escape_span(path, V, parity, tol)
        if S.dim < V.dim:
            c0 = path.offset_coefficients(parity).get(0, np.zeros(path.ambient_dim))
            wt = c0 - sp.project(S, c0)
            return ConvergenceResult("absorbed-only", {
                "parity": parity,
                "direction": S.basis.tolist(),
                "offset": wt.tolist(),
                "point": AffineSubspace(S, wt),
            })
    return ConvergenceResult("converges", {"certificate": ab.certificate})


def density_path(target: OmegaPoint) -> StructuredPath:
    """The path U + i·u with U ⊂ V of codimension one and u ∈ V ⊖ U."""
    V = target.direction
    if V.dim == 0:
        raise ValueError("target is already a point of R^m")
    U = Subspace(V.ambient_dim, V.basis[:-1])
    u = V.basis[-1]
    return StructuredPath(AffineSubspace(U, target.offset), (u,), (Rate.linear(),))


def density_chain(target: OmegaPoint) -> list:
    """Density paths from ``target`` down to a point: each base is the next target."""
    out = []
    cur = target
    while cur.dim > 0:
        p = density_path(cur)
        out.append(p)
        cur = p.base
    return out


# ---------------------------------------------------------------------------
# characters

def bump_probe(point: OmegaPoint, width: float = 1.0) -> CRElement:
    """Gaussian bump g∘P_{Ṽ⊥} with g(w̃) = 1 for the affine subspace Ṽ + w̃."""
    K = point.direction.complement()
    m = point.ambient_dim
    if K.dim == 0:
        return CRElement.unit(m)
    c = K.coords(point.offset)
    a = 1.0 / (width * width)
    g = PolyGaussian.gaussian(a * np.eye(K.dim), b=2.0 * a * c, coeff=np.exp(-a * c @ c))
    return CRElement(m, [Levee(K, g)])


def refuting_probe(result: ConvergenceResult) -> CRElement:
    """Probe separating the witness subfamily from the target."""
    if result.verdict != "absorbed-only":
        raise ValueError("only absorbed-but-not-convergent results carry a witness")
    return bump_probe(result.witness["point"])


def sample_indices(largest: int = 1000, count: int = 12) -> list:
    """Geometric index grid containing both parities at every scale."""
    base = np.unique(np.round(np.geomspace(1, largest, count)).astype(int))
    return sorted(set(int(i) for b in base for i in (b, b + 1)))


@dataclass(frozen=True)
class ConsistencyReport:
    indices: tuple
    target_values: tuple
    deviations: tuple  # per probe: deviations along indices
    final_deviation: tuple  # per probe: max over the last index of each parity
    max_final_deviation: float
    refuting: tuple  # probe indices whose final deviation exceeds refute_threshold

    def as_dict(self) -> dict:
        return {"indices": list(self.indices), "target_values": [[v.real, v.imag] for v in self.target_values],
                "final_deviation": list(self.final_deviation),
                "max_final_deviation": self.max_final_deviation, "refuting": list(self.refuting)}


def character_consistency(path: StructuredPath, target: OmegaPoint, probes: Sequence[CRElement],
                          indices: Sequence[int] | None = None,
                          refute_threshold: float = 0.5) -> ConsistencyReport:
    """Compare χ(path(i))(f) with χ(target)(f) for each probe f."""
    if not probes:
        raise ValueError("at least one probe is required")
    idx = list(indices) if indices is not None else sample_indices()
    last = {p: max((i for i in idx if i % 2 == p), default=None) for p in (0, 1)}
    points = {i: path.point(i) for i in idx}
    tvals, devs, finals = [], [], []
    for f in probes:
        tv = ae_value(f, target)
        d = [abs(ae_value(f, points[i]) - tv) for i in idx]
        fin = max(d[idx.index(last[p])] for p in (0, 1) if last[p] is not None)
        tvals.append(tv)
        devs.append(tuple(d))
        finals.append(fin)
    refuting = tuple(k for k, v in enumerate(finals) if v > refute_threshold)
    return ConsistencyReport(tuple(idx), tuple(tvals), tuple(devs), tuple(finals),
                             float(max(finals)), refuting)


def probe_dictionary(m: int, count: int = 12, seed: int = 0) -> list:
    """Seeded Gaussian levees on random directions of every dimension 1..m."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(count):
        k = 1 + j % m
        V = sp.orthonormalize(rng.normal(size=(k, m)))
        c = rng.normal(size=k)
        g = PolyGaussian.gaussian(0.5 * np.eye(k), b=c, coeff=1.0)
        out.append(CRElement(m, [Levee(V, g)]))
    return out


# ---------------------------------------------------------------------------
# diagnostics for raw sequences

def absorption_diagnostics(points: Sequence[OmegaPoint], target: OmegaPoint, tail: int = 10) -> dict:
    """Residuals for a finite raw sequence; never a convergence verdict.

    Reports the largest direction-inclusion residual and the offset
    residual ‖P_{V⊥} w_i − w‖ over the last ``tail`` points, plus an
    estimate of the minimal absorbing direction (span of the tail
    directions and offset increments).
    """
    V = target.direction
    perp = V.complement()
    tail_pts = list(points)[-tail:]
    dir_res = [float(np.max(np.linalg.norm(p.direction.basis - sp.project(V, p.direction.basis), axis=1)))
               if p.dim else 0.0 for p in tail_pts]
    off_res = [float(np.linalg.norm(sp.project(perp, p.offset) - target.offset)) for p in tail_pts]
    rows = [p.direction.basis for p in tail_pts]
    incs = [b.offset - a.offset for a, b in zip(tail_pts, tail_pts[1:])]
    rows += [v[None, :] for v in incs if np.linalg.norm(v) > 1e-9]
    est = sp.orthonormalize(np.vstack(rows) if rows else np.zeros((0, target.ambient_dim)),
                            tol=1e-6, ambient_dim=target.ambient_dim)
    return {"direction_residual": dir_res, "offset_residual": off_res,
            "minimal_absorber_dim_estimate": est.dim, "verdict": None}
