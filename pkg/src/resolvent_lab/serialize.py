"""JSON documents for CRElements, Ω points and structured paths."""
from __future__ import annotations

import numpy as np

from .gauss import PolyGaussian, pg_pullback
from .levee import CRElement, Levee, ResolventProfile
from .omega import AffineSubspace, Rate, StructuredPath
from .subspace import Subspace, orthonormalize

SCHEMA_VERSION = 1


def _c(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _z(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    re, im = pair
    return complex(float(re), float(im))


def levee_to_dict(lv: Levee) -> dict:
    out: dict = {"basis": lv.direction.basis.tolist(), "terms": []}
    g = lv.g
    if isinstance(g, ResolventProfile):
        out["resolvent"] = [{"coeff": _c(c), "lambda": lam, "scale": s} for c, lam, s in g.terms]
        g = g.smooth
    if g is not None:
        for c, mono, A, b in g.terms:
            out["terms"].append({"coeff": _c(c), "monomial": list(mono),
                                 "A": [[_c(a) for a in row] for row in np.asarray(A)],
                                 "b": [_c(v) for v in np.asarray(b)]})
    return out


def levee_from_dict(d: dict, m: int) -> Levee:
    basis = np.asarray(d.get("basis", []), dtype=float).reshape(-1, m)
    V = orthonormalize(basis, ambient_dim=m) if basis.size else Subspace.zero(m)
    if V.dim != basis.shape[0]:
        raise ValueError("levee basis vectors must be linearly independent")
    # profiles are written in the given basis; move them to the stored one
    M = basis @ V.basis.T if V.dim else np.zeros((0, 0))
    k = V.dim
    terms = []
    for t in d.get("terms", []):
        A = np.array([[_z(a) for a in row] for row in t.get("A", [])], dtype=complex).reshape(k, k)
        b = np.array([_z(v) for v in t.get("b", [])], dtype=complex).reshape(k)
        terms.append((_z(t["coeff"]), tuple(t.get("monomial", [0] * k)), A, b))
    g = PolyGaussian.from_terms(k, terms) if terms else PolyGaussian.zero(k)
    if k and not np.allclose(M, np.eye(k), atol=1e-12):
        g = pg_pullback(g, M)
    if "resolvent" in d:
        if k != 1:
            raise ValueError("resolvent profiles need a one-dimensional basis")
        sgn = float(M[0, 0])
        rterms = tuple((_z(r["coeff"]), float(r["lambda"]), float(r["scale"]) * sgn) for r in d["resolvent"])
        return Levee(V, ResolventProfile(rterms, None if g.is_zero() else g))
    return Levee(V, g)


def crelement_to_dict(f: CRElement) -> dict:
    return {"ambient_dim": f.ambient_dim, "levees": [levee_to_dict(lv) for lv in f.levees]}


def crelement_from_dict(doc, ambient_dim: int | None = None) -> CRElement:
    """Accepts ``{"ambient_dim", "levees"}`` or a bare list of levee dicts."""
    if isinstance(doc, dict):
        m = int(doc.get("ambient_dim", ambient_dim or 0))
        items = doc.get("levees", [])
    else:
        items = doc
        m = ambient_dim or 0
        for it in items:
            if it.get("basis"):
                m = len(it["basis"][0])
                break
    if m <= 0:
        raise ValueError("cannot infer the ambient dimension")
    return CRElement(m, [levee_from_dict(it, m) for it in items])


def point_to_dict(p: AffineSubspace) -> dict:
    return {"ambient_dim": p.ambient_dim, "direction": p.direction.basis.tolist(),
            "offset": p.offset.tolist()}


def point_from_dict(d: dict) -> AffineSubspace:
    off = np.asarray(d["offset"], dtype=float)
    m = off.size
    V = orthonormalize(np.asarray(d.get("direction", []), float).reshape(-1, m), ambient_dim=m)
    return AffineSubspace.through(V, off)


def rate_from_dict(d: dict) -> Rate:
    return Rate({int(k): float(v) for k, v in d["coefficients"].items()}, bool(d.get("alternating", False)))


def path_to_dict(p: StructuredPath) -> dict:
    return {"base": point_to_dict(p.base),
            "escape_directions": [u.tolist() for u in p.escape_directions],
            "rates": [r.as_dict() for r in p.rates]}


def path_from_dict(d: dict) -> StructuredPath:
    return StructuredPath(point_from_dict(d["base"]),
                          tuple(np.asarray(u, float) for u in d.get("escape_directions", [])),
                          tuple(rate_from_dict(r) for r in d.get("rates", [])))
