"""Deformation defects, Weyl-Berezin gaps, resolvent separation, sweeps."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT_QUAD_DEGREE, DEFAULT_SEED
from .fock import (FockContext, TruncationError, commutator, op_norm, resolvent_op,
                   weyl_operator)
from .gauss import PolyGaussian, pg_add, pg_fourier, pg_gaussian_damp, pg_l1
from .levee import (CRElement, Generator, evaluate, generator_approx, multiply,
                    poisson_bracket, sigma, sup_norm)
from .quantization import berezin_quantize, weyl_quantize


@dataclass(frozen=True)
class DefectRecord:
    """Measured quantities at one value of ħ.

    ``*_error`` fields carry the propagated doubled-degree quadrature
    estimate; ``truncation_error`` is the change of the defects when the
    working padding is increased by half the cutoff.
    """

    hbar: float
    norm_Q: float
    product_defect: float
    bracket_defect: float
    wb_gap: float
    norm_error: float = 0.0
    product_error: float = 0.0
    bracket_error: float = 0.0
    wb_error: float = 0.0
    truncation_error: float = 0.0
    guard_violation: str | None = None

    def resolved(self, name: str, factor: float = 10.0, floor: float = 1e-8) -> bool:
        """True when the value dominates its error estimate or sits below ``floor``."""
        val = getattr(self, name)
        err = {"product_defect": self.product_error, "bracket_defect": self.bracket_error,
               "wb_gap": self.wb_error, "norm_Q": self.norm_error}[name]
        return bool(val < floor or val > factor * (err + self.truncation_error))


@dataclass(frozen=True)
class DefectReport:
    hbar_grid: tuple
    records: tuple
    classical_norm: float
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def as_dict(self) -> dict:
        return {"hbar_grid": list(self.hbar_grid), "classical_norm": self.classical_norm,
                "metadata": dict(self.metadata), "records": [asdict(r) for r in self.records]}


def _check_grid(grid) -> tuple:
    grid = tuple(float(h) for h in grid)
    if not grid or any(h <= 0 for h in grid):
        raise ValueError("ħ grid must be nonempty and positive")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("ħ grid must be strictly decreasing")
    return grid


def _defects_at(f, g, fg, br, ctx, degree, route):
    kw = dict(degree=degree, estimate_error=True, route=route)
    Qf = weyl_quantize(ctx, f, **kw)
    Qg = weyl_quantize(ctx, g, **kw)
    Qfg = weyl_quantize(ctx, fg, **kw)
    Qbr = weyl_quantize(ctx, br, **kw)
    QBf = berezin_quantize(ctx, f, **kw)
    nf, ng = op_norm(Qf), op_norm(Qg)
    h = ctx.hbar
    vals = dict(
        norm_Q=nf,
        product_defect=op_norm(Qf @ Qg - Qfg),
        bracket_defect=op_norm(commutator(Qf, Qg).scaled(1j / h) - Qbr),
        wb_gap=op_norm(Qf - QBf),
    )
    errs = dict(
        norm_error=Qf.error,
        product_error=Qf.error * ng + nf * Qg.error + Qfg.error,
        bracket_error=2.0 * (Qf.error * ng + nf * Qg.error) / h + Qbr.error,
        wb_error=Qf.error + QBf.error,
    )
    return vals, errs


def sdq_defects(f: CRElement, g: CRElement, hbar_grid, ctx_template: FockContext,
                degree: int = DEFAULT_QUAD_DEGREE, route: str = "scaled",
                truncation_check: bool = True, seed: int = DEFAULT_SEED) -> DefectReport:
    """Defects of the three strict-deformation axioms along an ħ grid.

    product defect ‖Q(f)Q(g) − Q(fg)‖ and bracket defect
    ‖(i/ħ)[Q(f), Q(g)] − Q({f, g})‖ use the canonical bracket.
    A truncation guard violation at one grid point is recorded there and
    the sweep continues.
    """
    grid = _check_grid(hbar_grid)
    n = ctx_template.modes
    fg = multiply(f, g)
    br = poisson_bracket(f, g, n)
    records = []
    for h in grid:
        ctx = ctx_template.replace(hbar=h)
        try:
            vals, errs = _defects_at(f, g, fg, br, ctx, degree, route)
            trunc = 0.0
            if truncation_check:
                big = ctx.replace(padding=ctx.padding + max(1, ctx.cutoff // 2))
                v2, _ = _defects_at(f, g, fg, br, big, degree, route)
                trunc = max(abs(v2[k] - vals[k]) for k in vals)
            records.append(DefectRecord(h, **vals, **errs, truncation_error=trunc))
        except TruncationError as exc:
            nan = float("nan")
            records.append(DefectRecord(h, nan, nan, nan, nan, guard_violation=str(exc)))
    meta = {"n": n, "N": ctx_template.cutoff, "padding": ctx_template.padding,
            "degree": degree, "route": route, "seed": seed}
    return DefectReport(grid, tuple(records), sup_norm(f, seed), meta)


def weyl_berezin_gap(f: CRElement, hbar_grid, ctx_template: FockContext,
                     degree: int = DEFAULT_QUAD_DEGREE, route: str = "scaled") -> list:
    """‖Q^W_ħ(f) − Q^B_ħ(f)‖ per grid point (NaN where the guard trips)."""
    grid = _check_grid(hbar_grid)
    out = []
    for h in grid:
        ctx = ctx_template.replace(hbar=h)
        try:
            out.append(op_norm(weyl_quantize(ctx, f, degree, route=route)
                               - berezin_quantize(ctx, f, degree, route=route)))
        except TruncationError:
            out.append(float("nan"))
    return out


def wb_gap_bound(f: CRElement, hbar: float) -> float:
    """Σ over levees of ‖(e^{-(ħ/4)|·|²} − 1) ĝ‖₁, an upper bound for the gap."""
    total = 0.0
    for lv in f.levees:
        if lv.direction.dim == 0:
            continue
        gh = pg_fourier(lv.g)
        diff = pg_add(pg_gaussian_damp(gh, hbar / 4.0), gh, -1.0)
        val, err = pg_l1(diff)
        total += val + err
    return total


def resolvent_separation(x, y, ctx: FockContext, exact_classical: bool = True,
                         seed: int = DEFAULT_SEED) -> tuple:
    """(‖R(1,x) − R(1,y)‖ on the truncation, ‖h¹_x − h¹_y‖_∞)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.any(x) or not np.any(y):
        raise ValueError("x and y must be nonzero")
    quantum = op_norm(resolvent_op(ctx, 1.0, x) - resolvent_op(ctx, 1.0, y))
    if exact_classical:
        diff = Generator(1.0, x).element() - Generator(1.0, y).element()
    else:
        diff = generator_approx(Generator(1.0, x)).element - generator_approx(Generator(1.0, y)).element
    classical = sup_norm(diff, seed)
    return quantum, classical


def is_real_symbol(f: CRElement, samples: int = 64, seed: int = DEFAULT_SEED, tol: float = 1e-10) -> bool:
    rng = np.random.default_rng(seed)
    Y = 3.0 * rng.normal(size=(samples, f.ambient_dim))
    vals = evaluate(f, Y)
    return bool(np.max(np.abs(vals.imag)) <= tol * max(1.0, float(np.max(np.abs(vals)))))


def positivity_check(f: CRElement, hbar: float, ctx: FockContext,
                     degree: int = DEFAULT_QUAD_DEGREE) -> float:
    """Smallest eigenvalue of the Hermitian part of Q^B_ħ(f)."""
    if not is_real_symbol(f):
        raise ValueError("positivity check needs a real-valued symbol")
    if not hbar > 0:
        raise ValueError("ħ must be positive")
    Q = berezin_quantize(ctx.replace(hbar=hbar), f, degree).matrix
    return float(np.linalg.eigvalsh(0.5 * (Q + Q.conj().T))[0])


def monotone_within(values: Sequence[float], band: float = 0.1, increasing: bool = False) -> bool:
    """Nonincreasing (or nondecreasing) up to a relative noise band."""
    v = np.asarray(values, dtype=float)
    if increasing:
        v = -v
    return bool(all(b <= a + band * abs(a) for a, b in zip(v, v[1:])))


# ---------------------------------------------------------------------------
# truncation sweeps

def _ccr_residual(N: int, p: dict) -> float:
    ctx = FockContext(1, N, p.get("hbar", 1.0), padding=p.get("padding", 0))
    x = np.asarray(p.get("x", [1.0, 0.0]))
    y = np.asarray(p.get("y", [0.0, 1.0]))
    lhs = weyl_operator(ctx, x) @ weyl_operator(ctx, y)
    rhs = weyl_operator(ctx, x + y).scaled(np.exp(-0.5j * ctx.hbar * sigma(x, y)))
    return float(np.linalg.norm((lhs - rhs).compress(p.get("quanta", 10)), 2))


def _norm_q(N: int, p: dict) -> float:
    ctx = FockContext(1, N, p.get("hbar", 1.0), padding=p.get("padding"))
    f = p.get("f") or CRElement.linear_form([1.0, 0.0], PolyGaussian.gaussian(0.5))
    return op_norm(weyl_quantize(ctx, f, p.get("degree", DEFAULT_QUAD_DEGREE)))


def _resolvent_quantum(N: int, p: dict) -> float:
    ctx = FockContext(1, N, p.get("hbar", 1.0), padding=p.get("padding"))
    x = np.asarray(p.get("x", [1.0, 0.0]))
    y = np.asarray(p.get("y", [0.0, 1.0]))
    return op_norm(resolvent_op(ctx, 1.0, x) - resolvent_op(ctx, 1.0, y))


CHECKS: dict[str, Callable[[int, dict], float]] = {
    "ccr_residual": _ccr_residual,
    "norm_Q": _norm_q,
    "resolvent_quantum": _resolvent_quantum,
}


def truncation_sweep(check: str | Callable, N_list, params: dict | None = None) -> list:
    """Evaluate a named check for each cutoff and report successive differences."""
    Ns = [int(N) for N in N_list]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("N_list must be increasing")
    fn = CHECKS[check] if isinstance(check, str) else check
    params = params or {}
    rows, prev = [], None
    for N in Ns:
        v = float(fn(N, params))
        rows.append({"N": N, "value": v, "diff": None if prev is None else v - prev})
        prev = v
    return rows
