"""Command-line entry point ``resolvent-lab``.

Usage::

    resolvent-lab <scenario> --config FILE --out DIR [--seed K] [--cutoff N]
                  [--hbar-grid a,b,c]

Exit status: 0 when every configured assertion passes, 1 when one fails,
2 for a config that does not match the schema (nothing is written),
3 for a numerical guard violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import serialize as ser
from .config import DEFAULT_QUAD_DEGREE, DEFAULT_SEED, DEFAULT_TOL
from .fock import FockContext, TruncationError, export_matrix, op_norm
from .gauss import PolyGaussian, pg_fourier, pg_l1
from .levee import (CRElement, ae_value, canonical_layers, character_lower_bound, heat_flow,
                    layer_quotient_norm, multiply, sup_norm)
from .omega import (absorption, character_consistency, convergence, density_path,
                    probe_dictionary, refuting_probe)
from .quantization import QuadratureError, berezin_quantize, weyl_quantize
from .report import emit_report
from .sdq import resolvent_separation, sdq_defects
from .subspace import AffineSubspace, orthonormalize

SCENARIOS = ("quantize", "sdq-sweep", "berezin-link", "resolvent-separation",
             "layer-norms", "omega-converge", "spectrum-probe")

_NUM = {"type": "number"}
_CPLX = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}]}
_VEC = {"type": "array", "items": _NUM}
_TERM = {"type": "object", "additionalProperties": False, "required": ["coeff"],
         "properties": {"coeff": _CPLX, "monomial": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                        "A": {"type": "array", "items": {"type": "array", "items": _CPLX}},
                        "b": {"type": "array", "items": _CPLX}}}
_LEVEE = {"type": "object", "additionalProperties": False, "required": ["basis"],
          "properties": {"basis": {"type": "array", "items": _VEC},
                         "terms": {"type": "array", "items": _TERM},
                         "resolvent": {"type": "array", "items": {
                             "type": "object", "additionalProperties": False,
                             "required": ["coeff", "lambda", "scale"],
                             "properties": {"coeff": _CPLX, "lambda": _NUM, "scale": _NUM}}}}}
_ELEMENT = {"oneOf": [
    {"type": "array", "items": _LEVEE},
    {"type": "object", "additionalProperties": False, "required": ["levees"],
     "properties": {"ambient_dim": {"type": "integer", "minimum": 1},
                    "levees": {"type": "array", "items": _LEVEE}}}]}
_POINT = {"type": "object", "additionalProperties": False, "required": ["offset"],
          "properties": {"ambient_dim": {"type": "integer"}, "direction": {"type": "array", "items": _VEC},
                         "offset": _VEC}}
_RATE = {"type": "object", "additionalProperties": False, "required": ["coefficients"],
         "properties": {"coefficients": {"type": "object", "additionalProperties": _NUM},
                        "alternating": {"type": "boolean"}}}
_PATH = {"type": "object", "additionalProperties": False, "required": ["base"],
         "properties": {"base": _POINT, "escape_directions": {"type": "array", "items": _VEC},
                        "rates": {"type": "array", "items": _RATE},
                        "target": _POINT, "expect": {"enum": ["converges", "absorbed-only", "not-absorbed"]}}}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": 1},
        "scenario": {"enum": list(SCENARIOS)},
        "n": {"type": "integer", "minimum": 1},
        "cutoff": {"type": "integer", "minimum": 1},
        "cutoffs": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "padding": {"type": "integer", "minimum": 0},
        "hbar": {"type": "number", "exclusiveMinimum": 0},
        "hbar_grid": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "degree": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": {"type": "object", "additionalProperties": False,
                       "properties": {k: _NUM for k in DEFAULT_TOL.as_dict()}},
        "symbols": {"type": "object", "additionalProperties": _ELEMENT},
        "pairs": {"type": "array", "items": {"type": "array", "items": _VEC, "minItems": 2, "maxItems": 2}},
        "points": {"type": "array", "items": _POINT},
        "targets": {"type": "array", "items": _POINT},
        "paths": {"type": "array", "items": _PATH},
        "layers": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "assertions": {"type": "object", "additionalProperties": _NUM},
    },
}


class ConfigError(ValueError):
    pass


def load_config(path, scenario: str) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"schema violation at {list(exc.absolute_path)}: {exc.message}") from exc
    if cfg.get("scenario", scenario) != scenario:
        raise ConfigError(f"config is for scenario {cfg['scenario']!r}, not {scenario!r}")
    try:
        _parse_symbols(cfg)
        for key in ("points", "targets"):
            [ser.point_from_dict(p) for p in cfg.get(key, [])]
        [ser.path_from_dict(p) for p in cfg.get("paths", [])]
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid document in config: {exc}") from exc
    return cfg


def reference_pair(n: int = 1):
    """e^{-t²/2}∘p_{e1} and e^{-t²/2}∘p_{e_{n+1}} on R^{2n}."""
    m = 2 * n
    g = PolyGaussian.gaussian(0.5)
    e1, e2 = np.eye(m)[0], np.eye(m)[n]
    return CRElement.linear_form(e1, g), CRElement.linear_form(e2, g)


def _parse_symbols(cfg: dict) -> dict:
    n = cfg.get("n", 1)
    f, g = reference_pair(n)
    out = {"f": f, "g": g}
    for name, doc in cfg.get("symbols", {}).items():
        f = ser.crelement_from_dict(doc, 2 * n)
        if f.ambient_dim != 2 * n:
            raise ValueError(f"symbol {name!r} lives on R^{f.ambient_dim}, expected R^{2 * n}")
        out[name] = f
    return out


def _assert(checks: list, name: str, value: float, bound: float, op: str = "<=", error: float = 0.0) -> None:
    ok = bool(value <= bound) if op == "<=" else bool(value >= bound)
    checks.append({"check": name, "value": float(value), "bound": float(bound), "op": op,
                   "error_estimate": float(error), "pass": ok})


def _ctx(cfg: dict, hbar: float | None = None) -> FockContext:
    return FockContext(cfg.get("n", 1), cfg.get("cutoff", 60), hbar if hbar is not None else cfg.get("hbar", 1.0),
                       padding=cfg.get("padding"))


# scenarios -----------------------------------------------------------------

def run_quantize(cfg, out: Path):
    ctx = _ctx(cfg)
    deg = cfg.get("degree", DEFAULT_QUAD_DEGREE)
    syms = _parse_symbols(cfg)
    A = cfg.get("assertions", {})
    checks, items = [], {}
    for name in sorted(syms):
        f = syms[name]
        QW = weyl_quantize(ctx, f, deg, estimate_error=True)
        QB = berezin_quantize(ctx, f, deg, estimate_error=True)
        l1 = 0.0
        for lv in f.levees:
            l1 += abs(lv.g.constant_value()) if lv.direction.dim == 0 else sum(pg_l1(pg_fourier(lv.g)))
        export_matrix(QW, out / f"weyl_{name}.mat")
        export_matrix(QB, out / f"berezin_{name}.mat")
        items[name] = {"weyl_norm": op_norm(QW), "weyl_error": QW.error, "berezin_norm": op_norm(QB),
                       "berezin_error": QB.error, "l1_fourier": l1}
        _assert(checks, f"l1_bound[{name}]", op_norm(QW), l1 + QW.error + A.get("l1_slack", 1e-10), error=QW.error)
    return {"symbols": items}, checks, {}


def run_sdq(cfg, out: Path):
    grid = cfg.get("hbar_grid", [1.0, 0.5, 0.25, 0.1, 0.05, 0.01])
    syms = _parse_symbols(cfg)
    deg = cfg.get("degree", DEFAULT_QUAD_DEGREE)
    rep = sdq_defects(syms["f"], syms["g"], grid, _ctx(cfg), degree=deg, seed=cfg.get("seed", DEFAULT_SEED))
    A = cfg.get("assertions", {})
    rows = [[r.hbar, r.norm_Q, r.product_defect, r.bracket_defect, r.wb_gap] for r in rep.records]
    emit_report({"header": ["hbar", "norm_Q", "defect_II", "defect_III", "wb_gap"], "rows": rows},
                "csv", out / "sdq.csv")
    checks = []
    guard = [r for r in rep.records if r.guard_violation]
    ok = [r for r in rep.records if not r.guard_violation]
    if len(ok) >= 2:
        first, last = ok[0], ok[-1]
        scale = rep.classical_norm * sup_norm(syms["g"], cfg.get("seed", DEFAULT_SEED))
        fac = A.get("min_decrease_factor", 5.0)
        for name, err in (("product_defect", "product_error"), ("bracket_defect", "bracket_error")):
            _assert(checks, f"{name}_decrease", getattr(first, name) / max(getattr(last, name), 1e-300), fac, ">=")
            _assert(checks, f"{name}_final", getattr(last, name), A.get("final_defect", 0.02) * scale,
                    error=getattr(last, err) + last.truncation_error)
        _assert(checks, "norm_limit", abs(last.norm_Q - rep.classical_norm),
                A.get("norm_rel_gap", 0.05) * rep.classical_norm, error=last.norm_error)
    summary = rep.as_dict()
    extra = {"guard_violations": [{"hbar": r.hbar, "check": "displacement", "message": r.guard_violation}
                                  for r in guard]}
    return summary, checks, extra


def run_berezin_link(cfg, out: Path):
    grid = cfg.get("hbar_grid", [2.0, 1.0, 0.5])
    f = _parse_symbols(cfg)["f"]
    deg = cfg.get("degree", DEFAULT_QUAD_DEGREE)
    tol = cfg.get("assertions", {}).get("link_tol", 1e-8)
    rows, checks = [], []
    for h in grid:
        ctx = _ctx(cfg, h)
        QB = berezin_quantize(ctx, f, deg, estimate_error=True)
        QW = weyl_quantize(ctx, heat_flow(f, h), deg, estimate_error=True)
        d = op_norm(QB - QW)
        rows.append([float(h), d, QB.error + QW.error])
        _assert(checks, f"berezin_link[hbar={h}]", d, tol, error=QB.error + QW.error)
    emit_report({"header": ["hbar", "link_residual", "error_estimate"], "rows": rows}, "csv", out / "berezin_link.csv")
    return {"rows": rows}, checks, {}


def run_resolvent_separation(cfg, out: Path):
    pairs = cfg.get("pairs", [[[1.0, 0.0], [0.0, 1.0]]])
    Ns = cfg.get("cutoffs", [20, 40, 60, 80])
    A = cfg.get("assertions", {})
    rows, checks = [], []
    for k, (x, y) in enumerate(pairs):
        qs = []
        cl = None
        for N in Ns:
            ctx = FockContext(len(x) // 2, N, cfg.get("hbar", 1.0), padding=cfg.get("padding"))
            q, c = resolvent_separation(x, y, ctx, seed=cfg.get("seed", DEFAULT_SEED))
            cl = c
            qs.append(q)
            rows.append([k, N, q, c])
        _assert(checks, f"classical[{k}]", cl, 1.0 - A.get("classical_tol", 1e-6), ">=")
        steps = min(b - a for a, b in zip(qs, qs[1:])) if len(qs) > 1 else 0.0
        _assert(checks, f"quantum_monotone[{k}]", steps, -A.get("monotone_tol", 1e-12), ">=")
        _assert(checks, f"quantum_final[{k}]", qs[-1], A.get("quantum_min", 0.9), ">=")
    emit_report({"header": ["pair", "N", "quantum", "classical"], "rows": rows}, "csv", out / "separation.csv")
    return {"rows": rows}, checks, {}


def run_layer_norms(cfg, out: Path):
    f = _parse_symbols(cfg)["f"]
    seed = cfg.get("seed", DEFAULT_SEED)
    tol = cfg.get("assertions", {}).get("match_tol", 1e-6)
    layers = canonical_layers(f)
    rs = cfg.get("layers", sorted({r - 1 for r in layers if r >= 1}))
    res, checks = {}, []
    sup = sup_norm(f, seed)
    for r in rs:
        q = layer_quotient_norm(f, r, seed)
        lb = character_lower_bound(f, r, seed)
        res[str(r)] = {"quotient_norm": q, "character_bound": lb}
        _assert(checks, f"layer_match[r={r}]", abs(q - lb), tol)
        _assert(checks, f"dominated[r={r}]", q, sup + tol)
    return {"sup_norm": sup, "layer_sizes": {str(k): len(v) for k, v in layers.items()}, "layers": res}, checks, {}


def run_omega(cfg, out: Path):
    paths = []
    for d in cfg.get("paths", []):
        p = ser.path_from_dict(d)
        tgt = ser.point_from_dict(d["target"]) if "target" in d else None
        paths.append((p, tgt, d.get("expect")))
    for t in cfg.get("targets", []):
        tgt = ser.point_from_dict(t)
        paths.append((density_path(tgt), tgt, "converges"))
    if not paths:
        tgt = ser.point_from_dict({"direction": [[1.0, 0.0, 0.0]], "offset": [0.0, 0.0, 1.0]})
        paths.append((density_path(tgt), tgt, "converges"))
    seed = cfg.get("seed", DEFAULT_SEED)
    tol = cfg.get("assertions", {}).get("deviation_tol", 1e-3)
    results, checks, rows = [], [], []
    for k, (p, tgt, expect) in enumerate(paths):
        if tgt is None:
            raise ConfigError("every path needs a target")
        conv = convergence(p, tgt)
        probes = probe_dictionary(tgt.ambient_dim, seed=seed)
        if conv.verdict == "absorbed-only":
            probes = probes + [refuting_probe(conv)]
        rep = character_consistency(p, tgt, probes)
        entry = {"path": ser.path_to_dict(p), "target": ser.point_to_dict(tgt), "verdict": conv.verdict,
                 "absorbed": absorption(p, tgt).absorbed, "consistency": rep.as_dict()}
        if conv.verdict == "absorbed-only":
            entry["witness"] = {"parity": conv.witness["parity"], "direction": conv.witness["direction"],
                                "offset": conv.witness["offset"]}
        results.append(entry)
        for j, devs in enumerate(rep.deviations):
            for i, d in zip(rep.indices, devs):
                rows.append([k, j, i, d])
        if expect is not None:
            checks.append({"check": f"verdict[{k}]", "value": conv.verdict, "bound": expect, "op": "==",
                           "error_estimate": 0.0, "pass": conv.verdict == expect})
        if conv.converges:
            _assert(checks, f"deviation[{k}]", rep.max_final_deviation, tol)
        elif conv.verdict == "absorbed-only":
            _assert(checks, f"refuted[{k}]", float(len(rep.refuting)), 1.0, ">=")
    emit_report({"header": ["path", "probe", "index", "deviation"], "rows": rows}, "csv", out / "probe_deviations.csv")
    return {"paths": results}, checks, {}


def run_spectrum_probe(cfg, out: Path):
    syms = _parse_symbols(cfg)
    f, g = syms["f"], syms["g"]
    m = f.ambient_dim
    pts = [ser.point_from_dict(p) for p in cfg.get("points", [])]
    if not pts:
        rng = np.random.default_rng(cfg.get("seed", DEFAULT_SEED))
        for k in range(m + 1):
            V = orthonormalize(rng.normal(size=(k, m)), ambient_dim=m)
            pts.append(AffineSubspace.through(V, rng.normal(size=m)))
    tol = cfg.get("assertions", {}).get("multiplicativity_tol", 1e-10)
    fg = multiply(f, g)
    rows, checks = [], []
    for k, p in enumerate(pts):
        a, b, c = ae_value(f, p), ae_value(g, p), ae_value(fg, p)
        dev = abs(c - a * b)
        rows.append([k, p.dim, a.real, a.imag, b.real, b.imag, c.real, c.imag, dev])
        _assert(checks, f"multiplicative[{k}]", dev, tol)
        _assert(checks, f"unital[{k}]", abs(ae_value(CRElement.unit(m), p) - 1.0), tol)
    emit_report({"header": ["point", "dim", "f_re", "f_im", "g_re", "g_im", "fg_re", "fg_im", "deviation"],
                 "rows": rows}, "csv", out / "characters.csv")
    return {"points": [ser.point_to_dict(p) for p in pts]}, checks, {}


RUNNERS = {
    "quantize": run_quantize,
    "sdq-sweep": run_sdq,
    "berezin-link": run_berezin_link,
    "resolvent-separation": run_resolvent_separation,
    "layer-norms": run_layer_norms,
    "omega-converge": run_omega,
    "spectrum-probe": run_spectrum_probe,
}


def run_scenario(scenario: str, cfg: dict, out: Path) -> int:
    """Execute a validated config; returns the exit status."""
    out.mkdir(parents=True, exist_ok=True)
    meta = {"scenario": scenario, "n": cfg.get("n", 1), "N": cfg.get("cutoff", 60),
            "padding": cfg.get("padding"), "degree": cfg.get("degree", DEFAULT_QUAD_DEGREE),
            "seed": cfg.get("seed", DEFAULT_SEED), "hbar_grid": cfg.get("hbar_grid"),
            "tolerances": {**DEFAULT_TOL.as_dict(), **cfg.get("tolerances", {})}}
    try:
        results, checks, extra = RUNNERS[scenario](cfg, out)
    except (TruncationError, QuadratureError) as exc:
        summary = {"metadata": meta, "status": "guard-violation",
                   "guard_violation": {"check": type(exc).__name__, "message": str(exc)}}
        emit_report(summary, "json", out / "summary.json")
        print(f"guard violation ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    passed = all(c["pass"] for c in checks)
    status = 0 if passed else 1
    if extra.get("guard_violations"):
        status = 3
    summary = {"metadata": meta, "results": results, "assertions": checks, **extra,
               "status": {0: "pass", 1: "fail", 3: "guard-violation"}[status]}
    emit_report(summary, "json", out / "summary.json")
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resolvent-lab", description=__doc__.split("\n")[0])
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--hbar-grid")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        cfg = load_config(args.config, args.scenario)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.cutoff is not None:
            if args.cutoff < 1:
                raise ConfigError("--cutoff must be positive")
            cfg["cutoff"] = args.cutoff
        if args.hbar_grid:
            try:
                grid = [float(v) for v in args.hbar_grid.split(",")]
            except ValueError as exc:
                raise ConfigError(f"bad --hbar-grid: {exc}") from exc
            if any(h <= 0 for h in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("--hbar-grid must be positive and strictly decreasing")
            cfg["hbar_grid"] = grid
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except (ConfigError, jsonschema.ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run_scenario(args.scenario, cfg, Path(args.out))


if __name__ == "__main__":
    sys.exit(main())
