"""Resolvent algebras on finite-dimensional symplectic spaces.

Levee calculus for the classical algebra, Weyl and Berezin quantization on
truncated Fock spaces, strict-deformation diagnostics, and the
affine-subspace description of the character space.
"""
from .config import DEFAULT_TOL, Tolerances
from .fock import FockContext, FockOperator, TruncationError, field_operator, weyl_operator
from .gauss import PolyGaussian, pg_fourier, pg_l1, pg_norms, pg_sup
from .levee import (CRElement, Generator, Levee, ae_value, evaluate, generator_approx, heat_flow,
                    multiply, poisson_bracket, sup_norm)
from .omega import Rate, StructuredPath, absorption, convergence
from .quantization import QuadratureError, berezin_quantize, twisted_product, weyl_quantize
from .sdq import sdq_defects, truncation_sweep
from .subspace import AffineSubspace, Subspace

__version__ = "0.1.0"

__all__ = [
    "AffineSubspace", "CRElement", "DEFAULT_TOL", "FockContext", "FockOperator", "Generator", "Levee",
    "PolyGaussian", "QuadratureError", "Rate", "StructuredPath", "Subspace", "Tolerances",
    "TruncationError", "absorption", "ae_value", "berezin_quantize", "convergence", "evaluate",
    "field_operator", "generator_approx", "heat_flow", "multiply", "pg_fourier", "pg_l1", "pg_norms",
    "pg_sup", "poisson_bracket", "sdq_defects", "sup_norm", "truncation_sweep", "twisted_product",
    "weyl_operator", "weyl_quantize",
]
