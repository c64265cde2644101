"""Truncated bosonic Fock space, field and Weyl operators, resolvents.

Phase space R^{2n} ∋ x = (q, p) maps to the mode vector
z = (q + i s p)/√2 with a sign s fixed by a self-test of the Weyl
relation E(x)E(y) = e^{-iħσ(x,y)/2} E(x+y) (see :func:`calibrate_sign`).
φ(x) = √ħ (Σ_j z_j a_j* + conj(z_j) a_j).

Operators are held on a padded working space (occupation numbers with
total ≤ N + padding). Products are formed there and the reported matrix
is the compression to total ≤ N, which removes the edge artefacts of a
hard cutoff from low-lying matrix elements.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product as iproduct
from math import comb, factorial, lgamma
from pathlib import Path

import numpy as np

from .levee import sigma


class TruncationError(ArithmeticError):
    """A displacement or amplitude is too large for the Fock cutoff."""


def occupation_basis(n: int, N: int) -> list:
    """Occupation tuples with total ≤ N, ordered by total then lexicographically."""
    states = [k for k in iproduct(range(N + 1), repeat=n) if sum(k) <= N]
    return sorted(states, key=lambda k: (sum(k), k))


@lru_cache(maxsize=None)
def _calibrated_sign() -> int:
    best, best_sign = np.inf, 1
    for s in (1, -1):
        ctx = FockContext(1, 20, 1.0, complex_sign=s)
        x, y = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        lhs = weyl_operator(ctx, x) @ weyl_operator(ctx, y)
        rhs = weyl_operator(ctx, x + y).scaled(np.exp(-0.5j * sigma(x, y)))
        res = np.linalg.norm((lhs - rhs).compress(5), 2)
        if res < best:
            best, best_sign = res, s
    return best_sign


def calibrate_sign() -> int:
    """Sign s in z = (q + i s p)/√2 reproducing the σ-phase of the Weyl relation."""
    return _calibrated_sign()


@dataclass(frozen=True)
class FockContext:
    """Truncation parameters.

    Parameters
    ----------
    modes : int
        Number of modes n (phase space R^{2n}).
    cutoff : int
        Reported cutoff N on the total number of quanta.
    hbar : float
        Nonzero Planck parameter.
    padding : int, optional
        Extra quanta in the working space; defaults to N.
    complex_sign : int, optional
        Sign s of the complex structure; calibrated when omitted.
    guard : float
        Displacements must satisfy √ħ‖z(x)‖ ≤ guard·√N.
    """

    modes: int
    cutoff: int
    hbar: float = 1.0
    padding: int | None = None
    complex_sign: int | None = None
    guard: float = 0.5

    def __post_init__(self):
        if int(self.modes) < 1:
            raise ValueError("modes must be positive")
        if int(self.cutoff) < 1:
            raise ValueError("cutoff must be at least 1")
        if self.hbar == 0 or not np.isfinite(self.hbar):
            raise ValueError("hbar must be nonzero and finite")
        object.__setattr__(self, "modes", int(self.modes))
        object.__setattr__(self, "cutoff", int(self.cutoff))
        object.__setattr__(self, "hbar", float(self.hbar))
        pad = self.cutoff if self.padding is None else int(self.padding)
        if pad < 0:
            raise ValueError("padding must be nonnegative")
        object.__setattr__(self, "padding", pad)
        if self.complex_sign is not None and self.complex_sign not in (1, -1):
            raise ValueError("complex_sign must be +1 or -1")

    @property
    def sign(self) -> int:
        return self.complex_sign if self.complex_sign is not None else calibrate_sign()

    @property
    def work_cutoff(self) -> int:
        return self.cutoff + self.padding

    @property
    def dim(self) -> int:
        """Reported basis size C(N + n, n)."""
        return comb(self.cutoff + self.modes, self.modes)

    @property
    def work_dim(self) -> int:
        return comb(self.work_cutoff + self.modes, self.modes)

    @cached_property
    def basis(self) -> list:
        return occupation_basis(self.modes, self.work_cutoff)

    @cached_property
    def index(self) -> dict:
        return {k: i for i, k in enumerate(self.basis)}

    @cached_property
    def annihilators(self) -> tuple:
        D = self.work_dim
        out = []
        for j in range(self.modes):
            a = np.zeros((D, D))
            for col, k in enumerate(self.basis):
                if k[j] > 0:
                    lower = list(k)
                    lower[j] -= 1
                    a[self.index[tuple(lower)], col] = np.sqrt(k[j])
            a.setflags(write=False)
            out.append(a)
        return tuple(out)

    def replace(self, **kw) -> "FockContext":
        return dataclasses.replace(self, **kw)

    def mode_vector(self, x) -> np.ndarray:
        """z = (q + i s p)/√2 for x = (q, p), s the calibrated sign."""
        x = np.asarray(x, dtype=float)
        if x.size != 2 * self.modes:
            raise ValueError(f"phase-space vector must have length {2 * self.modes}")
        n = self.modes
        # negative ħ uses the conjugate complex structure with √|ħ|
        s = self.sign * (1 if self.hbar > 0 else -1)
        return (x[:n] + 1j * s * x[n:]) / np.sqrt(2.0)

    def hermitian_vector(self, x) -> np.ndarray:
        """The vector ζ = i z with σ(x, y) = 2 Im⟨ζ_x, ζ_y⟩ and E(x)Exp(w) ∝ Exp(w + √ħ ζ)."""
        return 1j * self.mode_vector(x)

    def check_displacement(self, x) -> None:
        amp = np.sqrt(abs(self.hbar)) * np.linalg.norm(self.mode_vector(x))
        if amp > self.guard * np.sqrt(self.cutoff):
            raise TruncationError(
                f"displacement amplitude {amp:.3g} exceeds {self.guard}·√N = {self.guard * np.sqrt(self.cutoff):.3g}")


class FockOperator:
    """Operator on the padded working space; ``matrix`` is the N-compression."""

    __slots__ = ("ctx", "work", "error")

    def __init__(self, ctx: FockContext, work: np.ndarray, error: float = 0.0):
        work = np.asarray(work, dtype=complex)
        if work.shape != (ctx.work_dim, ctx.work_dim):
            raise ValueError(f"matrix shape {work.shape} does not match working dim {ctx.work_dim}")
        self.ctx = ctx
        self.work = work
        self.error = float(error)

    @classmethod
    def identity(cls, ctx: FockContext, c: complex = 1.0) -> "FockOperator":
        return cls(ctx, c * np.eye(ctx.work_dim, dtype=complex))

    @property
    def matrix(self) -> np.ndarray:
        return self.compress()

    def compress(self, quanta: int | None = None) -> np.ndarray:
        """Restriction to states with at most ``quanta`` total (default N)."""
        q = self.ctx.cutoff if quanta is None else int(quanta)
        d = comb(q + self.ctx.modes, self.ctx.modes)
        return self.work[:d, :d]

    def _same(self, other: "FockOperator") -> None:
        if other.ctx != self.ctx:
            raise ValueError("operators live on different Fock contexts")

    def __add__(self, other):
        self._same(other)
        return FockOperator(self.ctx, self.work + other.work, self.error + other.error)

    def __sub__(self, other):
        self._same(other)
        return FockOperator(self.ctx, self.work - other.work, self.error + other.error)

    def __neg__(self):
        return FockOperator(self.ctx, -self.work, self.error)

    def __matmul__(self, other):
        self._same(other)
        return FockOperator(self.ctx, self.work @ other.work)

    def scaled(self, z: complex) -> "FockOperator":
        return FockOperator(self.ctx, z * self.work, abs(z) * self.error)

    __rmul__ = scaled

    def __mul__(self, z):
        if np.isscalar(z):
            return self.scaled(z)
        return NotImplemented

    def adjoint(self) -> "FockOperator":
        return FockOperator(self.ctx, self.work.conj().T, self.error)

    @property
    def H(self) -> "FockOperator":
        return self.adjoint()

    def __repr__(self) -> str:
        return f"FockOperator(n={self.ctx.modes}, N={self.ctx.cutoff}, hbar={self.ctx.hbar})"


def commutator(A: FockOperator, B: FockOperator) -> FockOperator:
    return A @ B - B @ A


def op_norm(A) -> float:
    """Largest singular value of the reported (compressed) matrix."""
    M = A.matrix if isinstance(A, FockOperator) else np.asarray(A)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def field_matrix(ctx: FockContext, x) -> np.ndarray:
    z = ctx.mode_vector(x)
    D = ctx.work_dim
    out = np.zeros((D, D), complex)
    for zj, a in zip(z, ctx.annihilators):
        out += zj * a.T + np.conj(zj) * a
    out *= np.sqrt(abs(ctx.hbar))
    return 0.5 * (out + out.conj().T)


def field_operator(ctx: FockContext, x) -> FockOperator:
    """φ(x) = √ħ (a*(z) + a(z)) on the working space."""
    return FockOperator(ctx, field_matrix(ctx, x))


def _field_eig(ctx: FockContext, x):
    lam, U = np.linalg.eigh(field_matrix(ctx, x))
    return lam, U


def weyl_operator(ctx: FockContext, x, check: bool = True) -> FockOperator:
    """e^{iφ(x)} through the Hermitian eigendecomposition of the truncated field."""
    if check:
        ctx.check_displacement(x)
    lam, U = _field_eig(ctx, x)
    return FockOperator(ctx, (U * np.exp(1j * lam)) @ U.conj().T)


def resolvent_op(ctx: FockContext, lam: float, x) -> FockOperator:
    """R(λ, x) = (iλ − φ(x))^{-1}."""
    if lam == 0:
        raise ValueError("λ must be nonzero")
    ev, U = _field_eig(ctx, x)
    return FockOperator(ctx, (U / (1j * lam - ev)) @ U.conj().T)


def functional_calculus(ctx: FockContext, g, x) -> FockOperator:
    """g(φ(x)) for a one-variable profile g (PolyGaussian, exact profile or callable)."""
    if getattr(g, "dim", 1) == 0:
        return FockOperator.identity(ctx, g.constant_value())
    if getattr(g, "dim", 1) != 1:
        raise ValueError("functional calculus needs a one-variable profile")
    ev, U = _field_eig(ctx, x)
    vals = np.asarray(g(ev[:, None]) if hasattr(g, "blocks") else g(ev), dtype=complex).reshape(-1)
    return FockOperator(ctx, (U * vals) @ U.conj().T)


# coherent vectors ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoherentVector:
    """Truncated Exp(w) = Σ_k w^{⊗k}/√(k!) on the reported basis."""

    ctx: FockContext
    amplitude: np.ndarray
    coefficients: np.ndarray = field(repr=False)

    def inner(self, other: "CoherentVector") -> complex:
        """⟨self, other⟩, antilinear in the first slot."""
        return complex(np.vdot(self.coefficients, other.coefficients))

    def norm2(self) -> float:
        return float(np.vdot(self.coefficients, self.coefficients).real)

    def padded(self) -> np.ndarray:
        out = np.zeros(self.ctx.work_dim, complex)
        out[: self.coefficients.size] = self.coefficients
        return out


def coherent_tail(w, N: int) -> float:
    """Tail bound ‖w‖^{2(N+1)}/(N+1)! of the truncated exponential series."""
    r2 = float(np.vdot(w, w).real)
    if r2 == 0:
        return 0.0
    return float(np.exp((N + 1) * np.log(r2) - lgamma(N + 2)))


def coherent(ctx: FockContext, w, tail_tol: float = 1e-12) -> CoherentVector:
    """Truncated Exp(w) for a mode amplitude w ∈ C^n."""
    w = np.asarray(w, dtype=complex).ravel()
    if w.size != ctx.modes:
        raise ValueError("amplitude must have one entry per mode")
    tail = coherent_tail(w, ctx.cutoff)
    if tail > tail_tol * max(1.0, np.exp(float(np.vdot(w, w).real))):
        raise TruncationError(f"coherent tail bound {tail:.3g} exceeds tolerance for N={ctx.cutoff}")
    states = ctx.basis[: ctx.dim]
    coef = np.empty(len(states), complex)
    for i, k in enumerate(states):
        v = 1.0 + 0j
        for wj, kj in zip(w, k):
            v *= wj ** kj / np.sqrt(float(factorial(kj)))
        coef[i] = v
    coef.setflags(write=False)
    return CoherentVector(ctx, w, coef)


# matrix dump ---------------------------------------------------------------

def export_matrix(A, path) -> None:
    """Write "dim D" then one "re im" pair per entry, row-major."""
    M = A.matrix if isinstance(A, FockOperator) else np.asarray(A, complex)
    lines = [f"dim {M.shape[0]}"]
    for z in M.ravel():
        lines.append(f"{format(float(z.real), '.16e')} {format(float(z.imag), '.16e')}")
    Path(path).write_text("\n".join(lines) + "\n")


def import_matrix(path) -> np.ndarray:
    lines = Path(path).read_text().split("\n")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "dim":
        raise ValueError("missing 'dim D' header")
    D = int(head[1])
    vals = [complex(float(a), float(b)) for a, b in (ln.split() for ln in lines[1:] if ln.strip())]
    if len(vals) != D * D:
        raise ValueError("entry count does not match the header")
    return np.array(vals).reshape(D, D)
