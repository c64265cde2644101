"""Global numerical tolerances and defaults.

All case splits in the package (inclusion tests, merging of directions,
term dropping) read their thresholds from a :class:`Tolerances` value so
that one knob keeps them consistent.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across modules.

    Attributes
    ----------
    rank : float
        Relative cutoff for rank-revealing orthogonalization.
    contains : float
        Absolute residual tolerance for subspace inclusion on unit vectors.
    orth : float
        Tolerance for orthonormality and orthogonality checks.
    merge : float
        Tolerance for identifying Gaussian blocks (A, b) as equal.
    drop : float
        Relative magnitude below which PolyGaussian blocks are dropped.
    """

    rank: float = 1e-10
    contains: float = 1e-8
    orth: float = 1e-10
    merge: float = 1e-12
    drop: float = 1e-14

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = Tolerances()

#: Gauss-Hermite degree per axis used by quantization.
DEFAULT_QUAD_DEGREE = 80
#: Multistart seeds per effective dimension for sup-norm searches.
SUP_SEEDS_PER_DIM = 32
#: Default seed for every randomized search.
DEFAULT_SEED = 0
