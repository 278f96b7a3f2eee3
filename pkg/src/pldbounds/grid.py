"""Discretization grids for finitely supported privacy loss distributions.

A grid is the ordered set alphas = {0 = a_0 < a_1 < ... < a_k = +inf}
together with its log image epsilons = {-inf, ln a_1, ..., ln a_{k-1}, +inf}.
Uniform grids additionally carry a spacing Delta with every finite epsilon an
integer multiple of Delta (so 0 is always on the lattice); only uniform grids
can be composed by convolution, because the lattice must be closed under
addition.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .curves import HockeyStickCurve
from .errors import NumericalValidityError, RequestError

__all__ = ["DiscretizationGrid", "default_epsilon_range"]

_SPACING_ATOL = 1e-9

#: Curve values below this are treated as numerically negligible when the
#: default grid range is chosen.
CURVE_TAIL_THRESHOLD = 1e-20


@dataclasses.dataclass(frozen=True)
class DiscretizationGrid:
    """Ordered alpha grid with endpoints exactly 0 and +inf."""

    alphas: np.ndarray
    epsilons: np.ndarray
    spacing: float | None = None

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float)
        epsilons = np.asarray(self.epsilons, dtype=float)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "epsilons", epsilons)
        if alphas.ndim != 1 or alphas.shape != epsilons.shape or alphas.size < 3:
            raise RequestError("grid needs matching 1-D arrays with >= 3 points")
        if alphas[0] != 0.0 or not math.isinf(alphas[-1]):
            raise RequestError("alpha grid must start at 0 and end at +inf")
        if epsilons[0] != -math.inf or epsilons[-1] != math.inf:
            raise RequestError("epsilon grid must run from -inf to +inf")
        interior = alphas[1:-1]
        if not np.all(np.isfinite(interior)) or not np.all(np.diff(alphas) > 0):
            raise RequestError("alpha grid must be strictly increasing and finite inside")
        if not np.allclose(np.log(interior), epsilons[1:-1], rtol=0, atol=1e-9):
            raise RequestError("epsilons must be the logs of the interior alphas")
        if self.spacing is not None:
            if self.spacing <= 0:
                raise RequestError(f"spacing must be positive, got {self.spacing}")
            diffs = np.diff(epsilons[1:-1])
            if diffs.size and np.max(np.abs(diffs - self.spacing)) > _SPACING_ATOL:
                raise RequestError("grid epsilons are not uniformly spaced")
            if not np.any(epsilons[1:-1] == 0.0):
                raise RequestError("uniform grids must contain epsilon = 0")
        alphas.setflags(write=False)
        epsilons.setflags(write=False)

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_epsilons(cls, finite_epsilons, spacing: float | None = None) -> "DiscretizationGrid":
        finite = np.asarray(finite_epsilons, dtype=float)
        if finite.ndim != 1 or finite.size == 0 or not np.all(np.isfinite(finite)):
            raise RequestError("need a non-empty 1-D array of finite epsilons")
        if not np.all(np.diff(finite) > 0):
            raise RequestError("finite epsilons must be strictly increasing")
        if np.max(np.abs(finite)) > 700.0:
            raise NumericalValidityError(
                "finite epsilons beyond +/-700 are not representable as alphas; "
                "composition needs a truncation budget large enough to trim the tails"
            )
        epsilons = np.concatenate(([-math.inf], finite, [math.inf]))
        alphas = np.concatenate(([0.0], np.exp(finite), [math.inf]))
        return cls(alphas=alphas, epsilons=epsilons, spacing=spacing)

    @classmethod
    def from_alphas(cls, alphas) -> "DiscretizationGrid":
        alphas = np.asarray(alphas, dtype=float)
        if alphas.size < 3 or alphas[0] != 0.0 or not math.isinf(alphas[-1]):
            raise RequestError("alpha list must run from 0 to +inf with interior points")
        with np.errstate(divide="ignore"):
            epsilons = np.log(alphas)
        epsilons[-1] = math.inf
        return cls(alphas=alphas, epsilons=epsilons, spacing=None)

    @classmethod
    def uniform(cls, spacing: float, eps_min: float, eps_max: float) -> "DiscretizationGrid":
        """Lattice {j * spacing : j_min <= j <= j_max} covering [eps_min, eps_max].

        The lattice is widened if necessary so that it always contains 0.
        """
        if not (spacing > 0 and math.isfinite(spacing)):
            raise RequestError(f"spacing must be positive and finite, got {spacing}")
        if not (math.isfinite(eps_min) and math.isfinite(eps_max) and eps_min <= eps_max):
            raise RequestError(f"bad epsilon range [{eps_min}, {eps_max}]")
        j_min = min(math.floor(eps_min / spacing + 1e-9), 0)
        j_max = max(math.ceil(eps_max / spacing - 1e-9), 0)
        finite = np.arange(j_min, j_max + 1, dtype=float) * spacing
        return cls.from_epsilons(finite, spacing=spacing)

    # -- views ----------------------------------------------------------------

    @property
    def k(self) -> int:
        """Index of the +inf grid point (the grid has k + 1 points)."""
        return self.alphas.size - 1

    @property
    def finite_alphas(self) -> np.ndarray:
        """Alphas a_0 .. a_{k-1} (everything except +inf)."""
        return self.alphas[:-1]

    @property
    def finite_epsilons(self) -> np.ndarray:
        """The finite epsilons ln a_1 .. ln a_{k-1}."""
        return self.epsilons[1:-1]

    @property
    def index_of_one(self) -> int | None:
        """Index i with alphas[i] == 1 (epsilons[i] == 0), if present."""
        hits = np.nonzero(self.epsilons == 0.0)[0]
        return int(hits[0]) if hits.size else None

    def lattice_offset(self) -> int:
        """Integer j of the first finite epsilon on a uniform grid."""
        if self.spacing is None:
            raise RequestError("lattice offset is defined for uniform grids only")
        j0 = round(float(self.epsilons[1]) / self.spacing)
        if abs(self.epsilons[1] - j0 * self.spacing) > _SPACING_ATOL:
            raise RequestError("grid epsilons do not sit on the spacing lattice")
        return int(j0)


def default_epsilon_range(
    curve: HockeyStickCurve,
    spacing: float,
    tail_threshold: float = CURVE_TAIL_THRESHOLD,
    max_steps: int = 1 << 26,
) -> tuple[float, float]:
    """Pick [eps_min, eps_max] multiples of spacing covering the curve.

    eps_max is the smallest positive multiple of spacing with
    h(e^eps) < tail_threshold; the curve beyond contributes negligibly and is
    folded into the tail value.  eps_min is chosen symmetrically through the
    gap h(alpha) - (1 - alpha), which decays to 0 as alpha -> 0; below it the
    curve is indistinguishable from the line 1 - alpha and carries no mass
    information.  Both searches exploit monotonicity (value non-increasing,
    gap non-decreasing) via doubling plus bisection.
    """

    def smallest_step(predicate) -> int:
        # smallest j >= 1 with predicate(j) true; predicate monotone in j
        j = 1
        while not predicate(j):
            j *= 2
            if j > max_steps:
                raise NumericalValidityError(
                    "curve tail does not decay within the searchable range"
                )
        lo, hi = j // 2, j  # predicate(lo) False (or lo == 0), predicate(hi) True
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if predicate(mid):
                hi = mid
            else:
                lo = mid
        return hi

    j_hi = smallest_step(lambda j: curve.value(math.exp(j * spacing)) < tail_threshold)
    j_lo = smallest_step(lambda j: curve.gap(math.exp(-j * spacing)) < tail_threshold)
    return (-j_lo * spacing, j_hi * spacing)
