"""Finitely supported privacy loss distributions and their discretization.

A pair (P, Q) of distributions supported on a grid {a_0=0, ..., a_k=+inf}
with P(a) = a * Q(a) off infinity and Q(+inf) = 0 has a privacy loss
distribution supported on the grid's epsilons, with mass P(a_i) at
eps_i = ln(a_i).  Its trade-off curve is piecewise linear with kinks on the
grid and constant past a_{k-1}.

The inverse construction (grid-restricted curve values -> pair) assigns

    Q(a_i) = (h(a_{i-1}) - h(a_i)) / (a_i - a_{i-1})
             - (h(a_i) - h(a_{i+1})) / (a_{i+1} - a_i)        for 0 < i < k,
    Q(a_0) = 1 - sum_i Q(a_i),          Q(a_k) = 0,
    P(a_i) = a_i * Q(a_i),              P(a_0) = 0,  P(a_k) = h(a_k),

where difference quotients with an infinite denominator vanish.  Q(a_i) is
the slope increase of the curve at a_i, so convexity is exactly mass
non-negativity; the values must be constant from a_{k-1} to +inf (a jump there
cannot be realised by any finitely supported pair), and then both P and Q
sum to one.

Given a loss distribution with masses m(eps_i), the hockey-stick divergence
at e^eps is

    delta(eps) = sum_{eps'} [1 - e^(eps - eps')]_+ * m(eps'),

with the conventions e^(-inf) = 0 and e^(+inf) = +inf, so mass at +inf
contributes fully (a floor on delta) and mass at -inf contributes nothing.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from .curves import PiecewiseLinearCurve
from .errors import NumericalValidityError, RequestError
from .grid import DiscretizationGrid

__all__ = [
    "DiscreteDominatingPair",
    "FinitePLD",
    "discretize_from_curve",
    "pld_of",
    "delta_at",
    "curve_of",
    "epsilon_for_delta",
    "pld_to_json_dict",
    "pld_from_json_dict",
    "pld_to_json",
    "pld_from_json",
]

#: Negative masses in [-_CLAMP_TOL, 0) are floating-point convexity slack and
#: are clamped to zero; anything more negative is a hard validity failure.
_CLAMP_TOL = 1e-12

#: Tolerance on total probability mass after construction or composition.
_MASS_ATOL = 1e-11

_EPS_BISECT_TOL = 1e-9


@dataclasses.dataclass(frozen=True)
class DiscreteDominatingPair:
    """Distributions (P, Q) on a grid with P = alpha * Q off infinity.

    ``clamp_count`` records how many negative kink masses within the clamping
    tolerance were zeroed while the pair was built (0 means the construction
    was accepted without any convexity slack).
    """

    grid: DiscretizationGrid
    p_masses: np.ndarray
    q_masses: np.ndarray
    clamp_count: int = 0

    def __post_init__(self):
        p = np.asarray(self.p_masses, dtype=float)
        q = np.asarray(self.q_masses, dtype=float)
        object.__setattr__(self, "p_masses", p)
        object.__setattr__(self, "q_masses", q)
        n = self.grid.alphas.size
        if p.shape != (n,) or q.shape != (n,):
            raise RequestError("mass arrays must match the grid size")
        if np.any(p < -1e-15) or np.any(q < -1e-15):
            raise NumericalValidityError("negative probability mass in pair")
        if q[-1] != 0.0:
            raise NumericalValidityError("Q must place no mass at +inf")
        if p[0] != 0.0:
            raise NumericalValidityError("P must place no mass at alpha = 0")
        finite = self.grid.alphas[1:-1]
        if not np.allclose(p[1:-1], finite * q[1:-1], rtol=1e-9, atol=1e-15):
            raise NumericalValidityError("P(alpha) = alpha * Q(alpha) violated")
        for name, masses in (("P", p), ("Q", q)):
            total = math.fsum(masses.tolist())
            if abs(total - 1.0) > _MASS_ATOL:
                raise NumericalValidityError(
                    f"{name} masses sum to {total!r}, expected 1"
                )
        p.setflags(write=False)
        q.setflags(write=False)

    @property
    def mass_at_infinity(self) -> float:
        return float(self.p_masses[-1])


@dataclasses.dataclass(frozen=True)
class FinitePLD:
    """Probability masses on a grid's epsilons, the object that composes.

    ``masses[0]`` is the -inf slot and ``masses[-1]`` the +inf atom.  A
    ``proper`` distribution is one realisable as the loss distribution of a
    pair, which forces masses[0] = 0; rounded-down baseline estimates and
    optimistically truncated compositions may carry mass at -inf and are
    flagged improper (they are used for divergence evaluation only).
    """

    grid: DiscretizationGrid
    masses: np.ndarray
    proper: bool = True
    truncated_low: float = 0.0
    truncated_high: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.shape != (self.grid.alphas.size,):
            raise RequestError("mass array must match the grid size")
        if np.any(m < -1e-15):
            raise NumericalValidityError("negative probability mass in PLD")
        m = np.maximum(m, 0.0)
        object.__setattr__(self, "masses", m)
        total = math.fsum(m.tolist())
        if abs(total - 1.0) > _MASS_ATOL:
            raise NumericalValidityError(f"PLD masses sum to {total!r}, expected 1")
        if self.proper and m[0] != 0.0:
            raise NumericalValidityError("a proper PLD carries no mass at -inf")
        m.setflags(write=False)

    @property
    def mass_at_infinity(self) -> float:
        return float(self.masses[-1])

    @property
    def support_size(self) -> int:
        """Number of finite lattice points."""
        return int(self.masses.size - 2)


# ---------------------------------------------------------------------------
# Pair construction
# ---------------------------------------------------------------------------


def _clamp_kink_masses(q_interior: np.ndarray, first_index: int) -> tuple[np.ndarray, int]:
    """Zero tiny negative kink masses, rejecting anything below -_CLAMP_TOL."""
    worst = int(np.argmin(q_interior)) if q_interior.size else 0
    if q_interior.size and q_interior[worst] < -_CLAMP_TOL:
        raise NumericalValidityError(
            f"curve is non-convex at grid index {first_index + worst}: "
            f"kink mass {q_interior[worst]:.3e}"
        )
    negatives = int(np.count_nonzero(q_interior < 0.0))
    return np.maximum(q_interior, 0.0), negatives


def _pair_from_q(
    grid: DiscretizationGrid,
    q_full: np.ndarray,
    p_inf: float,
    clamp_count: int,
) -> DiscreteDominatingPair:
    k = grid.k
    p = np.zeros_like(q_full)
    p[1:k] = grid.alphas[1:k] * q_full[1:k]
    p[k] = p_inf
    return DiscreteDominatingPair(
        grid=grid, p_masses=p, q_masses=q_full, clamp_count=clamp_count
    )


def discretize_from_curve(h_values, grid: DiscretizationGrid) -> DiscreteDominatingPair:
    """Pair (P, Q) whose curve interpolates the given grid-restricted values.

    The values must satisfy the validity gates of a finitely supported
    curve: h[0] = 1, non-increasing, convex (checked through mass
    non-negativity), at least [1 - alpha]_+ (checked through Q(0) >= 0), and
    constant from a_{k-1} to +inf.  Violations beyond 1e-12 are rejected with
    the offending grid index.
    """
    h = np.asarray(h_values, dtype=float)
    k = grid.k
    if h.shape != (k + 1,):
        raise RequestError("need one curve value per grid point")
    if abs(h[0] - 1.0) > _CLAMP_TOL:
        raise NumericalValidityError(f"curve value at alpha = 0 is {h[0]!r}, expected 1")
    if np.any(h < -_CLAMP_TOL) or np.any(h > 1.0 + _CLAMP_TOL):
        raise NumericalValidityError(
            f"curve values outside [0, 1] at grid index {int(np.argmax((h < -_CLAMP_TOL) | (h > 1.0 + _CLAMP_TOL)))}"
        )
    rising = np.nonzero(np.diff(h) > _CLAMP_TOL)[0]
    if rising.size:
        raise NumericalValidityError(
            f"curve values increase at grid index {int(rising[0]) + 1}"
        )
    if abs(h[k - 1] - h[k]) > _CLAMP_TOL:
        raise NumericalValidityError(
            f"curve must be constant from grid index {k - 1} to +inf "
            f"(got {h[k - 1]!r} vs {h[k]!r}): no finitely supported pair jumps there"
        )
    slopes = np.diff(h[:k]) / np.diff(grid.alphas[:k])
    # Q(a_0) via the normalising form 1 - sum, which keeps the Q total exact.
    q_interior = np.empty(k - 1)
    q_interior[:-1] = np.diff(slopes)
    q_interior[-1] = -slopes[-1]
    q_interior, clamps = _clamp_kink_masses(q_interior, first_index=1)
    q_at_zero = 1.0 - math.fsum(q_interior.tolist())
    if q_at_zero < -_CLAMP_TOL:
        raise NumericalValidityError(
            f"curve drops below the line 1 - alpha at grid index 1: "
            f"Q(0) = {q_at_zero:.3e}"
        )
    if q_at_zero < 0.0:
        clamps += 1
        q_at_zero = 0.0
    q_full = np.concatenate(([q_at_zero], q_interior, [0.0]))
    return _pair_from_q(grid, q_full, float(h[k]), clamps)


# ---------------------------------------------------------------------------
# Loss distribution operations
# ---------------------------------------------------------------------------


def pld_of(pair: DiscreteDominatingPair) -> FinitePLD:
    """Loss distribution of the pair: mass P(a_i) at eps_i, none at -inf."""
    return FinitePLD(grid=pair.grid, masses=pair.p_masses.copy())


def delta_at(pld: FinitePLD, epsilon: float) -> float:
    """Hockey-stick divergence of the loss distribution at e^epsilon."""
    m = pld.masses
    m_inf = float(m[-1])
    if epsilon == math.inf:
        return m_inf
    if epsilon == -math.inf:
        return float(math.fsum(m[1:].tolist()))
    eps_f = pld.grid.finite_epsilons
    above = eps_f > epsilon
    if not np.any(above):
        return m_inf
    weights = -np.expm1(epsilon - eps_f[above])
    return float(max(m_inf + float(np.dot(m[1:-1][above], weights)), 0.0))


def curve_of(pair: DiscreteDominatingPair) -> PiecewiseLinearCurve:
    """Trade-off curve of the pair: piecewise linear with kinks on the grid.

    The curve is constant at P(+inf) from a_{k-1} on (including at +inf).
    """
    k = pair.grid.k
    a = pair.grid.alphas[:k]
    arr_p = pair.p_masses[1:k]
    arr_q = pair.q_masses[1:k]
    # suffix sums over nodes strictly above node i: arr position m holds node
    # m + 1, so S_i sums positions m >= i, and node k-1 has nothing above
    suffix_p = np.concatenate((np.cumsum(arr_p[::-1])[::-1], [0.0]))
    suffix_q = np.concatenate((np.cumsum(arr_q[::-1])[::-1], [0.0]))
    values = pair.p_masses[-1] + suffix_p - a * suffix_q
    return PiecewiseLinearCurve(a, np.clip(values, 0.0, 1.0))


def epsilon_for_delta(pld: FinitePLD, delta_target: float) -> float:
    """Smallest epsilon with delta_at(pld, epsilon) <= delta_target.

    Returns +inf when the +inf atom already exceeds the target (the floor of
    delta) and -inf when every epsilon meets the target.  The root is located
    by monotone bisection to 1e-9 in epsilon, biased so the returned value
    always satisfies the target.
    """
    if not (0.0 < delta_target <= 1.0):
        raise RequestError(f"delta target must lie in (0, 1], got {delta_target}")
    if pld.mass_at_infinity > delta_target:
        return math.inf
    if delta_at(pld, -math.inf) <= delta_target:
        return -math.inf
    eps_f = pld.grid.finite_epsilons
    hi = float(eps_f[-1])  # delta(hi) == mass at infinity <= target
    lo = float(eps_f[0]) - 1.0
    step = 1.0
    for _ in range(200):
        if delta_at(pld, lo) > delta_target:
            break
        lo -= step
        step *= 2.0
    else:
        # delta plateaus at its supremum within rounding of the target;
        # everything down here already meets it
        return lo
    while hi - lo > _EPS_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if delta_at(pld, mid) <= delta_target:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def pld_to_json_dict(pld: FinitePLD) -> dict:
    """JSON-ready view of a lattice-supported loss distribution.

    Schema: {"discretization": spacing, "epsilon_offset": index of eps = 0 in
    "masses", "masses": finite lattice masses, "mass_at_infinity": atom},
    plus "mass_at_neg_infinity" when an improper distribution carries one.
    """
    spacing = pld.grid.spacing
    if spacing is None:
        raise RequestError("only uniform-lattice distributions serialise")
    offset = -pld.grid.lattice_offset()
    finite = pld.masses[1:-1]
    if not (0 <= offset < finite.size):
        raise RequestError("lattice does not contain epsilon = 0")
    payload = {
        "discretization": float(spacing),
        "epsilon_offset": int(offset),
        "masses": [float(x) for x in finite],
        "mass_at_infinity": float(pld.masses[-1]),
    }
    if pld.masses[0] > 0.0:
        payload["mass_at_neg_infinity"] = float(pld.masses[0])
    return payload


def pld_from_json_dict(payload: dict) -> FinitePLD:
    spacing = float(payload["discretization"])
    offset = int(payload["epsilon_offset"])
    finite = np.asarray(payload["masses"], dtype=float)
    neg = float(payload.get("mass_at_neg_infinity", 0.0))
    grid = DiscretizationGrid.from_epsilons(
        (np.arange(finite.size) - offset) * spacing, spacing=spacing
    )
    masses = np.concatenate(([neg], finite, [float(payload["mass_at_infinity"])]))
    return FinitePLD(grid=grid, masses=masses, proper=(neg == 0.0))


def pld_to_json(pld: FinitePLD) -> str:
    return json.dumps(pld_to_json_dict(pld))


def pld_from_json(text: str) -> FinitePLD:
    return pld_from_json_dict(json.loads(text))
