"""Optimistic finite-support estimates of a trade-off curve.

Greedy tangents plus lower convex hull
--------------------------------------
Unlike the pessimistic case there is no least/greatest canonical choice, so
the construction is a heuristic with a correctness guarantee: the output
pair is dominated by the true pair.  The grid must contain alpha = 1; when
it does not, even the identical pair A = B (whose loss distribution is a
point mass at 0) admits no grid-supported under-estimate at all.

For each grid point left of 1 draw the tangent of h at a_i and record its
height at a_{i+1} (a forward candidate); for each point right of 1 record
the tangent's height at a_{i-1} (a backward candidate); anchor 1 at a_0 and
0 at a_{k-1}.  Tangents of a convex curve under-estimate it, so every
candidate sits on or below h, and candidates are bounded below by
[1 - alpha]_+ (forward) and 0 (backward).  The lower convex hull of the
candidates, evaluated at the grid points, with value 0 assigned at +inf, is
convex, non-increasing and at least [1 - alpha]_+, so it is a valid input to
the discretization and its pair is dominated by the true one.

At a kink the forward pass uses the right derivative and the backward pass
the left derivative; any subgradient yields a valid tangent, and this
choice reproduces piecewise-linear curves exactly when their kinks lie on
the grid.

Candidate generation is vectorised (each candidate depends only on its own
grid point, so the evaluation order is free); the hull is a single
monotone-chain sweep.

Numerically everything runs in gap coordinates g = f - (1 - alpha), an
affine shear that preserves hulls and kink masses while keeping full
precision where the curve hugs 1 - alpha.  Interval slopes are read off
hull edges (one float per edge), so kink masses are differences of a
non-decreasing float sequence and the discretization accepts the hull
without any clamping.

Privacy-buckets baseline
------------------------
Rounding the loss mass down to the previous grid point uses the closed
survival function A(ratio >= alpha) = h(alpha) - alpha * h'_-(alpha); mass
below the first finite grid point lands at -inf (where it contributes
nothing to any divergence) and the atom at +inf stays.  The result is
stochastically dominated by the true loss distribution but is not in
general realisable as the loss distribution of any pair, so it is flagged
improper and only ever used for divergence evaluation.

Non-uniqueness fixture
----------------------
``non_uniqueness_fixture`` returns two valid under-estimates of the
randomized-response pair neither of which dominates the other, built from
the observation that an under-estimate may leave the line 1 - alpha early
and land on 0 early, or leave late and land late; the two resulting curves
cross.  The construction is parameterised by (eps, gamma) through the
straddle points e^(-eps) +/- gamma around the curve's lower kink.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .curves import HockeyStickCurve
from .errors import RequestError
from .grid import DiscretizationGrid
from .pessimistic import _survival_from_curve
from .pld import (
    DiscreteDominatingPair,
    FinitePLD,
    _pair_from_q,
    discretize_from_curve,
)

__all__ = [
    "CandidateSet",
    "candidate_set",
    "optimistic_pair",
    "pb_optimistic_pld",
    "non_uniqueness_fixture",
]


@dataclasses.dataclass(frozen=True)
class CandidateSet:
    """Tangent candidate heights before the hull pass.

    ``forward[i]`` is the candidate at a_i for i = 0..i_one and
    ``backward[j]`` the candidate at a_{i_one + j} for j = 0..k-1-i_one,
    so both passes contribute a candidate at a_{i_one} = 1.
    """

    forward: np.ndarray
    backward: np.ndarray
    i_one: int


def _gap_candidates(
    curve: HockeyStickCurve, grid: DiscretizationGrid
) -> tuple[np.ndarray, np.ndarray, int]:
    """Forward/backward candidates in gap coordinates g = f - (1 - alpha)."""
    i_one = grid.index_of_one
    if i_one is None:
        raise RequestError(
            "optimistic construction requires alpha = 1 on the grid: any pair "
            "dominated by an identical pair must carry loss mass at 0"
        )
    k = grid.k
    a = grid.alphas
    # forward: tangent at a_i evaluated at a_{i+1}, for i = 0..i_one-1
    a_src = a[0:i_one]
    g_fwd = np.empty(i_one + 1)
    g_fwd[0] = 0.0
    widths = np.diff(a[0 : i_one + 1])
    g_fwd[1:] = np.asarray(curve.gap(a_src)) + widths * (
        1.0 + np.asarray(curve.right_derivative(a_src))
    )
    # f >= 1 - alpha holds for every forward candidate; restore it in float
    np.maximum(g_fwd, 0.0, out=g_fwd)
    # backward: tangent at a_i evaluated at a_{i-1}, for i = k-1..i_one+1
    a_src = a[i_one + 1 : k]
    g_bwd = np.empty(k - i_one)
    g_bwd[-1] = a[k - 1] - 1.0
    widths = np.diff(a[i_one : k])
    g_bwd[:-1] = np.asarray(curve.gap(a_src)) - widths * (
        1.0 + np.asarray(curve.left_derivative(a_src))
    )
    # f >= 0 holds for every backward candidate (the grid right of 1)
    np.maximum(g_bwd, a[i_one : k] - 1.0, out=g_bwd)
    return g_fwd, g_bwd, i_one


def candidate_set(curve: HockeyStickCurve, grid: DiscretizationGrid) -> CandidateSet:
    """Tangent candidates in curve coordinates (before the hull pass)."""
    g_fwd, g_bwd, i_one = _gap_candidates(curve, grid)
    k = grid.k
    forward = g_fwd + (1.0 - grid.alphas[0 : i_one + 1])
    backward = g_bwd - (grid.alphas[i_one:k] - 1.0)
    return CandidateSet(forward=forward, backward=backward, i_one=i_one)


def _lower_hull_edges(xs: np.ndarray, gs: np.ndarray) -> tuple[list[int], list[float]]:
    """Monotone-chain lower hull over points sorted by x.

    Returns vertex indices and edge slopes; the pop predicate is strict, so
    the returned edge slopes strictly increase as floats.
    """
    stack = [0]
    slopes: list[float] = []
    for idx in range(1, xs.size):
        s_new = (gs[idx] - gs[stack[-1]]) / (xs[idx] - xs[stack[-1]])
        while slopes and s_new <= slopes[-1]:
            stack.pop()
            slopes.pop()
            s_new = (gs[idx] - gs[stack[-1]]) / (xs[idx] - xs[stack[-1]])
        stack.append(idx)
        slopes.append(s_new)
    return stack, slopes


def optimistic_pair(curve: HockeyStickCurve, grid: DiscretizationGrid) -> DiscreteDominatingPair:
    """Grid-supported pair dominated by the curve's pair.

    Requires alpha = 1 on the grid and a curve vanishing at +inf (a positive
    tail cannot be under-estimated by this construction, which pins the tail
    to 0, without breaking monotonicity).
    """
    if curve.value_at_infinity > 0.0:
        raise RequestError(
            "optimistic construction supports curves vanishing at +inf only; "
            f"this curve has tail value {curve.value_at_infinity}"
        )
    g_fwd, g_bwd, i_one = _gap_candidates(curve, grid)
    k = grid.k
    # one candidate per grid point; at alpha = 1 both passes meet, keep the
    # lower one
    gs = np.concatenate((g_fwd[:i_one], [min(g_fwd[i_one], g_bwd[0])], g_bwd[1:]))
    xs = grid.alphas[:k]
    vertices, edge_slopes = _lower_hull_edges(xs, gs)
    # per-interval slopes in gap coordinates: constant along each hull edge,
    # capped at 1 (curve coordinates: non-increasing), hence a non-decreasing
    # float sequence whose differences are the kink masses, all >= 0 exactly
    sigma = np.empty(k - 1)
    for left, right, slope in zip(vertices[:-1], vertices[1:], edge_slopes):
        sigma[left:right] = min(slope, 1.0)
    q_interior = np.empty(k - 1)
    q_interior[:-1] = np.diff(sigma)
    q_interior[-1] = 1.0 - sigma[-1]
    q_full = np.concatenate(([sigma[0]], q_interior, [0.0]))
    return _pair_from_q(grid, q_full, 0.0, clamp_count=0)


def _bin_pair_atoms_down(pair: DiscreteDominatingPair, grid: DiscretizationGrid) -> np.ndarray:
    """Round the pair's loss atoms down to the previous grid epsilon."""
    masses = np.zeros(grid.alphas.size)
    eps_grid = grid.finite_epsilons
    src_eps = pair.grid.finite_epsilons
    src_m = pair.p_masses[1:-1]
    idx = np.searchsorted(eps_grid, src_eps, side="right") - 1
    for j, m in zip(idx, src_m):
        if m == 0.0:
            continue
        if j < 0:
            masses[0] += m
        else:
            masses[1 + j] += m
    masses[-1] += pair.p_masses[-1]
    return masses


def pb_optimistic_pld(
    source: HockeyStickCurve | DiscreteDominatingPair, grid: DiscretizationGrid
) -> FinitePLD:
    """Loss distribution rounded down to the grid (privacy-buckets baseline).

    The output is flagged improper: it is stochastically dominated by the
    true loss distribution but need not be the loss distribution of any
    pair, so it is only ever evaluated through the divergence formula.
    """
    if isinstance(source, DiscreteDominatingPair):
        masses = _bin_pair_atoms_down(source, grid)
    else:
        g = _survival_from_curve(source, grid, side="left")
        tail = source.value_at_infinity
        g = np.concatenate((g, [tail]))
        interval = np.maximum(-np.diff(g), 0.0)
        masses = np.zeros(grid.alphas.size)
        masses[0 : grid.k] = interval  # interval i lands at its left endpoint
        masses[-1] = tail
    return FinitePLD(grid=grid, masses=masses, proper=False)


def non_uniqueness_fixture(
    epsilon: float, gamma: float | None = None
) -> tuple[DiscreteDominatingPair, DiscreteDominatingPair]:
    """Two under-estimates of randomized response, neither dominating.

    With K = e^(-eps) and E = e^eps, any valid under-estimate agrees with
    1 - alpha up to K (the curve is pinned between its floor and the
    randomized-response curve there), so the freedom lies in where the
    estimate leaves that line and where it lands on 0.  The first pair
    leaves early, at K + gamma/2, and lands at (1 + E)/2; the second leaves
    late, at (K + gamma + 1)/2, and lands at E.  The first is strictly
    higher just past its departure point (in particular at K + gamma), the
    second strictly higher past the first one's landing point, so the two
    curves cross and the pairs are incomparable under domination.
    """
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise RequestError(f"epsilon must be positive, got {epsilon}")
    k_lo = math.exp(-epsilon)
    k_hi = math.exp(epsilon)
    limit = min(k_hi - k_lo, k_lo)
    if gamma is None:
        gamma = 0.1 * limit
    if not (0.0 < gamma < limit):
        raise RequestError(
            f"gamma must lie in (0, {limit}) for straddle points "
            f"e^(-eps) +/- gamma to stay admissible, got {gamma}"
        )
    straddle_hi = k_lo + gamma
    if straddle_hi >= 1.0:
        raise RequestError(
            f"gamma = {gamma} pushes the upper straddle point past alpha = 1; "
            "the two-sided construction needs e^(-eps) + gamma < 1"
        )
    depart_early = k_lo + 0.5 * gamma
    land_early = 0.5 * (1.0 + k_hi)
    depart_late = 0.5 * (straddle_hi + 1.0)
    grid_early = DiscretizationGrid.from_alphas([0.0, depart_early, land_early, math.inf])
    grid_late = DiscretizationGrid.from_alphas([0.0, depart_late, k_hi, math.inf])
    pair_early = discretize_from_curve(
        [1.0, 1.0 - depart_early, 0.0, 0.0], grid_early
    )
    pair_late = discretize_from_curve([1.0, 1.0 - depart_late, 0.0, 0.0], grid_late)
    return pair_early, pair_late
