"""Exact trade-off curves of the mechanisms supported by the accountant.

For a pair of distributions (A, B) the curve is

    h(alpha) = sup_S [A(S) - alpha * B(S)]_+ ,   alpha in [0, +inf],

which is convex, non-increasing, satisfies h(0) = 1 and h(alpha) >= [1-alpha]_+.
Its one-sided derivatives are

    h'_+(alpha) = -B({o : A(o)/B(o) >  alpha}),
    h'_-(alpha) = -B({o : A(o)/B(o) >= alpha}),

so -1 <= h'_+(0) and both derivatives are non-decreasing in alpha.

Numerical conventions
---------------------
Every curve exposes, in addition to ``value``, a ``gap`` evaluation

    gap(alpha) = h(alpha) - (1 - alpha),

computed in a cancellation-free form.  Near alpha = 0 the curve hugs the
line 1 - alpha and the float representation of h loses the curvature
information below one ulp of 1; downstream mass computations difference
*slopes* of h, so they consume gap() (small alpha) or value() (large alpha)
to keep full precision in both regimes.

All evaluation methods are vectorised over numpy arrays and accept
alpha = 0 and alpha = +inf where mathematically meaningful.

Closed forms
------------
Gaussian with noise scale sigma (sensitivity 1, shift s = 1/sigma after
rescaling to unit variance), with Phi the standard normal CDF and
t = ln(alpha)/s:

    h(alpha)  = Phi(s/2 - t) - alpha * Phi(-s/2 - t)
    h'(alpha) = -Phi(-s/2 - t)

Laplace with scale b (sensitivity 1):

    h(alpha) = 1 - alpha                    for alpha <= e^(-1/b)
             = 1 - sqrt(alpha) e^(-1/(2b))  for e^(-1/b) <= alpha <= e^(1/b)
             = 0                            for alpha >= e^(1/b)

Binary randomized response with parameter eps:

    h(alpha) = 1 - alpha                        for alpha <= e^(-eps)
             = (e^eps - alpha) / (e^eps + 1)    for e^(-eps) < alpha < e^eps
             = 0                                for alpha >= e^eps

Poisson subsampling with probability q of an inner mechanism whose pair
(A, B) has a symmetric curve h_in (true for all inner mechanisms shipped
here) uses the mixture pairs C = (1-q) A + q B:

    remove direction, pair (C, A):
        h(alpha) = 1 - alpha                       for alpha <= 1 - q
                 = q * h_in((alpha - 1 + q) / q)   otherwise
    add direction, pair (A, C), with w = 1 - alpha (1 - q):
        h(alpha) = w * h_in(alpha q / w)           for alpha < 1 / (1 - q)
                 = 0                               otherwise

and the direction ``both`` is the pointwise maximum of the two (a maximum
of convex curves, hence still a valid curve).

All of the closed forms above are validated against a direct quadrature /
enumeration oracle in the test suite before anything downstream trusts
them.
"""

from __future__ import annotations

import abc
import dataclasses
import math

import numpy as np
from scipy.special import ndtr

from .errors import RequestError

__all__ = [
    "MechanismSpec",
    "HockeyStickCurve",
    "GaussianCurve",
    "LaplaceCurve",
    "RandomizedResponseCurve",
    "PoissonSubsampledCurve",
    "PointwiseMaxCurve",
    "PiecewiseLinearCurve",
    "identical_pair_curve",
    "curve_for",
    "derivative_at",
]


def _prepare(alpha) -> tuple[np.ndarray, bool]:
    arr = np.asarray(alpha, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise RequestError(f"alpha must lie in [0, +inf], got {alpha!r}")
    return np.atleast_1d(arr), arr.ndim == 0


def _finish(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


class HockeyStickCurve(abc.ABC):
    """Evaluable trade-off curve h(alpha) with one-sided derivatives."""

    #: True when D_alpha(A||B) == D_alpha(B||A) for the underlying pair.
    symmetric_pair: bool = False

    @property
    @abc.abstractmethod
    def value_at_infinity(self) -> float:
        """h(+inf), the probability mass A places where B has none."""

    @abc.abstractmethod
    def value(self, alpha):
        """h(alpha) for alpha in [0, +inf]."""

    @abc.abstractmethod
    def right_derivative(self, alpha):
        """h'_+(alpha) for alpha in [0, +inf)."""

    @abc.abstractmethod
    def left_derivative(self, alpha):
        """h'_-(alpha) for alpha in (0, +inf)."""

    def gap(self, alpha):
        """h(alpha) - (1 - alpha), non-negative and non-decreasing.

        Subclasses override this with a cancellation-free form; the default
        subtracts the affine part from ``value`` and is accurate only to one
        ulp of the curve value.
        """
        a, scalar = _prepare(alpha)
        g = np.asarray(self.value(a), dtype=float) - (1.0 - a)
        return _finish(np.maximum(g, 0.0), scalar)


class IdenticalPairCurve(HockeyStickCurve):
    """Curve of a pair with A = B, h(alpha) = [1 - alpha]_+."""

    symmetric_pair = True

    @property
    def value_at_infinity(self) -> float:
        return 0.0

    def value(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(np.maximum(1.0 - a, 0.0), scalar)

    def gap(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(np.maximum(a - 1.0, 0.0), scalar)

    def right_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(np.where(a < 1.0, -1.0, 0.0), scalar)

    def left_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(np.where(a <= 1.0, -1.0, 0.0), scalar)


def identical_pair_curve() -> HockeyStickCurve:
    """Degenerate curve of two identical distributions (test double)."""
    return IdenticalPairCurve()


class GaussianCurve(HockeyStickCurve):
    """Curve of (N(1, sigma^2), N(0, sigma^2)), unit sensitivity."""

    symmetric_pair = True

    def __init__(self, noise_scale: float):
        if not (noise_scale > 0.0 and math.isfinite(noise_scale)):
            raise RequestError(f"noise_scale must be positive, got {noise_scale}")
        self.noise_scale = float(noise_scale)
        self._s = 1.0 / self.noise_scale

    @property
    def value_at_infinity(self) -> float:
        return 0.0

    def _log_ratio_arg(self, a: np.ndarray) -> np.ndarray:
        # t = ln(alpha)/s; the likelihood-ratio threshold in standardised x.
        with np.errstate(divide="ignore"):
            return np.log(a) / self._s

    def value(self, alpha):
        a, scalar = _prepare(alpha)
        s = self._s
        t = self._log_ratio_arg(a)
        out = np.empty_like(a)
        low = a <= 1.0
        out[low] = (1.0 - a[low]) + self._gap_low(a[low], t[low])
        hi = ~low
        with np.errstate(invalid="ignore"):
            out[hi] = ndtr(0.5 * s - t[hi]) - a[hi] * ndtr(-0.5 * s - t[hi])
        out[np.isinf(a)] = 0.0
        np.clip(out, 0.0, 1.0, out=out)
        return _finish(out, scalar)

    def _gap_low(self, a: np.ndarray, t: np.ndarray) -> np.ndarray:
        # alpha * Phi(t + s/2) - Phi(t - s/2); both terms are left tails for
        # alpha <= 1, so the gap keeps full relative precision as it -> 0.
        s = self._s
        g = a * ndtr(t + 0.5 * s) - ndtr(t - 0.5 * s)
        return np.maximum(g, 0.0)

    def gap(self, alpha):
        a, scalar = _prepare(alpha)
        t = self._log_ratio_arg(a)
        out = np.empty_like(a)
        low = a <= 1.0
        out[low] = self._gap_low(a[low], t[low])
        hi = ~low
        out[hi] = np.asarray(self.value(a[hi])) + (a[hi] - 1.0)
        return _finish(out, scalar)

    def right_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        t = self._log_ratio_arg(a)
        return _finish(-ndtr(-0.5 * self._s - t), scalar)

    left_derivative = right_derivative


class LaplaceCurve(HockeyStickCurve):
    """Curve of (Lap(1, b), Lap(0, b)), unit sensitivity."""

    symmetric_pair = True

    def __init__(self, noise_scale: float):
        if not (noise_scale > 0.0 and math.isfinite(noise_scale)):
            raise RequestError(f"noise_scale must be positive, got {noise_scale}")
        self.noise_scale = float(noise_scale)
        self._inv_b = 1.0 / self.noise_scale
        self._alpha_lo = math.exp(-self._inv_b)
        self._alpha_hi = math.exp(self._inv_b)

    @property
    def value_at_infinity(self) -> float:
        return 0.0

    def value(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.empty_like(a)
        lo = a <= self._alpha_lo
        hi = a >= self._alpha_hi
        mid = ~(lo | hi)
        out[lo] = 1.0 - a[lo]
        out[hi] = 0.0
        # 1 - sqrt(alpha) e^{-1/(2b)} = -expm1(ln(alpha)/2 - 1/(2b)), exact to
        # full relative precision as the curve approaches its root.
        out[mid] = -np.expm1(0.5 * np.log(a[mid]) - 0.5 * self._inv_b)
        return _finish(np.clip(out, 0.0, 1.0), scalar)

    def gap(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.empty_like(a)
        lo = a <= self._alpha_lo
        hi = a >= self._alpha_hi
        mid = ~(lo | hi)
        out[lo] = 0.0
        out[hi] = a[hi] - 1.0
        # alpha - sqrt(alpha) e^{-1/(2b)} = -alpha expm1(-ln(alpha)/2 - 1/(2b)),
        # exactly 0 at the lower kink.
        out[mid] = -a[mid] * np.expm1(-0.5 * np.log(a[mid]) - 0.5 * self._inv_b)
        return _finish(np.maximum(out, 0.0), scalar)

    def right_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.empty_like(a)
        lo = a < self._alpha_lo
        hi = a >= self._alpha_hi
        mid = ~(lo | hi)
        out[lo] = -1.0
        out[hi] = 0.0
        with np.errstate(divide="ignore"):
            out[mid] = -0.5 * np.exp(-0.5 * self._inv_b - 0.5 * np.log(a[mid]))
        return _finish(out, scalar)

    def left_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.empty_like(a)
        lo = a <= self._alpha_lo
        hi = a > self._alpha_hi
        mid = ~(lo | hi)
        out[lo] = -1.0
        out[hi] = 0.0
        out[mid] = -0.5 * np.exp(-0.5 * self._inv_b - 0.5 * np.log(a[mid]))
        return _finish(out, scalar)


class RandomizedResponseCurve(HockeyStickCurve):
    """Curve of binary randomized response with parameter eps."""

    symmetric_pair = True

    def __init__(self, epsilon: float):
        if not (epsilon > 0.0 and math.isfinite(epsilon)):
            raise RequestError(f"rr epsilon must be positive, got {epsilon}")
        self.epsilon = float(epsilon)
        self._alpha_lo = math.exp(-epsilon)
        self._alpha_hi = math.exp(epsilon)
        self._den = self._alpha_hi + 1.0

    @property
    def value_at_infinity(self) -> float:
        return 0.0

    def value(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.empty_like(a)
        lo = a <= self._alpha_lo
        hi = a >= self._alpha_hi
        mid = ~(lo | hi)
        out[lo] = 1.0 - a[lo]
        out[hi] = 0.0
        out[mid] = (self._alpha_hi - a[mid]) / self._den
        return _finish(out, scalar)

    def gap(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.empty_like(a)
        lo = a <= self._alpha_lo
        hi = a >= self._alpha_hi
        mid = ~(lo | hi)
        out[lo] = 0.0
        out[hi] = a[hi] - 1.0
        out[mid] = (a[mid] * self._alpha_hi - 1.0) / self._den
        return _finish(np.maximum(out, 0.0), scalar)

    def right_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.full_like(a, -1.0 / self._den)
        out[a < self._alpha_lo] = -1.0
        out[a >= self._alpha_hi] = 0.0
        return _finish(out, scalar)

    def left_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.full_like(a, -1.0 / self._den)
        out[a <= self._alpha_lo] = -1.0
        out[a > self._alpha_hi] = 0.0
        return _finish(out, scalar)


class PoissonSubsampledCurve(HockeyStickCurve):
    """Mixture-pair curve of a Poisson-subsampled mechanism, one direction.

    ``remove``: pair ((1-q) A + q B, A); the privacy loss is bounded below
    by ln(1-q), so the curve equals 1 - alpha for alpha <= 1 - q.
    ``add``: pair (A, (1-q) A + q B); the loss is bounded above by
    -ln(1-q), so the curve vanishes for alpha >= 1/(1-q).
    """

    def __init__(self, inner: HockeyStickCurve, sampling_prob: float, direction: str):
        if not (0.0 < sampling_prob <= 1.0):
            raise RequestError(f"sampling_prob must be in (0, 1], got {sampling_prob}")
        if direction not in ("add", "remove"):
            raise RequestError(f"direction must be 'add' or 'remove', got {direction!r}")
        if not inner.symmetric_pair:
            raise RequestError(
                "subsampling transform requires an inner mechanism with a "
                "symmetric dominating pair"
            )
        self.inner = inner
        self.sampling_prob = float(sampling_prob)
        self.direction = direction
        self._q = self.sampling_prob
        self._keep = 1.0 - self._q  # probability the differing record is absent
        self._cut = math.inf if self._q == 1.0 else 1.0 / self._keep

    @property
    def value_at_infinity(self) -> float:
        if self.direction == "remove":
            return self._q * self.inner.value_at_infinity
        return self.inner.value_at_infinity if self._q == 1.0 else 0.0

    # -- remove direction helpers ------------------------------------------

    def _beta_remove(self, a: np.ndarray) -> np.ndarray:
        return (a - self._keep) / self._q

    # -- add direction helpers ---------------------------------------------

    def _split_add(self, a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        live = a < self._cut
        w = 1.0 - a[live] * self._keep
        beta = a[live] * self._q / w
        return live, w, beta

    def value(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.empty_like(a)
        if self.direction == "remove":
            lo = a <= self._keep
            out[lo] = 1.0 - a[lo]
            out[~lo] = self._q * np.asarray(self.inner.value(self._beta_remove(a[~lo])))
        else:
            live, w, beta = self._split_add(a)
            out[~live] = 0.0
            out[live] = w * np.asarray(self.inner.value(beta))
        return _finish(np.clip(out, 0.0, 1.0), scalar)

    def gap(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.empty_like(a)
        if self.direction == "remove":
            lo = a <= self._keep
            out[lo] = 0.0
            # q * h_in(beta) - (1 - alpha) == q * gap_in(beta), exactly.
            out[~lo] = self._q * np.asarray(self.inner.gap(self._beta_remove(a[~lo])))
        else:
            live, w, beta = self._split_add(a)
            out[~live] = a[~live] - 1.0
            # w * h_in(beta) - (1 - alpha) == w * gap_in(beta), exactly.
            out[live] = w * np.asarray(self.inner.gap(beta))
        return _finish(np.maximum(out, 0.0), scalar)

    def _derivative(self, a: np.ndarray, side: str) -> np.ndarray:
        inner_dv = (
            self.inner.right_derivative if side == "right" else self.inner.left_derivative
        )
        out = np.empty_like(a)
        if self.direction == "remove":
            if side == "right":
                lo = a < self._keep
            else:
                lo = a <= self._keep
            out[lo] = -1.0
            out[~lo] = np.asarray(inner_dv(self._beta_remove(a[~lo])))
        else:
            live, w, beta = self._split_add(a)
            out[~live] = 0.0
            out[live] = -self._keep * np.asarray(self.inner.value(beta)) + (
                self._q / w
            ) * np.asarray(inner_dv(beta))
        return out

    def right_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(self._derivative(a, "right"), scalar)

    def left_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(self._derivative(a, "left"), scalar)


class PointwiseMaxCurve(HockeyStickCurve):
    """Pointwise maximum of curves (a maximum of convex curves is convex).

    At a crossing point the right derivative is the maximum of the active
    curves' right derivatives and the left derivative is the minimum of the
    active left derivatives.
    """

    _ACTIVE_ATOL = 1e-15
    _ACTIVE_RTOL = 1e-12

    def __init__(self, curves: list[HockeyStickCurve]):
        if len(curves) < 2:
            raise RequestError("PointwiseMaxCurve needs at least two curves")
        self.curves = list(curves)

    @property
    def value_at_infinity(self) -> float:
        return max(c.value_at_infinity for c in self.curves)

    def value(self, alpha):
        a, scalar = _prepare(alpha)
        vals = np.stack([np.asarray(c.value(a)) for c in self.curves])
        return _finish(vals.max(axis=0), scalar)

    def gap(self, alpha):
        a, scalar = _prepare(alpha)
        gaps = np.stack([np.asarray(c.gap(a)) for c in self.curves])
        return _finish(gaps.max(axis=0), scalar)

    def _derivative(self, a: np.ndarray, side: str) -> np.ndarray:
        # activity is decided on curve values: their scale tracks where the
        # envelope still distinguishes the branches (gaps grow like alpha and
        # would drown tail-sized differences)
        vals = np.stack([np.asarray(c.value(a)) for c in self.curves])
        top = vals.max(axis=0)
        tol = self._ACTIVE_ATOL + self._ACTIVE_RTOL * np.abs(top)
        active = vals >= top - tol
        if side == "right":
            derivs = np.stack([np.asarray(c.right_derivative(a)) for c in self.curves])
            derivs = np.where(active, derivs, -np.inf)
            return derivs.max(axis=0)
        derivs = np.stack([np.asarray(c.left_derivative(a)) for c in self.curves])
        derivs = np.where(active, derivs, np.inf)
        return derivs.min(axis=0)

    def right_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(self._derivative(a, "right"), scalar)

    def left_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(self._derivative(a, "left"), scalar)


class PiecewiseLinearCurve(HockeyStickCurve):
    """Piecewise-linear curve through nodes, constant past the last node.

    This is the curve shape realised by any pair whose privacy loss has
    finite support: linear between consecutive support points and constant
    equal to the mass at +inf beyond the last finite one.
    """

    def __init__(self, alphas, values):
        alphas = np.asarray(alphas, dtype=float)
        values = np.asarray(values, dtype=float)
        if alphas.ndim != 1 or alphas.shape != values.shape or alphas.size < 2:
            raise RequestError("need matching 1-D node arrays with >= 2 nodes")
        if alphas[0] != 0.0 or not np.all(np.diff(alphas) > 0) or not np.all(
            np.isfinite(alphas)
        ):
            raise RequestError("nodes must be finite, strictly increasing, starting at 0")
        self.node_alphas = alphas
        self.node_values = values
        self._slopes = np.diff(values) / np.diff(alphas)

    @property
    def value_at_infinity(self) -> float:
        return float(self.node_values[-1])

    def value(self, alpha):
        a, scalar = _prepare(alpha)
        out = np.interp(a, self.node_alphas, self.node_values)
        out = np.where(a >= self.node_alphas[-1], self.node_values[-1], out)
        return _finish(out, scalar)

    def _slope_at(self, a: np.ndarray, side: str) -> np.ndarray:
        idx = np.searchsorted(self.node_alphas, a, side=side) - 1
        idx = np.clip(idx, 0, self._slopes.size - 1)
        out = self._slopes[idx]
        beyond = a >= self.node_alphas[-1] if side == "right" else a > self.node_alphas[-1]
        return np.where(beyond, 0.0, out)

    def right_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(self._slope_at(a, "right"), scalar)

    def left_derivative(self, alpha):
        a, scalar = _prepare(alpha)
        return _finish(self._slope_at(a, "left"), scalar)


# ---------------------------------------------------------------------------
# Mechanism specifications
# ---------------------------------------------------------------------------

_KINDS = ("gaussian", "laplace", "randomized_response", "poisson_subsampled")
_DIRECTIONS = ("add", "remove", "both")


@dataclasses.dataclass(frozen=True)
class MechanismSpec:
    """Parameters of one supported mechanism.

    ``noise_scale`` is the Gaussian standard deviation or the Laplace scale
    (sensitivity is fixed at 1), ``rr_epsilon`` the randomized-response
    parameter, and ``sampling_prob`` / ``inner`` / ``adjacency_direction``
    apply to Poisson-subsampled mechanisms only.  Subsampling cannot be
    nested.
    """

    kind: str
    noise_scale: float | None = None
    rr_epsilon: float | None = None
    sampling_prob: float | None = None
    inner: "MechanismSpec | None" = None
    adjacency_direction: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise RequestError(f"unknown mechanism kind {self.kind!r}")
        if self.kind == "poisson_subsampled":
            if self.inner is None:
                raise RequestError("poisson_subsampled requires an inner mechanism")
            if self.inner.kind == "poisson_subsampled":
                raise RequestError("subsampled mechanisms cannot be nested")
            if self.sampling_prob is None or not (0.0 < self.sampling_prob <= 1.0):
                raise RequestError(
                    f"sampling_prob must be in (0, 1], got {self.sampling_prob}"
                )
            if self.adjacency_direction is None:
                object.__setattr__(self, "adjacency_direction", "both")
            if self.adjacency_direction not in _DIRECTIONS:
                raise RequestError(
                    f"adjacency_direction must be one of {_DIRECTIONS}, "
                    f"got {self.adjacency_direction!r}"
                )
            if self.noise_scale is not None or self.rr_epsilon is not None:
                raise RequestError("noise parameters belong on the inner mechanism")
        else:
            for field in ("sampling_prob", "inner", "adjacency_direction"):
                if getattr(self, field) is not None:
                    raise RequestError(f"{field} applies to subsampled mechanisms only")
            if self.kind in ("gaussian", "laplace"):
                if self.noise_scale is None or self.noise_scale <= 0:
                    raise RequestError(
                        f"noise_scale must be positive, got {self.noise_scale}"
                    )
                if self.rr_epsilon is not None:
                    raise RequestError("rr_epsilon applies to randomized response only")
            else:  # randomized_response
                if self.rr_epsilon is None or self.rr_epsilon <= 0:
                    raise RequestError(
                        f"rr_epsilon must be positive, got {self.rr_epsilon}"
                    )
                if self.noise_scale is not None:
                    raise RequestError("noise_scale does not apply to randomized response")

    # -- convenience constructors ------------------------------------------

    @classmethod
    def gaussian(cls, noise_scale: float) -> "MechanismSpec":
        return cls(kind="gaussian", noise_scale=noise_scale)

    @classmethod
    def laplace(cls, noise_scale: float) -> "MechanismSpec":
        return cls(kind="laplace", noise_scale=noise_scale)

    @classmethod
    def randomized_response(cls, epsilon: float) -> "MechanismSpec":
        return cls(kind="randomized_response", rr_epsilon=epsilon)

    @classmethod
    def poisson_subsampled(
        cls,
        inner: "MechanismSpec",
        sampling_prob: float,
        adjacency_direction: str = "both",
    ) -> "MechanismSpec":
        return cls(
            kind="poisson_subsampled",
            inner=inner,
            sampling_prob=sampling_prob,
            adjacency_direction=adjacency_direction,
        )


def curve_for(spec: MechanismSpec) -> HockeyStickCurve:
    """Exact trade-off curve of the mechanism's dominating pair."""
    if spec.kind == "gaussian":
        return GaussianCurve(spec.noise_scale)
    if spec.kind == "laplace":
        return LaplaceCurve(spec.noise_scale)
    if spec.kind == "randomized_response":
        return RandomizedResponseCurve(spec.rr_epsilon)
    inner = curve_for(spec.inner)
    if spec.adjacency_direction == "both":
        return PointwiseMaxCurve(
            [
                PoissonSubsampledCurve(inner, spec.sampling_prob, "add"),
                PoissonSubsampledCurve(inner, spec.sampling_prob, "remove"),
            ]
        )
    return PoissonSubsampledCurve(inner, spec.sampling_prob, spec.adjacency_direction)


def derivative_at(curve: HockeyStickCurve, alpha: float, side: str) -> float:
    """One-sided derivative of the curve at a finite positive alpha."""
    if side not in ("left", "right"):
        raise RequestError(f"side must be 'left' or 'right', got {side!r}")
    if not (0.0 < alpha < math.inf):
        raise RequestError(f"alpha must lie in (0, +inf), got {alpha}")
    if side == "right":
        return float(curve.right_derivative(alpha))
    return float(curve.left_derivative(alpha))
