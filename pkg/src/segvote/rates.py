"""Large-deviations toolkit for the per-segment vote statistics.

The central quantity is the Cramér rate at zero,

    I(0) = -inf_t log E exp(t X),

for a finite discrete law X. It governs the exponential decay of the
probability that a sum of i.i.d. copies of X with negative mean crosses
zero, i.e. the per-segment misclassification probability. All rates are in
nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, DegenerateSupportError

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DiscreteDist:
    """Finite discrete distribution over distinct real support points."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        s = np.asarray(self.support, dtype=np.float64)
        p = np.asarray(self.probs, dtype=np.float64)
        if s.shape != p.shape or s.ndim != 1 or len(s) == 0:
            raise ConfigError("support and probs must be equal-length 1-D sequences")
        if len(np.unique(s)) != len(s):
            raise ConfigError("support values must be distinct")
        if (p < 0).any():
            raise ConfigError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ConfigError(f"probabilities sum to {p.sum()!r}, not 1")

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))


@dataclass(frozen=True)
class RateResult:
    value: float
    minimizer_t: float
    converged: bool


def cgf(dist: DiscreteDist, t: float) -> float:
    """log E exp(t X), computed with a max-shift for overflow safety."""
    x = np.asarray(dist.support, dtype=np.float64)
    p = np.asarray(dist.probs, dtype=np.float64)
    return float(logsumexp(t * x, b=p))


def _golden_section_min(f, lo: float, hi: float, tol: float) -> tuple[float, bool]:
    """Minimize a convex f on [lo, hi] to absolute tolerance tol on the
    argument. Returns (argmin, converged)."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(400):
        if b - a <= tol:
            return (a + b) / 2.0, True
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2.0, b - a <= tol


def rate_zero(dist: DiscreteDist, tol: float = 1e-12) -> RateResult:
    """Cramér rate at zero: -inf_t cgf(dist, t).

    Requires mass on both strict signs; a one-sided law has its infimum at 0
    or -infinity and is rejected.
    """
    x = np.asarray(dist.support, dtype=np.float64)
    p = np.asarray(dist.probs, dtype=np.float64)
    pos = p[x > 0].sum()
    neg = p[x < 0].sum()
    if pos <= 0 or neg <= 0:
        raise DegenerateSupportError(
            "rate_zero needs P(X > 0) > 0 and P(X < 0) > 0"
        )

    f = lambda t: cgf(dist, t)
    # expand a bracket until the minimum is interior (cgf is convex, with
    # cgf -> +inf on both sides because mass sits on both strict signs)
    half = 1.0
    while f(-half) <= f(0.0) or f(half) <= f(0.0):
        half *= 2.0
        if half > 2.0**60:  # pragma: no cover - unreachable for valid laws
            raise DegenerateSupportError("failed to bracket the CGF minimum")
    t_star, converged = _golden_section_min(f, -half, half, tol)
    value = -f(t_star)
    return RateResult(max(value, 0.0), t_star, converged)


def model_a_segment_vote_dist(rho: float) -> DiscreteDist:
    """Law of the per-coordinate comparison statistic behind a segment vote
    in the sign-flip model: +1 when the coordinate favors the wrong class,
    0 on a tie, -1 when it favors the true class."""
    if not 0.0 < rho < 0.5:
        raise ConfigError(f"rho must lie in (0, 1/2), got {rho}")
    plus = rho * (1.0 - rho)
    minus = 0.5 * (1.0 - 2.0 * rho + 2.0 * rho * rho)
    return DiscreteDist((1.0, 0.0, -1.0), (plus, 0.5, minus))


def model_a_coordinate_dist(rho: float) -> DiscreteDist:
    """Law of the vote a single coordinate casts under the coordinate-by-
    coordinate rule (ties already folded in as fair coins)."""
    if not 0.0 < rho < 0.5:
        raise ConfigError(f"rho must lie in (0, 1/2), got {rho}")
    plus = rho * (1.0 - rho) + 0.25
    minus = 0.5 * (1.0 - 2.0 * rho + 2.0 * rho * rho) + 0.25
    return DiscreteDist((1.0, -1.0), (plus, minus))


def bernoulli_relative_entropy(x: float, p: float) -> float:
    """H(x|p) = x log(x/p) + (1-x) log((1-x)/(1-p)), with 0 log 0 = 0."""
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"x must lie in [0, 1], got {x}")
    if not 0.0 < p < 1.0:
        if (p == 0.0 and x > 0.0) or (p == 1.0 and x < 1.0):
            return float("inf")
        if p in (0.0, 1.0):
            return 0.0
        raise ConfigError(f"p must lie in [0, 1], got {p}")
    total = 0.0
    if x > 0.0:
        total += x * np.log(x / p)
    if x < 1.0:
        total += (1.0 - x) * np.log((1.0 - x) / (1.0 - p))
    return float(total)
