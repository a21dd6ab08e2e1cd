"""Exact integer-support loss-count distributions.

Binomial construction, mixtures, convolutions, moments, and cdf evaluation.
All distributions store unscaled loss *counts*; monetary severity is applied
downstream by the pricing layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import stats

# Support points with mass below this are dropped from each tail.  Two ulps of
# unity: anything smaller is indistinguishable from the rounding noise of the
# probability arithmetic itself.  The dropped mass per tail stays orders of
# magnitude below the overall truncation budget.
TRUNCATION_EPS = 2.0 * np.finfo(float).eps

# Hard ceiling on total dropped mass a distribution may carry.
TRUNCATION_BUDGET = 1e-12

__all__ = [
    "DiscreteLossDistribution",
    "TRUNCATION_BUDGET",
    "TRUNCATION_EPS",
    "binomial",
    "convolve",
    "mix",
    "mixture",
    "moments",
    "cdf_at",
    "point_mass",
    "pointwise_distance",
]


@dataclass(frozen=True)
class DiscreteLossDistribution:
    """Probability masses on consecutive integer loss counts.

    Attributes:
        min_count: Smallest support point (in loss counts).
        masses: Mass at counts min_count, min_count+1, ... as a read-only
            float array.
        truncated_below: Mass dropped below min_count.
        truncated_above: Mass dropped above the top of the support.
        components: Generative recipe when the distribution is a weighted
            combination of (truncated) binomials: tuple of
            (weight, trials, prob, support_lo, support_hi).  Lets the
            quantile search re-evaluate the cdf in exact arithmetic when a
            confidence level lands on a cdf plateau that double precision
            cannot order.  None when no such recipe exists.
    """

    min_count: int
    masses: np.ndarray
    truncated_below: float = 0.0
    truncated_above: float = 0.0
    components: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.masses, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        if self.min_count < 0:
            raise ValueError(f"min_count must be >= 0, got {self.min_count}")
        if m.ndim != 1 or m.size == 0:
            raise ValueError("masses must be a nonempty 1-D array")
        if np.any(m < 0.0):
            raise ValueError("masses must be nonnegative")
        if self.truncated_below < 0.0 or self.truncated_above < 0.0:
            raise ValueError("truncated mass must be nonnegative")
        total = float(m.sum()) + self.truncated_mass
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"masses + truncated mass sum to {total!r}, not 1")
        if self.truncated_mass > TRUNCATION_BUDGET:
            raise ValueError(
                f"truncated mass {self.truncated_mass:.3e} exceeds budget {TRUNCATION_BUDGET:.0e}"
            )

    @property
    def truncated_mass(self) -> float:
        """Total probability dropped by tail truncation."""
        return self.truncated_below + self.truncated_above

    @property
    def max_count(self) -> int:
        """Largest support point."""
        return self.min_count + len(self.masses) - 1

    @property
    def counts(self) -> np.ndarray:
        """Support points as a float array (for vectorised arithmetic)."""
        return np.arange(self.min_count, self.min_count + len(self.masses), dtype=np.float64)

    @cached_property
    def cdf(self) -> np.ndarray:
        """P[count <= k] for every support point k, anchored below.

        Computed with a compensated (Neumaier) running sum so each prefix is
        correct to the last rounding.  Quantiles of near-degenerate mixtures
        sit on cdf plateaus only ulps wide; a naive cumsum drifts across them.
        """
        out = np.empty(len(self.masses))
        s = self.truncated_below
        c = 0.0
        for i, x in enumerate(self.masses.tolist()):
            t = s + x
            if abs(s) >= abs(x):
                c += (s - t) + x
            else:
                c += (x - t) + s
            s = t
            out[i] = s + c
        return out


def point_mass(count: int) -> DiscreteLossDistribution:
    """Distribution concentrated on a single count."""
    return DiscreteLossDistribution(count, np.array([1.0]))


def binomial(trials: int, prob: float) -> DiscreteLossDistribution:
    """Binomial loss-count distribution with tail truncation.

    For large supports only the region with mass >= TRUNCATION_EPS is stored;
    the dropped tail masses are recorded exactly via the cdf/sf of the
    underlying distribution.

    Args:
        trials: Number of independent exposures (>= 0).
        prob: Per-exposure loss probability in [0, 1].

    Raises:
        ValueError: If prob is outside [0, 1] or trials is negative.
    """
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"prob must lie in [0, 1], got {prob}")
    if trials < 0:
        raise ValueError(f"trials must be >= 0, got {trials}")
    if trials == 0 or prob == 0.0:
        return point_mass(0)
    if prob == 1.0:
        return point_mass(trials)

    dist = stats.binom(trials, prob)
    mean = trials * prob
    sd = max(np.sqrt(trials * prob * (1.0 - prob)), 1.0)
    margin = 12.0 * sd + 40.0
    lo = max(0, int(np.floor(mean - margin)))
    hi = min(trials, int(np.ceil(mean + margin)))
    pmf = dist.pmf(np.arange(lo, hi + 1))
    # Defensive: widen if the threshold region is not fully inside the bracket.
    while lo > 0 and pmf[0] >= TRUNCATION_EPS:
        lo2 = max(0, lo - int(4 * sd + 16))
        pmf = np.concatenate([dist.pmf(np.arange(lo2, lo)), pmf])
        lo = lo2
    while hi < trials and pmf[-1] >= TRUNCATION_EPS:
        hi2 = min(trials, hi + int(4 * sd + 16))
        pmf = np.concatenate([pmf, dist.pmf(np.arange(hi + 1, hi2 + 1))])
        hi = hi2

    keep = np.nonzero(pmf >= TRUNCATION_EPS)[0]
    lo_k = lo + int(keep[0])
    hi_k = lo + int(keep[-1])
    masses = pmf[keep[0] : keep[-1] + 1]
    below = float(dist.cdf(lo_k - 1)) if lo_k > 0 else 0.0
    above = float(dist.sf(hi_k)) if hi_k < trials else 0.0
    recipe = ((1.0, trials, float(prob), lo_k, hi_k),)
    return DiscreteLossDistribution(lo_k, masses, below, above, components=recipe)


def mixture(
    dists: list[DiscreteLossDistribution] | tuple[DiscreteLossDistribution, ...],
    weights: list[float] | tuple[float, ...] | np.ndarray,
) -> DiscreteLossDistribution:
    """Pointwise weighted combination over the union of supports.

    Components are accumulated in the order given, so the result is
    deterministic regardless of how the components were produced.
    """
    if len(dists) != len(weights):
        raise ValueError("one weight per distribution required")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    lo = min(d.min_count for d in dists)
    hi = max(d.max_count for d in dists)
    masses = np.zeros(hi - lo + 1)
    below = above = 0.0
    recipe: list[tuple] | None = []
    for d, wi in zip(dists, w):
        if wi == 0.0:
            continue
        start = d.min_count - lo
        masses[start : start + len(d.masses)] += wi * d.masses
        below += wi * d.truncated_below
        above += wi * d.truncated_above
        if recipe is not None and d.components is not None:
            recipe.extend((wi * cw, t, p, s_lo, s_hi) for cw, t, p, s_lo, s_hi in d.components)
        else:
            recipe = None
    components = tuple(recipe) if recipe else None
    return DiscreteLossDistribution(lo, masses, below, above, components=components)


def mix(
    d1: DiscreteLossDistribution,
    d2: DiscreteLossDistribution,
    weight: float,
) -> DiscreteLossDistribution:
    """Two-component mixture weight*d1 + (1-weight)*d2.

    Weights of exactly 0 or 1 return the surviving operand unchanged, with no
    renormalisation churn.

    Raises:
        ValueError: If weight is outside [0, 1].
    """
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {weight}")
    if weight == 0.0:
        return d2
    if weight == 1.0:
        return d1
    return mixture([d1, d2], [weight, 1.0 - weight])


def convolve(
    d1: DiscreteLossDistribution,
    d2: DiscreteLossDistribution,
) -> DiscreteLossDistribution:
    """Distribution of the sum of independent draws from d1 and d2.

    Direct convolution over the (possibly truncated) supports; exact up to the
    inputs' truncation.
    """
    masses = np.convolve(d1.masses, d2.masses)
    below = d1.truncated_below + d2.truncated_below
    above = d1.truncated_above + d2.truncated_above
    return DiscreteLossDistribution(d1.min_count + d2.min_count, masses, below, above)


def moments(d: DiscreteLossDistribution) -> tuple[float, float]:
    """Mean and variance of the stored pmf, in counts and counts^2.

    The truncated tails contribute at most truncated_mass * range to either
    moment, which is far below every tolerance used here.
    """
    ks = d.counts
    mean = float(ks @ d.masses)
    var = float(((ks - mean) ** 2) @ d.masses)
    return mean, var


def cdf_at(d: DiscreteLossDistribution, k: int) -> float:
    """P[count <= k]; 0 below the support, 1 - truncated_above at the top."""
    if k < d.min_count:
        return 0.0
    if k >= d.max_count:
        return float(d.cdf[-1])
    return float(d.cdf[k - d.min_count])


def _mp_binom_cdf(trials: int, prob, k: int, mp_mod):
    """Exact lower binomial cdf, efficient in either tail.

    Sums the pmf by ratio recurrence from the anchor point k, downward for a
    lower-tail k and as one minus the upward sum otherwise, stopping once
    terms stop mattering at the working precision.
    """
    mpf = mp_mod.mpf
    if k < 0:
        return mpf(0)
    if k >= trials:
        return mpf(1)
    p = mpf(prob)
    lower_tail = k < trials * p
    if lower_tail:
        j = k
        t = mp_mod.binomial(trials, j) * p**j * (1 - p) ** (trials - j)
        s = t
        while j > 0:
            t = t * j * (1 - p) / ((trials - j + 1) * p)
            s += t
            j -= 1
            if t < s * mpf("1e-45"):
                break
        return s
    j = k + 1
    t = mp_mod.binomial(trials, j) * p**j * (1 - p) ** (trials - j)
    s = t
    while j < trials:
        t = t * (trials - j) * p / ((j + 1) * (1 - p))
        s += t
        j += 1
        if t < s * mpf("1e-45"):
            break
    return 1 - s


def exact_cdf_at(d: DiscreteLossDistribution, k: int):
    """cdf_at re-evaluated in exact (extended-precision) arithmetic.

    Reproduces the anchored-cdf semantics of the stored object: each
    component contributes its exact cdf clamped to its stored support, so
    the value matches what cdf_at computes, free of double rounding.  Only
    available when the distribution carries a component recipe.
    """
    if d.components is None:
        raise ValueError("no generative recipe available for exact evaluation")
    from mpmath import mp

    with mp.workdps(40):
        total = mp.mpf(0)
        for weight, trials, prob, s_lo, s_hi in d.components:
            kk = min(max(k, s_lo - 1), s_hi)
            total += mp.mpf(weight) * _mp_binom_cdf(trials, prob, kk, mp)
        return total


def pointwise_distance(
    d1: DiscreteLossDistribution,
    d2: DiscreteLossDistribution,
) -> float:
    """Max absolute pmf difference over the union of supports."""
    lo = min(d1.min_count, d2.min_count)
    hi = max(d1.max_count, d2.max_count)
    a = np.zeros(hi - lo + 1)
    b = np.zeros(hi - lo + 1)
    a[d1.min_count - lo : d1.min_count - lo + len(d1.masses)] = d1.masses
    b[d2.min_count - lo : d2.min_count - lo + len(d2.masses)] = d2.masses
    return float(np.max(np.abs(a - b)))
