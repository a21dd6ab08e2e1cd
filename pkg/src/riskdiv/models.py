"""The three generative portfolio models and their closed-form moments.

Loss counts for a portfolio of N policies, each exposed n times:

* iid: every exposure loses independently with probability p.
* common shock: one global state draw puts *all* N*n exposures in a crisis
  (loss probability q) with probability p_tilde, else the normal state.
* per-exposure shock: each of the n exposure rounds draws its own state,
  applying to the whole portfolio for that round.

Both shock models carry an N-independent variance term: the part of the risk
that diversification cannot remove.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from enum import Enum

from .distributions import DiscreteLossDistribution, binomial, convolve, mixture

__all__ = [
    "ModelKind",
    "ModelSpec",
    "PortfolioParams",
    "SupportLimitError",
    "DEFAULT_MAX_SUPPORT",
    "loss_count_distribution",
    "closed_form_mean_per_policy",
    "closed_form_variance_per_policy",
    "nondiversifiable_floor",
]

DEFAULT_MAX_SUPPORT = 10_000_000
_MAX_SUPPORT_ENV = "RISKDIV_MAX_SUPPORT"


class SupportLimitError(ValueError):
    """Requested portfolio needs a larger support than the configured limit."""


class ModelKind(str, Enum):
    IID = "iid"
    COMMON_SHOCK = "common-shock"
    PER_EXPOSURE_SHOCK = "per-exposure-shock"


@dataclass(frozen=True)
class ModelSpec:
    """Which generative model, and its probabilities.

    loss_prob is the normal-state per-exposure loss probability; the shock
    models add a crisis state entered with probability crisis_prob in which
    exposures lose with probability crisis_loss_prob instead.
    """

    kind: ModelKind
    loss_prob: float
    crisis_loss_prob: float = 0.0
    crisis_prob: float = 0.0

    def __post_init__(self):
        for name in ("loss_prob", "crisis_loss_prob", "crisis_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.kind is not ModelKind.IID:
            if self.crisis_loss_prob <= self.loss_prob:
                warnings.warn(
                    "crisis_loss_prob <= loss_prob: the crisis state does not "
                    "increase losses; results remain valid",
                    stacklevel=3,
                )
            if self.crisis_prob > 0.5:
                warnings.warn(
                    "crisis_prob > 0.5: crises are the majority state",
                    stacklevel=3,
                )

    @classmethod
    def iid(cls, p: float) -> "ModelSpec":
        return cls(ModelKind.IID, p)

    @classmethod
    def common_shock(cls, p: float, q: float, p_tilde: float) -> "ModelSpec":
        return cls(ModelKind.COMMON_SHOCK, p, q, p_tilde)

    @classmethod
    def per_exposure_shock(cls, p: float, q: float, p_tilde: float) -> "ModelSpec":
        return cls(ModelKind.PER_EXPOSURE_SHOCK, p, q, p_tilde)


@dataclass(frozen=True)
class PortfolioParams:
    """Portfolio shape and economics.

    Attributes:
        num_policies: N, number of policies in the portfolio.
        exposures: n, times each policy is exposed to the risk.
        severity: unit loss amount per occurrence (currency).
        capital_cost: cost-of-capital rate charged on held capital.
        expense_ratio: expenses as a fraction of expected loss.
        alpha: confidence level of the risk measure.
    """

    num_policies: int = 1
    exposures: int = 6
    severity: float = 10.0
    capital_cost: float = 0.15
    expense_ratio: float = 0.0
    alpha: float = 0.99

    def __post_init__(self):
        if self.num_policies < 1 or self.exposures < 1:
            raise ValueError("num_policies and exposures must be >= 1")
        if self.severity <= 0.0:
            raise ValueError("severity must be positive")
        if self.capital_cost < 0.0 or self.expense_ratio < 0.0:
            raise ValueError("capital_cost and expense_ratio must be >= 0")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")


def _max_support(override: int | None) -> int:
    if override is not None:
        return override
    env = os.environ.get(_MAX_SUPPORT_ENV)
    return int(env) if env else DEFAULT_MAX_SUPPORT


def loss_count_distribution(
    model: ModelSpec,
    N: int,
    n: int,
    max_support: int | None = None,
) -> DiscreteLossDistribution:
    """Exact distribution of the portfolio loss count.

    iid: Binomial(N*n, p).  Common shock: the two-state mixture of
    Binomial(N*n, q) and Binomial(N*n, p).  Per-exposure shock: for each
    number j of crisis rounds, the convolution Binomial(N*j, q) +
    Binomial(N*(n-j), p), mixed with binomial weights in j.  The mixture is
    accumulated in increasing j so results do not depend on scheduling.

    Raises:
        SupportLimitError: If N*n exceeds the support limit (default 1e7,
            override with the RISKDIV_MAX_SUPPORT environment variable).
    """
    limit = _max_support(max_support)
    if N * n > limit:
        raise SupportLimitError(
            f"support of {N * n} counts (N={N}, n={n}) exceeds the limit {limit}"
        )
    p, q, pt = model.loss_prob, model.crisis_loss_prob, model.crisis_prob
    if model.kind is ModelKind.IID:
        return binomial(N * n, p)
    if model.kind is ModelKind.COMMON_SHOCK:
        if pt == 0.0:
            return binomial(N * n, p)
        if pt == 1.0:
            return binomial(N * n, q)
        return mixture(
            [binomial(N * n, q), binomial(N * n, p)],
            [pt, 1.0 - pt],
        )
    # Per-exposure shock.
    terms: list[DiscreteLossDistribution] = []
    weights: list[float] = []
    for j in range(n + 1):
        w = math.comb(n, j) * pt**j * (1.0 - pt) ** (n - j)
        if w == 0.0:
            continue
        if j == 0:
            terms.append(binomial(N * n, p))
        elif j == n:
            terms.append(binomial(N * n, q))
        else:
            terms.append(convolve(binomial(N * j, q), binomial(N * (n - j), p)))
        weights.append(w)
    if len(terms) == 1:
        return terms[0]
    return mixture(terms, weights)


def closed_form_mean_per_policy(model: ModelSpec, params: PortfolioParams) -> float:
    """Expected loss per policy, in currency.

    Both shock models share l*n*(p_tilde*q + (1-p_tilde)*p); the iid model is
    the p_tilde = 0 special case.
    """
    n, l = params.exposures, params.severity
    if model.kind is ModelKind.IID:
        return l * n * model.loss_prob
    p, q, pt = model.loss_prob, model.crisis_loss_prob, model.crisis_prob
    return l * n * (pt * q + (1.0 - pt) * p)


def closed_form_variance_per_policy(
    model: ModelSpec,
    params: PortfolioParams,
    N: int,
) -> float:
    """Variance of the per-policy loss, in currency squared.

    The first term diversifies away as 1/N; the shock models add an
    N-independent term (see nondiversifiable_floor).
    """
    n, l = params.exposures, params.severity
    p = model.loss_prob
    if model.kind is ModelKind.IID:
        return l * l * n * p * (1.0 - p) / N
    q, pt = model.crisis_loss_prob, model.crisis_prob
    diversifiable = l * l * n * (q * (1.0 - q) * pt + p * (1.0 - p) * (1.0 - pt)) / N
    return diversifiable + nondiversifiable_floor(model, params)


def nondiversifiable_floor(model: ModelSpec, params: PortfolioParams) -> float:
    """The N-independent part of the per-policy variance; 0 for iid.

    Equals l^2 n^2 (q-p)^2 pt(1-pt) under the common shock and l^2 n (q-p)^2
    pt(1-pt) under the per-exposure shock: one global state multiplies the
    systemic term by n relative to n independent round states.
    """
    if model.kind is ModelKind.IID:
        return 0.0
    n, l = params.exposures, params.severity
    p, q, pt = model.loss_prob, model.crisis_loss_prob, model.crisis_prob
    base = l * l * n * (q - p) ** 2 * pt * (1.0 - pt)
    if model.kind is ModelKind.COMMON_SHOCK:
        return base * n
    return base
