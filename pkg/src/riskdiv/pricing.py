"""Economic layer: risk-adjusted capital, risk loadings, premiums.

Capital is the excess of the risk measure over the expected loss; the risk
loading per policy is the cost-of-capital rate times the capital per policy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .distributions import DiscreteLossDistribution, moments
from .measures import RiskMeasureSpec, apply_measure
from .models import ModelSpec, PortfolioParams, closed_form_mean_per_policy, loss_count_distribution
from .montecarlo import LoadingEstimate, SimulationConfig, mc_loading

__all__ = [
    "PricingResult",
    "risk_adjusted_capital",
    "risk_loading_per_policy",
    "premium",
    "premium_netted",
    "relative_risk",
    "price_policy",
]


@dataclass(frozen=True)
class PricingResult:
    """Per-policy pricing summary.

    capital is the portfolio-level risk-adjusted capital K_N; the loading is
    capital_cost * capital / N by construction.
    """

    expected_loss_per_policy: float
    capital: float
    risk_loading_per_policy: float
    premium: float
    premium_netted: float
    relative_risk: float


def risk_adjusted_capital(
    d: DiscreteLossDistribution,
    measure: RiskMeasureSpec,
    severity: float,
) -> float:
    """Capital backing the loss: severity * (measure - mean), in currency.

    Negative capital (possible when alpha sits below the cdf at the mean) is
    passed through with a warning rather than raised: the arithmetic stays
    valid, the economics are degenerate.
    """
    rho = apply_measure(d, measure)
    mean, _ = moments(d)
    capital = severity * (rho - mean)
    if capital < 0.0:
        warnings.warn(
            f"risk measure {rho:.6g} below the mean {mean:.6g}: negative capital",
            stacklevel=2,
        )
    return capital


def risk_loading_per_policy(
    model: ModelSpec,
    params: PortfolioParams,
    N: int,
    measure: RiskMeasureSpec,
    source: str | SimulationConfig = "exact",
    workers: int = 1,
) -> LoadingEstimate:
    """Risk loading per policy: capital_cost * (severity*rho(S)/N - E[L per policy]).

    Args:
        source: "exact" evaluates the measure on the exact count
            distribution; a SimulationConfig estimates it by Monte Carlo and
            attaches a bootstrap standard error.
    """
    if isinstance(source, SimulationConfig):
        return mc_loading(model, params, N, measure, source, workers=workers)
    if source != "exact":
        raise ValueError(f"source must be 'exact' or a SimulationConfig, got {source!r}")
    d = loss_count_distribution(model, N, params.exposures)
    rho = apply_measure(d, measure)
    expected = closed_form_mean_per_policy(model, params)
    value = params.capital_cost * (params.severity * rho / N - expected)
    return LoadingEstimate(value, None)


def premium(params: PortfolioParams, expected_loss: float, capital: float) -> float:
    """Technical premium: (1 + expense_ratio) * expected loss + cost of capital.

    Per-policy premiums take the per-policy capital K_N / N.
    """
    return (1.0 + params.expense_ratio) * expected_loss + params.capital_cost * capital


def premium_netted(params: PortfolioParams, expected_loss: float, rho_value: float) -> float:
    """Premium when collected premiums themselves offset the capital need.

    Equals (1+a-eta)/(1+eta) * E[L] + eta/(1+eta) * rho(L); with eta = 0 it
    reduces to the expense-loaded expectation.
    """
    eta, a = params.capital_cost, params.expense_ratio
    if eta <= -1.0:
        raise ValueError("capital_cost must exceed -1")
    return (1.0 + a - eta) / (1.0 + eta) * expected_loss + eta / (1.0 + eta) * rho_value


def relative_risk(loading: float, expected_loss_per_policy: float) -> float:
    """Loading as a fraction of the expected loss per policy.

    Raises:
        ValueError: If the expected loss is not positive.
    """
    if expected_loss_per_policy <= 0.0:
        raise ValueError("expected loss per policy must be positive")
    return loading / expected_loss_per_policy


def price_policy(
    model: ModelSpec,
    params: PortfolioParams,
    N: int,
    measure: RiskMeasureSpec,
    source: str | SimulationConfig = "exact",
    workers: int = 1,
) -> PricingResult:
    """Assemble the full per-policy pricing picture for one portfolio size."""
    loading = risk_loading_per_policy(model, params, N, measure, source, workers)
    expected = closed_form_mean_per_policy(model, params)
    capital = loading.value / params.capital_cost * N if params.capital_cost else 0.0
    rho_per_policy = loading.value / params.capital_cost + expected if params.capital_cost else expected
    return PricingResult(
        expected_loss_per_policy=expected,
        capital=capital,
        risk_loading_per_policy=loading.value,
        premium=premium(params, expected, capital / N),
        premium_netted=premium_netted(params, expected, rho_per_policy),
        relative_risk=relative_risk(loading.value, expected),
    )
