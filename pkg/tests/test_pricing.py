"""Capital, risk loadings, premiums, relative risk."""

import numpy as np
import pytest

from riskdiv.distributions import binomial, point_mass
from riskdiv.measures import MeasureKind, RiskMeasureSpec, gaussian_var_approx, normal_quantile
from riskdiv.models import ModelSpec, PortfolioParams, closed_form_mean_per_policy
from riskdiv.montecarlo import SimulationConfig
from riskdiv.pricing import (
    premium,
    premium_netted,
    price_policy,
    relative_risk,
    risk_adjusted_capital,
    risk_loading_per_policy,
)
from riskdiv.tables import fmt_loading

PARAMS = PortfolioParams()
VAR99 = RiskMeasureSpec(MeasureKind.VAR, 0.99)
TVAR99 = RiskMeasureSpec(MeasureKind.TVAR, 0.99)


class TestCapital:
    def test_var_capital(self):
        assert risk_adjusted_capital(binomial(6, 1 / 6), VAR99, 10.0) == pytest.approx(20.0)

    def test_point_mass_capital_is_zero(self):
        assert risk_adjusted_capital(point_mass(4), VAR99, 10.0) == pytest.approx(0.0)

    def test_tvar_capital(self):
        got = risk_adjusted_capital(binomial(6, 1 / 6), TVAR99, 10.0)
        assert got == pytest.approx(21.51, abs=5e-3)

    def test_negative_capital_warns(self):
        # A low confidence level puts the quantile below the mean.
        with pytest.warns(UserWarning):
            value = risk_adjusted_capital(binomial(6, 1 / 6), RiskMeasureSpec(MeasureKind.VAR, 0.2), 10.0)
        assert value < 0.0


class TestRiskLoading:
    def test_iid_single_policy(self):
        est = risk_loading_per_policy(ModelSpec.iid(1 / 6), PARAMS, 1, VAR99)
        assert est.value == pytest.approx(3.000, abs=1e-9)
        assert est.standard_error is None

    def test_common_shock_plateau_cell(self):
        model = ModelSpec.common_shock(1 / 6, 0.5, 0.01)
        est = risk_loading_per_policy(model, PARAMS, 10_000, TVAR99)
        assert fmt_loading(est.value) == "2.970"

    def test_loading_identity(self):
        # loading == eta * capital / N for the same measure, exactly.
        model = ModelSpec.iid(1 / 6)
        for N in (1, 10, 100):
            from riskdiv.models import loss_count_distribution

            est = risk_loading_per_policy(model, PARAMS, N, TVAR99)
            d = loss_count_distribution(model, N, PARAMS.exposures)
            capital = risk_adjusted_capital(d, TVAR99, PARAMS.severity)
            assert est.value == pytest.approx(0.15 * capital / N, rel=1e-12)

    def test_mc_source_attaches_standard_error(self):
        model = ModelSpec.iid(1 / 6)
        cfg = SimulationConfig(num_sims=50_000, seed=11, block_size=25_000)
        est = risk_loading_per_policy(model, PARAMS, 10, VAR99, source=cfg)
        assert est.standard_error is not None and est.standard_error >= 0.0

    def test_bad_source(self):
        with pytest.raises(ValueError):
            risk_loading_per_policy(ModelSpec.iid(0.5), PARAMS, 1, VAR99, source="wrong")

    def test_iid_diversification_monotone(self):
        model = ModelSpec.iid(1 / 6)
        for spec in (VAR99, TVAR99):
            values = [
                risk_loading_per_policy(model, PARAMS, N, spec).value
                for N in (1, 5, 10, 50, 100, 1000, 10_000)
            ]
            assert all(b <= a + 0.005 for a, b in zip(values, values[1:]))
        assert values[-1] < 0.05  # all but vanished at 10^4 policies

    def test_systemic_floor_plateau(self):
        model = ModelSpec.common_shock(1 / 6, 0.5, 0.01)
        at_1k = risk_loading_per_policy(model, PARAMS, 1000, TVAR99).value
        at_10k = risk_loading_per_policy(model, PARAMS, 10_000, TVAR99).value
        assert abs(at_10k - at_1k) / at_1k <= 0.05

    def test_tvar_dominates_var(self):
        for model in (ModelSpec.iid(0.25), ModelSpec.common_shock(1 / 6, 0.5, 0.05)):
            for N in (1, 10, 100):
                v = risk_loading_per_policy(model, PARAMS, N, VAR99).value
                t = risk_loading_per_policy(model, PARAMS, N, TVAR99).value
                assert t >= v - 1e-12


class TestPremiums:
    def test_pure_expectation(self):
        assert premium(PARAMS, 10.0, 0.0) == pytest.approx(10.0)

    def test_with_capital(self):
        assert premium(PARAMS, 10.0, 20.0) == pytest.approx(13.0)

    def test_with_expenses(self):
        params = PortfolioParams(expense_ratio=0.05)
        assert premium(params, 10.0, 20.0) == pytest.approx(13.5)

    def test_netted_reduces_without_capital_cost(self):
        params = PortfolioParams(capital_cost=0.0, expense_ratio=0.07)
        assert premium_netted(params, 10.0, 25.0) == pytest.approx(1.07 * 10.0)

    def test_netted_reference_value(self):
        assert premium_netted(PARAMS, 10.0, 30.0) == pytest.approx(11.304, abs=5e-4)

    def test_netted_degenerate_measure(self):
        # With rho = E[L] the capital need is exactly -P, so the premium
        # solves P = E + eta*(-P), i.e. P = E / (1 + eta).
        assert premium_netted(PARAMS, 10.0, 10.0) == pytest.approx(10.0 / 1.15)


class TestRelativeRisk:
    def test_single_policy_share(self):
        assert relative_risk(3.0, 10.0) == pytest.approx(0.30)

    def test_zero_loading(self):
        assert relative_risk(0.0, 12.0) == 0.0

    def test_zero_expectation_rejected(self):
        with pytest.raises(ValueError):
            relative_risk(1.0, 0.0)

    def test_gaussian_scaling_in_loss_probability(self):
        # Under the normal approximation the relative risk is proportional
        # to sqrt((1-p)/p): exactly, and close to 1/sqrt(p) between the two
        # smaller probabilities.
        N = 10_000
        rel = {}
        for p in (1 / 6, 0.25, 0.5):
            counts = gaussian_var_approx(N, 6, p, 0.99)
            loading = 0.15 * (10 * counts / N - 10 * 6 * p)
            rel[p] = relative_risk(loading, 10 * 6 * p)
        for p in rel:
            assert rel[p] * np.sqrt(p / (1 - p)) == pytest.approx(
                0.15 * normal_quantile(0.99) / np.sqrt(N * 6), rel=1e-9
            )
        ratio = rel[1 / 6] / rel[0.25]
        assert ratio == pytest.approx(np.sqrt(5.0 / 3.0), rel=1e-9)
        assert abs(ratio / np.sqrt((1 / 4) / (1 / 6)) - 1) <= 0.10


class TestPricePolicy:
    def test_assembled_result(self):
        result = price_policy(ModelSpec.iid(1 / 6), PARAMS, 1, VAR99)
        assert result.expected_loss_per_policy == pytest.approx(10.0)
        assert result.capital == pytest.approx(20.0)
        assert result.risk_loading_per_policy == pytest.approx(3.0)
        assert result.premium == pytest.approx(13.0)
        assert result.premium_netted == pytest.approx(11.304, abs=5e-4)
        assert result.relative_risk == pytest.approx(0.30)
