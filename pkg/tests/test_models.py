"""Generative models: exact distributions, closed-form moments, reductions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskdiv.distributions import binomial, moments, pointwise_distance
from riskdiv.measures import value_at_risk
from riskdiv.models import (
    ModelKind,
    ModelSpec,
    PortfolioParams,
    SupportLimitError,
    closed_form_mean_per_policy,
    closed_form_variance_per_policy,
    loss_count_distribution,
    nondiversifiable_floor,
)

PARAMS = PortfolioParams()  # n=6, severity 10, eta 15%, alpha 99%


def shock_models(p=1 / 6, q=0.5, pt=0.01):
    return (
        ModelSpec.common_shock(p, q, pt),
        ModelSpec.per_exposure_shock(p, q, pt),
    )


class TestLossCountDistribution:
    def test_iid_single_policy(self):
        d = loss_count_distribution(ModelSpec.iid(1 / 6), 1, 6)
        assert pointwise_distance(d, binomial(6, 1 / 6)) == 0.0

    def test_common_shock_reference_cell(self):
        # Mixture at N=1: VaR count 3 and loading 2.997.
        model = ModelSpec.common_shock(1 / 6, 0.5, 0.001)
        d = loss_count_distribution(model, 1, 6)
        assert value_at_risk(d, 0.99) == 3
        loading = 0.15 * (10 * 3 - closed_form_mean_per_policy(model, PARAMS))
        assert loading == pytest.approx(2.997, abs=5e-4)

    def test_per_exposure_no_crisis_reduces_to_iid(self):
        model = ModelSpec.per_exposure_shock(1 / 6, 0.5, 0.0)
        for N in (1, 10, 200):
            d = loss_count_distribution(model, N, 6)
            assert pointwise_distance(d, binomial(6 * N, 1 / 6)) <= 1e-14

    def test_common_shock_no_crisis_reduces_to_iid(self):
        model = ModelSpec.common_shock(1 / 6, 0.5, 0.0)
        d = loss_count_distribution(model, 50, 6)
        assert pointwise_distance(d, binomial(300, 1 / 6)) <= 1e-14

    def test_equal_probabilities_collapse_both_models(self):
        with pytest.warns(UserWarning):
            models = shock_models(p=0.2, q=0.2, pt=0.05)
        for model in models:
            d = loss_count_distribution(model, 20, 6)
            assert pointwise_distance(d, binomial(120, 0.2)) <= 1e-14

    def test_certain_crisis(self):
        with pytest.warns(UserWarning):
            model = ModelSpec.common_shock(1 / 6, 0.5, 1.0)
        d = loss_count_distribution(model, 10, 6)
        assert pointwise_distance(d, binomial(60, 0.5)) == 0.0

    def test_support_guard(self):
        with pytest.raises(SupportLimitError):
            loss_count_distribution(ModelSpec.iid(0.5), 10_000_000, 6)

    def test_support_guard_env_override(self, monkeypatch):
        monkeypatch.setenv("RISKDIV_MAX_SUPPORT", "100")
        with pytest.raises(SupportLimitError):
            loss_count_distribution(ModelSpec.iid(0.5), 100, 6)
        monkeypatch.setenv("RISKDIV_MAX_SUPPORT", "1000")
        loss_count_distribution(ModelSpec.iid(0.5), 100, 6)


class TestClosedFormMean:
    def test_iid(self):
        assert closed_form_mean_per_policy(ModelSpec.iid(1 / 6), PARAMS) == pytest.approx(10.0)

    def test_common_shock_heavy_crisis(self):
        model = ModelSpec.common_shock(1 / 6, 0.5, 0.10)
        assert closed_form_mean_per_policy(model, PARAMS) == pytest.approx(12.0)

    def test_no_crisis_reduces_to_iid(self):
        model = ModelSpec.common_shock(0.3, 0.9, 0.0)
        assert closed_form_mean_per_policy(model, PARAMS) == pytest.approx(
            PARAMS.severity * PARAMS.exposures * 0.3
        )

    @given(
        p=st.floats(0.01, 0.45),
        q=st.floats(0.5, 0.99),
        pt=st.floats(0.0, 0.5),
    )
    @settings(max_examples=50, deadline=None)
    def test_shock_models_share_the_mean(self, p, q, pt):
        common, per_exposure = (
            ModelSpec.common_shock(p, q, pt),
            ModelSpec.per_exposure_shock(p, q, pt),
        )
        assert closed_form_mean_per_policy(common, PARAMS) == pytest.approx(
            closed_form_mean_per_policy(per_exposure, PARAMS), rel=1e-14
        )


class TestClosedFormVariance:
    def test_iid_single_policy(self):
        v = closed_form_variance_per_policy(ModelSpec.iid(1 / 6), PARAMS, 1)
        assert v == pytest.approx(500 / 6, rel=1e-12)

    def test_common_shock_floor_value(self):
        model = ModelSpec.common_shock(1 / 6, 0.5, 0.01)
        floor = nondiversifiable_floor(model, PARAMS)
        assert floor == pytest.approx(100 * 36 * (1 / 9) * 0.01 * 0.99, rel=1e-12)
        assert floor == pytest.approx(3.96, abs=1e-10)

    def test_per_exposure_floor_value(self):
        model = ModelSpec.per_exposure_shock(1 / 6, 0.5, 0.01)
        assert nondiversifiable_floor(model, PARAMS) == pytest.approx(0.66, abs=1e-10)

    def test_variance_approaches_floor(self):
        model = ModelSpec.common_shock(1 / 6, 0.5, 0.01)
        floor = nondiversifiable_floor(model, PARAMS)
        v = closed_form_variance_per_policy(model, PARAMS, 10**9)
        assert v == pytest.approx(floor, rel=1e-6)

    def test_iid_floor_is_zero(self):
        assert nondiversifiable_floor(ModelSpec.iid(0.3), PARAMS) == 0.0

    def test_floor_ratio_is_exposures(self):
        common, per_exposure = shock_models()
        ratio = nondiversifiable_floor(common, PARAMS) / nondiversifiable_floor(
            per_exposure, PARAMS
        )
        assert ratio == pytest.approx(PARAMS.exposures, rel=1e-12)

    def test_equal_probabilities_zero_floor(self):
        with pytest.warns(UserWarning):
            model = ModelSpec.common_shock(0.3, 0.3, 0.1)
        assert nondiversifiable_floor(model, PARAMS) == 0.0

    @given(
        p=st.floats(0.01, 0.45),
        q=st.floats(0.5, 0.95),
        pt=st.floats(0.001, 0.5),
        N=st.integers(1, 10_000),
    )
    @settings(max_examples=50, deadline=None)
    def test_variance_ordering_identity(self, p, q, pt, N):
        common, per_exposure = (
            ModelSpec.common_shock(p, q, pt),
            ModelSpec.per_exposure_shock(p, q, pt),
        )
        diff = closed_form_variance_per_policy(common, PARAMS, N) - closed_form_variance_per_policy(
            per_exposure, PARAMS, N
        )
        n, l = PARAMS.exposures, PARAMS.severity
        expected = l * l * n * (n - 1) * (q - p) ** 2 * pt * (1 - pt)
        assert diff == pytest.approx(expected, rel=1e-10, abs=1e-10)
        assert diff >= 0.0


class TestMomentAgreement:
    @pytest.mark.parametrize("N", [1, 10, 100, 1000])
    def test_distribution_matches_closed_forms(self, N):
        l = PARAMS.severity
        for model in (ModelSpec.iid(1 / 6), *shock_models()):
            d = loss_count_distribution(model, N, PARAMS.exposures)
            mean_c, var_c = moments(d)
            mean = l * mean_c / N
            var = l * l * var_c / (N * N)
            assert mean == pytest.approx(closed_form_mean_per_policy(model, PARAMS), rel=1e-10)
            assert var == pytest.approx(
                closed_form_variance_per_policy(model, PARAMS, N), rel=1e-10
            )

    def test_variance_limit_at_large_portfolio(self):
        # At N = 10^6 the distribution variance must sit on the predicted
        # floor plus first-term curve to 1e-3 relative.
        N = 1_000_000
        model = ModelSpec.common_shock(1 / 6, 0.5, 0.01)
        d = loss_count_distribution(model, N, PARAMS.exposures)
        _, var_c = moments(d)
        var = PARAMS.severity**2 * var_c / (N * N)
        assert var == pytest.approx(
            closed_form_variance_per_policy(model, PARAMS, N), rel=1e-3
        )
        assert var == pytest.approx(nondiversifiable_floor(model, PARAMS), rel=1e-2)


class TestModelSpecValidation:
    def test_probability_ranges(self):
        with pytest.raises(ValueError):
            ModelSpec.iid(1.2)
        with pytest.raises(ValueError):
            ModelSpec.common_shock(0.1, -0.2, 0.01)

    def test_soft_warning_regimes(self):
        with pytest.warns(UserWarning):
            ModelSpec.common_shock(0.5, 0.2, 0.01)  # crisis milder than normal
        with pytest.warns(UserWarning):
            ModelSpec.per_exposure_shock(0.1, 0.5, 0.7)  # crises dominate

    def test_params_validation(self):
        with pytest.raises(ValueError):
            PortfolioParams(num_policies=0)
        with pytest.raises(ValueError):
            PortfolioParams(severity=0.0)
        with pytest.raises(ValueError):
            PortfolioParams(alpha=1.0)
