"""
Tests for marginal fitting, selection, quantiles and mean transformation.
"""
import os
import sys

import numpy as np
import pytest
from scipy import stats

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data.models.distributions import MarginalFamily, MarginalModel
from app.core import marginals
from app.core.exceptions import FitError, UnreachableMeanError
from app.core.metrics import rr_support


def _point_masses(support, probabilities):
    return MarginalModel(
        family=MarginalFamily.DISCRETE_KDE,
        support=list(support),
        probabilities=list(probabilities),
        mean=float(np.dot(support, probabilities)),
    )


@pytest.fixture(scope="module")
def beta_draws():
    return stats.beta.rvs(2.0, 6.0, size=10_000, random_state=np.random.default_rng(21))


@pytest.fixture
def rr_base():
    return marginals.beta_binomial_model(rr_support(10), 0.6, 0.6)


class TestFitting:
    def test_beta_recovers_parameters(self, beta_draws):
        model, report = marginals.fit_marginal(beta_draws, MarginalFamily.BETA)
        assert model.params[0] == pytest.approx(2.0, rel=0.05)
        assert model.params[1] == pytest.approx(6.0, rel=0.05)
        assert report.n_params == 2
        assert report.aic == pytest.approx(4.0 - 2.0 * report.log_likelihood)

    def test_selection_prefers_beta_on_beta_data(self, beta_draws):
        model, _ = marginals.select_marginal(beta_draws, [MarginalFamily.TRUNCATED_NORMAL, MarginalFamily.BETA])
        assert model.family is MarginalFamily.BETA

    def test_truncated_normal_recovers_location(self):
        draws = stats.truncnorm.rvs(-2.0, 3.0, loc=0.4, scale=0.2, size=5000,
                                    random_state=np.random.default_rng(22))
        model, _ = marginals.fit_marginal(draws, MarginalFamily.TRUNCATED_NORMAL)
        assert model.params[0] == pytest.approx(0.4, abs=0.02)
        assert model.params[1] == pytest.approx(0.2, abs=0.02)
        assert model.mean == pytest.approx(draws.mean(), abs=0.005)

    def test_two_point_data_selects_kernel(self):
        """A two-valued sample is better described by point masses than by a beta density."""
        x = np.array([0.0] * 30 + [1.0] * 70)
        model, _ = marginals.select_marginal(x, [MarginalFamily.BETA, MarginalFamily.DISCRETE_KDE])
        assert model.family is MarginalFamily.DISCRETE_KDE
        assert model.support == [0.0, 1.0]

    def test_constant_scores(self):
        model, _ = marginals.fit_marginal([0.5] * 100, MarginalFamily.DISCRETE_KDE)
        assert model.mean == 0.5
        assert model.probabilities == [1.0]

    def test_constant_scores_have_no_continuous_fit(self):
        with pytest.raises(FitError):
            marginals.fit_marginal([0.5] * 100, MarginalFamily.BETA)

    def test_off_support_value(self):
        scores = [0.37] + [0.5] * 20
        with pytest.raises(FitError, match="0.37"):
            marginals.fit_marginal(scores, MarginalFamily.BETA_BINOMIAL, support=rr_support(10))

    def test_beta_binomial_needs_support(self):
        with pytest.raises(FitError):
            marginals.fit_marginal([0.5] * 20 + [1.0] * 20, MarginalFamily.BETA_BINOMIAL)

    def test_all_candidates_failing(self):
        with pytest.raises(FitError, match="no candidate"):
            marginals.select_marginal([0.37] + [0.5] * 20, [MarginalFamily.BETA_BINOMIAL], support=rr_support(10))

    def test_too_few_scores(self):
        with pytest.raises(ValueError):
            marginals.fit_marginal([0.1, 0.2], MarginalFamily.BETA)

    def test_rr_column_recovers_mean(self, rr_matrix):
        """The selected RR marginal is discrete and reproduces the sample mean."""
        support = marginals.support_for_metric("rr", 10)
        for system_id in rr_matrix.system_ids:
            column = rr_matrix.column(system_id)
            model, _ = marginals.select_marginal(column, support=support, metric_name="rr")
            assert model.family.is_discrete
            assert model.mean == pytest.approx(column.mean(), abs=0.015)
            assert model.mean == pytest.approx(float(np.dot(model.support, model.probabilities)), abs=1e-6)

    def test_default_candidates(self):
        assert marginals.default_candidates("rr") == [MarginalFamily.BETA_BINOMIAL, MarginalFamily.DISCRETE_KDE]
        assert MarginalFamily.BETA in marginals.default_candidates("ndcg")
        assert marginals.default_candidates("something-else") == marginals.default_candidates("ndcg")


class TestDistributionFunctions:
    def test_point_mass_quantiles(self):
        model = _point_masses([0.0, 1.0], [0.4, 0.6])
        assert marginals.inverse_cdf(model, 0.3) == 0.0
        assert marginals.inverse_cdf(model, 0.4) == 0.0
        assert marginals.inverse_cdf(model, 0.5) == 1.0

    def test_point_mass_cdf_and_mid_cdf(self):
        model = _point_masses([0.0, 1.0], [0.4, 0.6])
        assert marginals.cdf(model, 0.0) == pytest.approx(0.4)
        assert marginals.cdf(model, 0.5) == pytest.approx(0.4)
        np.testing.assert_allclose(marginals.mid_cdf(model, [0.0, 1.0]), [0.2, 0.7])

    def test_truncated_normal_median(self):
        model = MarginalModel(family=MarginalFamily.TRUNCATED_NORMAL, params=[0.5, 0.2], mean=0.5)
        assert marginals.inverse_cdf(model, 0.5) == pytest.approx(0.5, abs=1e-9)

    def test_beta_mean(self):
        model = MarginalModel(family=MarginalFamily.BETA, params=[2.0, 2.0], mean=0.5)
        assert marginals.mean(model) == 0.5

    @pytest.mark.parametrize("model", [
        MarginalModel(family=MarginalFamily.BETA, params=[2.0, 6.0], mean=0.25),
        MarginalModel(family=MarginalFamily.TRUNCATED_NORMAL, params=[0.3, 0.25], mean=0.35),
        marginals.beta_binomial_model(rr_support(10), 0.6, 0.6),
    ])
    def test_cdf_is_monotone_and_reaches_one(self, model):
        grid = np.linspace(0.0, 1.0, 201)
        values = marginals.cdf(model, grid)
        assert np.all(np.diff(values) >= 0.0)
        assert values[-1] == pytest.approx(1.0)

    def test_quantile_levels_must_be_open(self):
        model = MarginalModel(family=MarginalFamily.BETA, params=[2.0, 2.0], mean=0.5)
        for level in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                marginals.inverse_cdf(model, level)

    def test_samples_are_uniform_after_cdf(self, beta_draws):
        """CDF of the model's own samples is uniform (Kolmogorov-Smirnov at the 0.1% level)."""
        model, _ = marginals.fit_marginal(beta_draws, MarginalFamily.BETA)
        sample = marginals.sample_marginal(model, 10_000, np.random.default_rng(23))
        assert stats.kstest(marginals.cdf(model, sample), "uniform").pvalue > 0.001

    def test_discrete_samples_match_probabilities(self, rr_base):
        sample = marginals.sample_marginal(rr_base, 20_000, np.random.default_rng(24))
        assert set(np.unique(sample)) <= set(rr_base.support)
        assert sample.mean() == pytest.approx(rr_base.mean, abs=0.01)


class TestTransformMean:
    def test_beta_keeps_concentration(self):
        model = MarginalModel(family=MarginalFamily.BETA, params=[2.0, 6.0], mean=0.25)
        shifted = marginals.transform_mean(model, 0.5)
        assert shifted.params == pytest.approx([4.0, 4.0])
        assert shifted.mean == 0.5

    def test_identity(self, rr_base):
        assert marginals.transform_mean(rr_base, rr_base.mean) == rr_base

    def test_point_mass_cannot_move(self):
        with pytest.raises(UnreachableMeanError):
            marginals.transform_mean(_point_masses([0.5], [1.0]), 0.6)

    def test_target_outside_unit_interval(self, rr_base):
        with pytest.raises(UnreachableMeanError):
            marginals.transform_mean(rr_base, 1.0)

    @pytest.mark.parametrize("target", [0.2, 0.35, 0.6])
    def test_beta_binomial_hits_target(self, rr_base, target):
        shifted = marginals.transform_mean(rr_base, target)
        assert shifted.family is MarginalFamily.BETA_BINOMIAL
        assert shifted.mean == pytest.approx(target, abs=1e-9)
        assert sum(shifted.params) == pytest.approx(sum(rr_base.params))

    def test_beta_binomial_round_trip(self, rr_base):
        there = marginals.transform_mean(rr_base, rr_base.mean + 0.05)
        back = marginals.transform_mean(there, rr_base.mean)
        assert back.params == pytest.approx(rr_base.params, abs=1e-6)

    def test_truncated_normal_round_trip(self):
        model = MarginalModel(family=MarginalFamily.TRUNCATED_NORMAL, params=[0.4, 0.2],
                              mean=float(stats.truncnorm(-2.0, 3.0, loc=0.4, scale=0.2).mean()))
        there = marginals.transform_mean(model, model.mean + 0.05)
        assert there.mean == pytest.approx(model.mean + 0.05, abs=1e-9)
        assert there.params[1] == model.params[1]
        back = marginals.transform_mean(there, model.mean)
        assert back.params == pytest.approx(model.params, abs=1e-6)

    def test_kernel_tilt_round_trip(self):
        model = _point_masses([0.0, 0.5, 1.0], [0.5, 0.3, 0.2])
        there = marginals.transform_mean(model, 0.45)
        assert there.mean == pytest.approx(0.45, abs=1e-9)
        assert there.support == model.support
        back = marginals.transform_mean(there, model.mean)
        assert back.probabilities == pytest.approx(model.probabilities, abs=1e-6)


if __name__ == "__main__":
    pytest.main([__file__])
