"""
Tests for the generative simulation model.
"""
import os
import sys

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data.models.distributions import CopulaFamily, CopulaModel, MarginalFamily, MarginalModel
from data.models.evaluation import EvaluationMatrix
from data.models.simulation import EffectEntry, EffectSpec, PitMode, SimulationModel
from app.core import simulation
from app.core.copulas import copula_tau, kendall_tau
from app.core.exceptions import ConfigurationError, IngestError, InputError, UnknownSystemError


def _beta(mean, concentration=4.0):
    return MarginalModel(family=MarginalFamily.BETA, params=[concentration * mean, concentration * (1.0 - mean)],
                         mean=mean)


def _hand_model(means, pairs, family=CopulaFamily.GAUSSIAN, theta=0.5):
    """Beta marginals with the given means and one copula per listed pair."""
    marginals = {system_id: _beta(mean) for system_id, mean in means.items()}
    copulas = [
        CopulaModel(family=family, theta=theta, kendall_tau=copula_tau(family, theta), systems=tuple(sorted(pair)))
        for pair in pairs
    ]
    entries = []
    for first, second in pairs:
        low, high = sorted((first, second), key=lambda s: (means[s], s))
        entries.append(EffectEntry(baseline=low, experimental=high, gap=abs(means[high] - means[low])))
    entries.sort(key=lambda e: (e.gap, e.baseline, e.experimental))
    return SimulationModel(marginals=marginals, copulas=copulas, effect_index=entries)


class TestFitSimulationModel:
    def test_structure(self, rr_model, rr_matrix):
        assert list(rr_model.marginals) == rr_matrix.system_ids
        assert len(rr_model.copulas) == 3
        assert len(rr_model.effect_index) == 3
        gaps = [entry.gap for entry in rr_model.effect_index]
        assert gaps == sorted(gaps)
        assert rr_model.metric_name == "rr"
        assert rr_model.cutoff == 10
        assert rr_model.pit is PitMode.RANK
        assert rr_model.fit_seed == 7

    def test_marginal_means_follow_the_data(self, rr_model, rr_matrix):
        for system_id, model in rr_model.marginals.items():
            assert model.family.is_discrete
            assert model.mean == pytest.approx(rr_matrix.column(system_id).mean(), abs=0.015)

    def test_effect_entries_point_upwards(self, rr_model):
        for entry in rr_model.effect_index:
            baseline = rr_model.marginals[entry.baseline].mean
            experimental = rr_model.marginals[entry.experimental].mean
            assert experimental >= baseline
            assert entry.gap == pytest.approx(experimental - baseline)

    def test_identical_systems(self, rr_matrix):
        """A duplicated column gives a near-comonotone copula and a zero gap."""
        column = rr_matrix.column("sys00")
        frame = pd.DataFrame({"a": column, "b": column}, index=rr_matrix.scores.index)
        model = simulation.fit_simulation_model(EvaluationMatrix(scores=frame, metric_name="rr", cutoff=10))
        assert model.copulas[0].kendall_tau > 0.9
        assert model.effect_index[0].gap == pytest.approx(0.0)

    def test_continuous_metric(self, ndcg_matrix):
        model = simulation.fit_simulation_model(ndcg_matrix)
        assert all(not m.family.is_discrete for m in model.marginals.values())

    def test_parametric_pseudo_observations(self, rr_matrix):
        model = simulation.fit_simulation_model(rr_matrix, pairs=[("sys01", "sys00")], pit=PitMode.PARAMETRIC)
        assert model.pit is PitMode.PARAMETRIC
        assert model.pairs == [("sys00", "sys01")]

    def test_unknown_system_in_pairs(self, rr_matrix):
        with pytest.raises(UnknownSystemError, match="nope"):
            simulation.fit_simulation_model(rr_matrix, pairs=[("sys00", "nope")])

    def test_self_pair(self, rr_matrix):
        with pytest.raises(ConfigurationError):
            simulation.fit_simulation_model(rr_matrix, pairs=[("sys00", "sys00")])

    def test_too_few_requests(self, rr_matrix):
        small = EvaluationMatrix(scores=rr_matrix.scores.iloc[:20], metric_name="rr", cutoff=10)
        with pytest.raises(InputError):
            simulation.fit_simulation_model(small)


class TestScenarios:
    def test_null_pair_shares_one_marginal(self, rr_model):
        scenario = simulation.null_scenario(rr_model, rr_model.pairs[0])
        assert scenario.baseline is scenario.experimental
        assert scenario.baseline == rr_model.marginals[rr_model.pairs[0][0]]

    def test_null_pair_means_agree(self, rr_model):
        n = 100_000
        b, e = simulation.simulate_null_pair(rr_model, rr_model.pairs[0], n, np.random.default_rng(41))
        d = e - b
        assert abs(d.mean()) < 3 * d.std(ddof=1) / np.sqrt(n)

    def test_null_pair_for_unknown_pair(self, rr_model):
        with pytest.raises(ConfigurationError):
            simulation.null_scenario(rr_model, ("sys00", "missing"))

    def test_effect_pair_hits_delta(self, rr_model):
        n = 100_000
        spec = EffectSpec(delta=0.05)
        scenario = simulation.effect_scenario(rr_model, spec)
        assert scenario.experimental.mean == pytest.approx(scenario.baseline.mean + 0.05, abs=1e-6)
        b, e = simulation.simulate_effect_pair(rr_model, spec, n, np.random.default_rng(42))
        d = e - b
        assert abs(d.mean() - 0.05) < 3 * d.std(ddof=1) / np.sqrt(n)

    def test_same_seed_same_draws(self, rr_model):
        first = simulation.simulate_null_pair(rr_model, rr_model.pairs[1], 500, np.random.default_rng(43))
        second = simulation.simulate_null_pair(rr_model, rr_model.pairs[1], 500, np.random.default_rng(43))
        np.testing.assert_array_equal(first[0], second[0])
        np.testing.assert_array_equal(first[1], second[1])

    def test_independent_pair_is_uncorrelated(self):
        model = _hand_model({"a": 0.3, "b": 0.4}, [("a", "b")], family=CopulaFamily.INDEPENDENCE, theta=0.0)
        n = 10_000
        b, e = simulation.simulate_null_pair(model, ("a", "b"), n, np.random.default_rng(44))
        assert abs(np.corrcoef(b, e)[0, 1]) < 3 / np.sqrt(n)

    def test_dependent_pair_keeps_dependence(self):
        model = _hand_model({"a": 0.3, "b": 0.4}, [("a", "b")], theta=0.7)
        b, e = simulation.simulate_null_pair(model, ("a", "b"), 20_000, np.random.default_rng(45))
        assert kendall_tau(b, e) == pytest.approx(copula_tau("gaussian", 0.7), abs=0.02)


class TestEffectSelection:
    def test_tie_goes_to_smaller_gap(self):
        model = _hand_model({"a": 0.30, "b": 0.34, "c": 0.36}, [("a", "b"), ("a", "c")])
        assert simulation.select_effect_pair(model, 0.05).pair == ("a", "b")
        assert simulation.select_effect_pair(model, 0.06).pair == ("a", "c")

    def test_orientation_uses_lower_mean_as_baseline(self):
        model = _hand_model({"a": 0.5, "b": 0.3}, [("a", "b")])
        entry = simulation.select_effect_pair(model, 0.01)
        assert entry.baseline == "b"
        assert entry.experimental == "a"

    def test_effect_beyond_one(self):
        model = _hand_model({"a": 0.96, "b": 0.98}, [("a", "b")])
        with pytest.raises(ConfigurationError):
            simulation.effect_scenario(model, EffectSpec(delta=0.05))

    def test_negative_delta_is_invalid(self):
        with pytest.raises(ValidationError):
            EffectSpec(delta=-0.01)


class TestBundles:
    def test_save_and_load(self, rr_model, tmp_path):
        path = tmp_path / "model.json"
        simulation.save_model(rr_model, path)
        assert simulation.load_model(path) == rr_model

    def test_missing_bundle(self, tmp_path):
        with pytest.raises(IngestError, match="does not exist"):
            simulation.load_model(tmp_path / "missing.json")

    def test_invalid_bundle(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"marginals": {}}', encoding="utf-8")
        with pytest.raises(IngestError, match="invalid model bundle"):
            simulation.load_model(path)


if __name__ == "__main__":
    pytest.main([__file__])
