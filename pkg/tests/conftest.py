"""
Shared fixtures for the SigScale tests.
"""
import os
import sys

import pytest

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data.models.significance import ResamplingConfig
from data.synthetic.matrix_data import MatrixDataGenerator
from data.synthetic.run_data import RunDataGenerator
from app.core.simulation import fit_simulation_model


@pytest.fixture(scope="session")
def rr_matrix_and_models():
    """Three RR@10 systems over 2,000 requests with their true marginals."""
    return MatrixDataGenerator(seed=7).generate_rr_matrix(n_systems=3, n_requests=2000)


@pytest.fixture(scope="session")
def rr_matrix(rr_matrix_and_models):
    return rr_matrix_and_models[0]


@pytest.fixture(scope="session")
def ndcg_matrix():
    matrix, _ = MatrixDataGenerator(seed=8).generate_ndcg_matrix(n_systems=3, n_requests=1000)
    return matrix


@pytest.fixture(scope="session")
def rr_model(rr_matrix):
    """Simulation model fitted on the RR fixture."""
    return fit_simulation_model(rr_matrix, seed=7)


@pytest.fixture
def fast_resampling():
    return ResamplingConfig(bootstrap_B=500, randomization_R=500, seed=11)


@pytest.fixture
def toy_files(tmp_path):
    """Two toy TREC runs in one file plus their qrels."""
    generator = RunDataGenerator(seed=3)
    runs = generator.generate_runs(n_systems=2, n_requests=5)
    qrels = generator.generate_qrels(n_requests=5)
    run_path = tmp_path / "toy.run"
    qrels_path = tmp_path / "toy.qrels"
    generator.write_trec_run(runs, str(run_path))
    generator.write_qrels(qrels, str(qrels_path))
    return run_path, qrels_path
