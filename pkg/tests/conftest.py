import numpy as np
import pytest

from uqfilter import (
    McConfig,
    PlantedProblem,
    QuantizedHead,
    planted_dataset,
    planted_head,
    quantize_head_pipeline,
)


@pytest.fixture(scope="session")
def problem() -> PlantedProblem:
    """Small separable classification head shared across tests."""
    rng = np.random.default_rng(1234)
    return planted_head(rng, feature_dim=24, hidden_dim=16, num_classes=6)


@pytest.fixture(scope="session")
def calib_features(problem) -> list[np.ndarray]:
    rng = np.random.default_rng(99)
    ds = planted_dataset(rng, problem, num_samples=96, noise=0.3)
    return list(ds.features)


@pytest.fixture(scope="session")
def qmodel(problem, calib_features) -> QuantizedHead:
    return quantize_head_pipeline(problem.head, calib_features)


@pytest.fixture(scope="session")
def test_samples(problem):
    rng = np.random.default_rng(100)
    return planted_dataset(rng, problem, num_samples=48, noise=0.3).samples()


@pytest.fixture()
def mc_cfg() -> McConfig:
    return McConfig(num_iter=20, conf_factor=0.7, threshold=0.5, base_seed=11)
