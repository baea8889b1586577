import pytest

from src.fl_sim import ExperimentConfig, SimSettings

from .helpers import make_config


@pytest.fixture
def small_config() -> ExperimentConfig:
    """Two groups of two clients, two rounds, tanh StageNet."""
    return make_config()


@pytest.fixture
def quiet_settings() -> SimSettings:
    return SimSettings(diagnostics=False, max_workers=2)
