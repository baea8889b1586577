"""Experiment orchestration: sampling, local training, server rounds, reporting and the CLI."""

from .config import DatasetConfig, ExperimentConfig, SimSettings, load_experiment_config
from .federation import Federation, build_federation
from .reporting import RunSummary, metric_columns
from .runner import VARIANTS, run_comparison, run_experiment, variant_config
from .server import (
    ServerState,
    distribute,
    init_server_state,
    sample_clients,
    sampling_rng,
    server_round,
)

__all__ = [
    "DatasetConfig",
    "ExperimentConfig",
    "Federation",
    "RunSummary",
    "ServerState",
    "SimSettings",
    "VARIANTS",
    "build_federation",
    "distribute",
    "init_server_state",
    "load_experiment_config",
    "metric_columns",
    "run_comparison",
    "run_experiment",
    "sample_clients",
    "sampling_rng",
    "server_round",
    "variant_config",
]
