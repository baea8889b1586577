"""
Small experiment configs shared by the simulator tests.
"""

from pathlib import Path

from src.fl_sim import ExperimentConfig

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


def make_config(**overrides) -> ExperimentConfig:
    base = {
        "method": "inco",
        "rounds": 2,
        "clients": 4,
        "sample_ratio": 1.0,
        "eval_batch": 32,
        "groups": [
            {"group_id": 1, "depth_per_stage": [1, 1], "size": 2},
            {"group_id": 2, "depth_per_stage": [2, 2], "size": 2},
        ],
        "model": {"input_dim": 6, "stage_widths": [6, 5], "num_classes": 3, "activation": "tanh"},
        "trainer": {"optimizer": "sgd", "learning_rate": 0.05, "batch_size": 8},
        "partition": {"dirichlet_alpha": 1.0, "min_per_client": 5},
        "dataset": {"n": 120, "dim": 6, "classes": 3, "cluster_spread": 0.8},
    }
    base.update(overrides)
    return ExperimentConfig.model_validate(base)


