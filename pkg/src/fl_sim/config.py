"""
Simulator runtime settings and experiment configuration.

SimSettings holds process-level knobs read from the environment (prefix
FLSIM_). ExperimentConfig describes one experiment and is loaded from a
TOML document whose keys mirror the field names.
"""

import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, PositiveInt, ValidationError, model_validator
from pydantic_settings import SettingsConfigDict

from src.data_plane import PartitionConfig
from src.grad_surgery import SurgeryConfig
from src.hetero_agg import GroupSpec
from src.model_zoo import StageNetConfig, TrainerConfig
from src.shared.config import BaseSimSettings
from src.shared.exceptions import ConfigError


class SimSettings(BaseSimSettings):
    """Settings specific to the simulator process."""

    component_name: str = "fl_sim"
    max_workers: PositiveInt = 4
    output_dir: str = "runs"
    diagnostic_probes: PositiveInt = 2
    diagnostics: bool = True

    model_config = SettingsConfigDict(
        env_prefix="FLSIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class DatasetConfig(BaseModel):
    """Where the samples come from: Gaussian clusters or an IDX file pair."""

    kind: Literal["synthetic", "idx"] = "synthetic"
    n: PositiveInt = 5000
    dim: PositiveInt = 32
    classes: PositiveInt = 10
    cluster_spread: float = Field(default=1.0, ge=0.0)
    clusters_per_class: PositiveInt = Field(default=1, description="Gaussian clusters drawn per class")
    seed: int = 0
    images_path: str | None = None
    labels_path: str | None = None

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _check_paths(self) -> "DatasetConfig":
        if self.kind == "idx" and not (self.images_path and self.labels_path):
            raise ValueError("idx datasets need images_path and labels_path")
        return self


Method = Literal["fedavg_groupwise", "hetero_avg", "inco"]
ClientAlgo = Literal["plain", "prox"]


class ExperimentConfig(BaseModel):
    """One federated experiment: method, federation, model, data and logging."""

    method: Method = "inco"
    client_algo: ClientAlgo = "plain"
    surgery: SurgeryConfig = Field(default_factory=SurgeryConfig)
    rounds: int = Field(default=100, ge=0, description="T")
    clients: PositiveInt = Field(default=20, description="K")
    sample_ratio: float = Field(default=1.0, gt=0.0, le=1.0)
    groups: list[GroupSpec] = Field(min_length=1)
    model: StageNetConfig
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    partition: PartitionConfig
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    eval_batch: PositiveInt = 256
    log_every: PositiveInt = 1
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    holdout_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)
    weighted_aggregation: bool = False
    upload_noise_scale: float = Field(default=0.0, ge=0.0)

    model_config = {"extra": "forbid"}

    @model_validator(mode="before")
    @classmethod
    def _fill_partition_clients(cls, data: Any) -> Any:
        if isinstance(data, dict):
            partition = dict(data.get("partition") or {})
            if "num_clients" not in partition and "clients" in data:
                partition["num_clients"] = data["clients"]
            data = {**data, "partition": partition}
        return data

    @model_validator(mode="after")
    def _check_federation(self) -> "ExperimentConfig":
        next_id = 0
        for group in sorted(self.groups, key=lambda g: g.group_id):
            if not group.client_ids:
                if group.size is None:
                    raise ValueError(f"group {group.group_id} needs client_ids or size")
                group.client_ids = list(range(next_id, next_id + group.size))
            elif group.size is not None and group.size != len(group.client_ids):
                raise ValueError(
                    f"group {group.group_id} has size {group.size} but "
                    f"{len(group.client_ids)} client ids"
                )
            next_id = max(next_id, max(group.client_ids) + 1)
            if group.stages != self.model.stages:
                raise ValueError(
                    f"group {group.group_id} has {group.stages} stages, model has {self.model.stages}"
                )

        total = sum(len(g.client_ids) for g in self.groups)
        if total != self.clients:
            raise ValueError(f"groups hold {total} clients but clients={self.clients}")
        if self.partition.num_clients != self.clients:
            raise ValueError(
                f"partition.num_clients={self.partition.num_clients} but clients={self.clients}"
            )
        if self.dataset.kind == "synthetic":
            if self.dataset.dim != self.model.input_dim:
                raise ValueError(
                    f"dataset dim {self.dataset.dim} != model input_dim {self.model.input_dim}"
                )
            if self.dataset.classes > self.model.num_classes:
                raise ValueError(
                    f"dataset has {self.dataset.classes} classes, model only {self.model.num_classes}"
                )
        return self

    # ─── Derived views ─────────────────────────────────────

    @property
    def sample_size(self) -> int:
        return max(1, math.ceil(self.clients * self.sample_ratio))

    @property
    def method_label(self) -> str:
        label = self.surgery.variant_label if self.method == "inco" else self.method
        if self.client_algo == "prox":
            label += "+prox"
        return label

    def client_trainer(self) -> TrainerConfig:
        """Trainer settings with the proximal term disabled for plain clients."""
        if self.client_algo == "plain" and self.trainer.prox_mu != 0.0:
            return self.trainer.model_copy(update={"prox_mu": 0.0})
        return self.trainer

    def sorted_groups(self) -> list[GroupSpec]:
        return sorted(self.groups, key=lambda g: g.group_id)


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """
    Load and validate an experiment description from a TOML file.

    Raises:
        ConfigError: If the file is missing, malformed, or fails validation.
    """
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}") from e

    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config {path}: {e}") from e
