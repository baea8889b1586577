"""Model family and local-trainer configuration."""

from enum import Enum
from typing import Literal

from pydantic import BaseModel, Field, PositiveInt, model_validator


class Activation(str, Enum):
    RELU = "relu"
    TANH = "tanh"


class StageNetConfig(BaseModel):
    """A depth-parameterized MLP family with explicit stages.

    Every block inside stage s is a square ``width_s x width_s`` layer, so
    all blocks of a stage share one parameter shape.
    """

    input_dim: PositiveInt
    stage_widths: list[PositiveInt] = Field(min_length=1)
    stages: PositiveInt | None = Field(
        default=None, description="Defaults to len(stage_widths)"
    )
    num_classes: PositiveInt
    activation: Activation = Activation.RELU

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _check_stages(self) -> "StageNetConfig":
        if self.stages is None:
            self.stages = len(self.stage_widths)
        elif self.stages != len(self.stage_widths):
            raise ValueError(
                f"stages={self.stages} but {len(self.stage_widths)} stage widths given"
            )
        return self


class TrainerConfig(BaseModel):
    """Client-side optimizer settings."""

    optimizer: Literal["sgd", "adam"] = "adam"
    learning_rate: float = Field(default=1e-3, ge=0.0, description="eta")
    adam_beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    local_epochs: PositiveInt = Field(default=1, description="E")
    batch_size: PositiveInt = 64
    prox_mu: float = Field(default=0.0, ge=0.0, description="FedProx coefficient; 0 disables")
    seed: int = 0

    model_config = {"extra": "forbid"}
