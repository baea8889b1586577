"""Constants of the convergence analysis and bound results."""

from dataclasses import dataclass

from pydantic import BaseModel, Field


class ConvergenceConstants(BaseModel):
    """Plug-in constants for the drift, step-size and round-count bounds.

    ``rho`` is the gradient-norm bound itself; formulas use rho².
    """

    L: float = Field(default=0.0, ge=0.0, description="Smoothness constant")
    sigma2: float = Field(default=0.0, ge=0.0, description="Minibatch gradient variance bound")
    rho: float = Field(default=0.0, ge=0.0, description="Expected gradient-norm bound")
    gamma: float = Field(default=0.0, ge=0.0, description="Inter-layer gradient covariance bound")
    E: int = Field(default=1, ge=1, description="Local steps per round")
    eta: float = Field(default=0.0, ge=0.0, description="Learning rate")
    kappa: float = Field(default=0.0, ge=0.0, description="Initial loss minus optimal loss")
    epsilon: float = Field(default=0.0, ge=0.0, description="Target gradient-norm level")

    model_config = {"extra": "forbid"}

    @property
    def rho2(self) -> float:
        return self.rho * self.rho


@dataclass(frozen=True)
class EtaBound:
    """Largest admissible learning rate; ``admissible`` is False when value <= 0."""

    value: float
    admissible: bool
