"""
Custom exception hierarchy for the simulator.

All component errors inherit from InCoError so they can be caught
uniformly at the CLI boundary or by the experiment runner.
"""


class InCoError(Exception):
    """Base exception for all simulator errors."""

    def __init__(self, message: str, component: str = "unknown"):
        self.component = component
        super().__init__(f"[{component}] {message}")


class TensorError(InCoError):
    """Errors raised by the tensor substrate."""

    def __init__(self, message: str):
        super().__init__(message, component="tensor_core")


class SurgeryError(InCoError):
    """Errors raised by cross-layer gradient surgery."""

    def __init__(self, message: str):
        super().__init__(message, component="grad_surgery")


class AggregationError(InCoError):
    """Errors raised by heterogeneous aggregation."""

    def __init__(self, message: str):
        super().__init__(message, component="hetero_agg")


class ModelError(InCoError):
    """Errors raised by the StageNet model family and local training."""

    def __init__(self, message: str):
        super().__init__(message, component="model_zoo")


class DataError(InCoError):
    """Errors raised while generating, loading or partitioning data."""

    def __init__(self, message: str):
        super().__init__(message, component="data_plane")


class MetricsError(InCoError):
    """Errors raised by the diagnostic metrics."""

    def __init__(self, message: str):
        super().__init__(message, component="metrics")


class ConvergenceError(InCoError):
    """Errors raised by the bound evaluators and constant estimators."""

    def __init__(self, message: str):
        super().__init__(message, component="convergence_lab")


class ExperimentError(InCoError):
    """Errors raised by the experiment orchestration."""

    def __init__(self, message: str):
        super().__init__(message, component="fl_sim")


class ConfigError(InCoError):
    """Experiment configuration could not be loaded or validated."""

    def __init__(self, message: str):
        super().__init__(message, component="config")


# ─── Specific variants ─────────────────────────────────────


class ShapeMismatchError(TensorError):
    """Two tensors that must share a shape do not."""
    pass


class NonFiniteError(TensorError):
    """A tensor contains NaN or Inf values."""
    pass


class ZeroAnchorError(SurgeryError):
    """The anchor (Layer 0) gradient is all-zero, so alpha == 0."""
    pass


class NonNestedGroupsError(AggregationError):
    """Architecture groups are not nested by depth."""
    pass


class MissingContributionError(AggregationError):
    """A participating client did not supply one of its planned layers."""
    pass


class InvalidLabelError(ModelError):
    """A label lies outside [0, num_classes)."""
    pass


class EmptyShardError(ModelError):
    """Local training was asked to run on an empty shard."""
    pass


class IdxMagicError(DataError):
    """An IDX file carries an unexpected magic number."""
    pass


class IdxTruncatedError(DataError):
    """An IDX file ends before its header or payload is complete."""
    pass


class IdxCountMismatchError(DataError):
    """Image and label IDX files disagree on the item count."""
    pass


class PartitionError(DataError):
    """A Dirichlet partition satisfying min_per_client could not be found."""
    pass


class DegenerateFeaturesError(MetricsError):
    """CKA denominator is zero (constant feature matrix)."""
    pass


class UnreachableEpsilonError(ConvergenceError):
    """The target epsilon cannot be reached with the given constants."""
    pass


class InsufficientDataError(ConvergenceError):
    """Not enough samples to estimate the convergence constants."""
    pass
