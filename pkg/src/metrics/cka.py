"""
Linear centered kernel alignment (CKA).

With column-centered feature matrices X̄ (n×p) and Ȳ (n×q):

    CKA(X, Y) = ||ȲᵀX̄||_F² / (||X̄ᵀX̄||_F · ||ȲᵀȲ||_F)

Invariant to orthogonal transforms and isotropic scaling of either input.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.model_zoo import ModelWeights, forward
from src.shared.exceptions import DegenerateFeaturesError, MetricsError, ShapeMismatchError
from src.tensor_core import Tensor, matmul


def _center(x: Tensor) -> Tensor:
    return x - x.mean(axis=0, keepdims=True)


def linear_cka(x: Tensor, y: Tensor) -> float:
    """
    Linear CKA between two feature matrices on the same n inputs.

    Raises:
        ShapeMismatchError: If the row counts differ or n < 2.
        DegenerateFeaturesError: If either centered input is all-zero.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ShapeMismatchError(f"CKA inputs need equal row counts, got {x.shape} and {y.shape}")
    if x.shape[0] < 2:
        raise ShapeMismatchError("CKA needs at least two samples")

    xc = _center(x)
    yc = _center(y)
    cross = np.linalg.norm(matmul(yc.T, xc), "fro")
    denom = np.linalg.norm(matmul(xc.T, xc), "fro") * np.linalg.norm(matmul(yc.T, yc), "fro")
    if denom == 0.0:
        raise DegenerateFeaturesError("degenerate features")
    return float(cross * cross / denom)


@dataclass
class CkaMatrix:
    """Symmetric pairwise CKA scores for one stage."""

    stage: int
    scores: np.ndarray
    client_ids: list[int]

    def mean_off_diagonal(self) -> float | None:
        k = self.scores.shape[0]
        if k < 2:
            return None
        mask = ~np.eye(k, dtype=bool)
        return float(self.scores[mask].mean())


def pairwise_stage_cka(
    clients: Sequence[ModelWeights],
    eval_batch: Tensor,
    stage: int,
    client_ids: Sequence[int] | None = None,
) -> CkaMatrix:
    """
    CKA of one stage's features across models on a shared batch.

    Args:
        clients: Models to compare; each must contain ``stage``.
        eval_batch: Shared input batch.
        stage: Stage whose output features are compared.
        client_ids: Labels for the rows; defaults to 0..len(clients)-1.

    Raises:
        MetricsError: If the batch is empty or a model lacks the stage.
    """
    if len(eval_batch) == 0:
        raise MetricsError("CKA evaluation batch is empty")
    ids = list(client_ids) if client_ids is not None else list(range(len(clients)))
    if len(ids) != len(clients):
        raise MetricsError(f"{len(ids)} client ids for {len(clients)} models")

    features: list[Tensor] = []
    for cid, weights in zip(ids, clients):
        _, stage_features, _ = forward(weights, eval_batch)
        if stage >= len(stage_features):
            raise MetricsError(f"model of client {cid} has no stage {stage}")
        features.append(stage_features[stage])

    k = len(features)
    scores = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            scores[i, j] = scores[j, i] = linear_cka(features[i], features[j])
    return CkaMatrix(stage=stage, scores=scores, client_ids=ids)
