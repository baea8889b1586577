"""
Unit tests for linear CKA.
"""

import numpy as np
import pytest

from src.metrics import CkaMatrix, linear_cka, pairwise_stage_cka
from src.model_zoo import Activation, StageNetConfig, init_model
from src.shared.exceptions import DegenerateFeaturesError, MetricsError, ShapeMismatchError


def hsic_cka(x: np.ndarray, y: np.ndarray) -> float:
    """Kernel-form CKA through centered Gram matrices."""
    n = x.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    k, l = x @ x.T, y @ y.T

    def hsic(a, b):
        return np.trace(a @ h @ b @ h) / (n - 1) ** 2

    return hsic(k, l) / np.sqrt(hsic(k, k) * hsic(l, l))


@pytest.fixture
def features():
    rng = np.random.default_rng(0)
    return rng.standard_normal((30, 6)), rng.standard_normal((30, 4))


class TestLinearCka:

    def test_self_similarity(self, features):
        x, _ = features
        assert linear_cka(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric(self, features):
        x, y = features
        assert linear_cka(x, y) == pytest.approx(linear_cka(y, x), abs=1e-12)

    def test_orthogonal_and_scale_invariance(self, features):
        x, y = features
        q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((6, 6)))
        base = linear_cka(x, y)
        assert linear_cka(x @ q, y) == pytest.approx(base, abs=1e-10)
        assert linear_cka(7.5 * x, y) == pytest.approx(base, abs=1e-10)

    def test_offset_invariance(self, features):
        x, y = features
        assert linear_cka(x + 3.0, y) == pytest.approx(linear_cka(x, y), abs=1e-10)

    def test_in_unit_interval(self, features):
        x, y = features
        assert 0.0 <= linear_cka(x, y) <= 1.0

    def test_matches_kernel_form(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(3, 20))
            x = rng.standard_normal((n, int(rng.integers(1, 8))))
            y = rng.standard_normal((n, int(rng.integers(1, 8))))
            assert abs(linear_cka(x, y) - hsic_cka(x, y)) <= 1e-9

    def test_constant_features_are_degenerate(self):
        x = np.ones((5, 3))
        y = np.random.default_rng(3).standard_normal((5, 2))
        with pytest.raises(DegenerateFeaturesError, match="degenerate features"):
            linear_cka(x, y)

    def test_row_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            linear_cka(np.zeros((4, 2)), np.zeros((5, 2)))

    def test_single_sample(self):
        with pytest.raises(ShapeMismatchError):
            linear_cka(np.ones((1, 2)), np.ones((1, 2)))


class TestPairwiseStageCka:
    """Stage-feature similarity across models."""

    @pytest.fixture
    def cfg(self) -> StageNetConfig:
        return StageNetConfig(input_dim=4, stage_widths=[5, 3], num_classes=2, activation=Activation.TANH)

    @pytest.fixture
    def batch(self) -> np.ndarray:
        return np.random.default_rng(4).standard_normal((12, 4))

    def test_identical_models_score_one(self, cfg, batch):
        w = init_model(cfg, [1, 2], seed=0)
        matrix = pairwise_stage_cka([w, w.copy(), w.copy()], batch, stage=1, client_ids=[4, 5, 6])
        np.testing.assert_allclose(matrix.scores, np.ones((3, 3)), atol=1e-12)
        assert matrix.client_ids == [4, 5, 6]
        assert matrix.mean_off_diagonal() == pytest.approx(1.0, abs=1e-12)

    def test_different_depths_share_stage_width(self, cfg, batch):
        a = init_model(cfg, [1, 1], seed=0)
        b = init_model(cfg, [2, 3], seed=1)
        matrix = pairwise_stage_cka([a, b], batch, stage=0)
        assert matrix.scores.shape == (2, 2)
        assert matrix.scores[0, 1] == matrix.scores[1, 0]
        assert matrix.client_ids == [0, 1]

    def test_single_model_has_no_off_diagonal(self, cfg, batch):
        w = init_model(cfg, [1, 1], seed=0)
        assert pairwise_stage_cka([w], batch, stage=0).mean_off_diagonal() is None

    def test_missing_stage(self, cfg, batch):
        w = init_model(cfg, [1, 1], seed=0)
        with pytest.raises(MetricsError):
            pairwise_stage_cka([w], batch, stage=5)

    def test_empty_batch(self, cfg):
        w = init_model(cfg, [1, 1], seed=0)
        with pytest.raises(MetricsError):
            pairwise_stage_cka([w], np.zeros((0, 4)), stage=0)

    def test_mean_off_diagonal(self):
        matrix = CkaMatrix(stage=0, scores=np.array([[1.0, 0.2], [0.2, 1.0]]), client_ids=[0, 1])
        assert matrix.mean_off_diagonal() == pytest.approx(0.2)
