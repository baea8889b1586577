"""
Unit tests for client sampling, distribution and the server round.
"""

import numpy as np
import pytest

from src.fl_sim import distribute, init_server_state, sample_clients, sampling_rng, server_round
from src.shared.models import LayerKey, layer_keys_for_depths

from .helpers import make_config


def zero_deltas(state, client_ids) -> dict:
    out = {}
    for cid in client_ids:
        weights = distribute(state, state.group_of(cid))
        out[cid] = {k: np.zeros_like(v) for k, v in weights.layers.items()}
    return out


def random_deltas(state, client_ids, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    out = {}
    for cid in client_ids:
        weights = distribute(state, state.group_of(cid))
        out[cid] = {k: 0.01 * rng.standard_normal(v.shape) for k, v in weights.layers.items()}
    return out


# ─── Sampling ────────────────────────────────────────────────


class TestSampleClients:

    def test_full_ratio_returns_everyone(self, small_config):
        assert sample_clients(1, small_config, sampling_rng(0, 1)) == [0, 1, 2, 3]

    def test_same_seed_and_round_repeat(self):
        cfg = make_config(sample_ratio=0.5)
        a = sample_clients(3, cfg, sampling_rng(7, 3))
        b = sample_clients(3, cfg, sampling_rng(7, 3))
        assert a == b

    def test_hundred_clients_ten_percent(self):
        cfg = make_config(
            clients=100, sample_ratio=0.1,
            groups=[{"group_id": 1, "depth_per_stage": [1, 1], "size": 100}],
        )
        for t in range(1, 20):
            sample = sample_clients(t, cfg, sampling_rng(0, t))
            assert len(sample) == 10
            assert len(set(sample)) == 10
            assert sample == sorted(sample)


# ─── Distribution ────────────────────────────────────────────


class TestDistribute:
    """Clients receive a copy of the layers their group owns."""

    def test_largest_group_gets_full_copy(self, small_config):
        state = init_server_state(small_config, seed=0)
        weights = distribute(state, state.largest_group)
        assert weights.keys() == state.global_weights.keys()
        for key in weights.keys():
            np.testing.assert_array_equal(weights.layers[key], state.global_weights.layers[key])
            assert weights.layers[key] is not state.global_weights.layers[key]

    def test_smallest_group_gets_anchor_layers(self, small_config):
        state = init_server_state(small_config, seed=0)
        weights = distribute(state, state.groups[0])
        assert weights.keys() == layer_keys_for_depths([1, 1])
        assert all(not k.is_deep for k in weights.keys())

    def test_global_model_is_largest_architecture(self, small_config):
        state = init_server_state(small_config, seed=0)
        assert state.global_weights.depth_per_stage() == [2, 2]


# ─── server_round ────────────────────────────────────────────


class TestServerRound:
    """Aggregation, surgery and the weight update."""

    @pytest.mark.parametrize("method", ["fedavg_groupwise", "hetero_avg", "inco"])
    def test_zero_deltas_leave_weights_unchanged(self, method):
        cfg = make_config(method=method)
        state = init_server_state(cfg, seed=0)
        new = server_round(state, zero_deltas(state, [0, 1, 2, 3]), cfg)
        assert new.round == 1
        for key in state.global_weights.keys():
            np.testing.assert_array_equal(new.global_weights.layers[key], state.global_weights.layers[key])
        assert new.beta_stats.layers == {}

    def test_single_client_hetero_avg_applies_its_delta(self):
        cfg = make_config(
            method="hetero_avg", clients=1,
            groups=[{"group_id": 1, "depth_per_stage": [2, 2], "size": 1}],
            partition={"min_per_client": 2},
        )
        state = init_server_state(cfg, seed=0)
        deltas = random_deltas(state, [0])
        new = server_round(state, deltas, cfg)
        for key, delta in deltas[0].items():
            np.testing.assert_array_equal(new.global_weights.layers[key], state.global_weights.layers[key] + delta)

    def test_opposing_deep_delta_is_cancelled(self):
        cfg = make_config(
            clients=1,
            groups=[{"group_id": 1, "depth_per_stage": [2, 1], "size": 1}],
            partition={"min_per_client": 2},
        )
        state = init_server_state(cfg, seed=0)
        anchor, deep = LayerKey.block(0, 0), LayerKey.block(0, 1)
        deltas = zero_deltas(state, [0])
        direction = np.zeros_like(deltas[0][anchor])
        direction[0, 0] = 1.0
        deltas[0][anchor] = direction
        deltas[0][deep] = -direction

        new = server_round(state, deltas, cfg)
        np.testing.assert_allclose(new.last_update[deep], 0.0, atol=1e-15)
        np.testing.assert_array_equal(new.last_update[anchor], direction)
        np.testing.assert_array_equal(new.global_weights.layers[anchor], state.global_weights.layers[anchor] + direction)
        assert new.beta_stats.positive_rate(deep) == 0.0
        assert new.beta_stats.mean_theta(deep) == pytest.approx(-1.0)

    @pytest.mark.parametrize("method", ["fedavg_groupwise", "hetero_avg", "inco"])
    def test_update_identity(self, method):
        cfg = make_config(method=method)
        state = init_server_state(cfg, seed=1)
        new = server_round(state, random_deltas(state, [0, 1, 2, 3], seed=2), cfg)
        assert set(new.last_update) == set(state.global_weights.keys())
        for key, update in new.last_update.items():
            np.testing.assert_array_equal(new.global_weights.layers[key], state.global_weights.layers[key] + update)

    def test_inco_records_beta_for_deep_layers_only(self, small_config):
        state = init_server_state(small_config, seed=0)
        new = server_round(state, random_deltas(state, [0, 1, 2, 3]), small_config)
        assert set(new.beta_stats.layers) == {LayerKey.block(0, 1), LayerKey.block(1, 1)}

    def test_inco_changes_only_deep_layers_relative_to_hetero_avg(self):
        inco, hetero = make_config(), make_config(method="hetero_avg")
        state = init_server_state(inco, seed=0)
        deltas = random_deltas(state, [0, 1, 2, 3], seed=5)
        a = server_round(state, deltas, inco)
        b = server_round(init_server_state(hetero, seed=0), deltas, hetero)
        for key in a.last_update:
            if not key.is_deep:
                np.testing.assert_array_equal(a.last_update[key], b.last_update[key])

    def test_fedavg_groupwise_keeps_groups_apart(self):
        cfg = make_config(method="fedavg_groupwise")
        state = init_server_state(cfg, seed=0)
        new = server_round(state, random_deltas(state, [0, 1]), cfg)
        large = new.group_weights[2]
        for key in large.keys():
            np.testing.assert_array_equal(large.layers[key], state.group_weights[2].layers[key])
        assert new.last_update == {}
        small = new.group_weights[1]
        assert any(
            not np.array_equal(small.layers[k], state.group_weights[1].layers[k]) for k in small.keys()
        )

    def test_partial_participation(self, small_config):
        state = init_server_state(small_config, seed=0)
        new = server_round(state, random_deltas(state, [0, 1]), small_config)
        deep = LayerKey.block(0, 1)
        assert deep not in new.last_update
        np.testing.assert_array_equal(new.global_weights.layers[deep], state.global_weights.layers[deep])
