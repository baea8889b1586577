"""
Experiment loop: sample, distribute, train locally, aggregate, evaluate.

Sampled clients train concurrently (semaphore-bounded ``asyncio.to_thread``
fan-out collected with ``asyncio.gather``). Every client draws from its
own RNG stream seeded by (seed, client_id, round) and server reductions
follow the plan order, so results do not depend on ``max_workers``.
"""

import asyncio
import time
from pathlib import Path
from typing import Iterable

import numpy as np

from src.convergence_lab import eta_bound_diagnostic
from src.fl_sim.config import ExperimentConfig, SimSettings
from src.fl_sim.federation import Federation, build_federation
from src.fl_sim.reporting import (
    Row,
    RunSummary,
    beta_column,
    layer_suffix,
    metric_columns,
    write_metrics_csv,
    write_run_artifacts,
)
from src.fl_sim.server import (
    ServerState,
    distribute,
    init_server_state,
    sample_clients,
    sampling_rng,
    server_round,
)
from src.grad_surgery import SurgeryConfig
from src.metrics import accuracy, pairwise_stage_cka
from src.model_zoo import forward, local_train
from src.shared.exceptions import ConvergenceError, DegenerateFeaturesError, ExperimentError, InCoError
from src.shared.logging import generate_run_id, setup_logging
from src.shared.models import LayerKey
from src.tensor_core import Tensor

logger = setup_logging("fl_sim.runner", level="INFO")

VARIANTS: dict[str, dict] = {
    "fedavg_groupwise": {"method": "fedavg_groupwise"},
    "hetero_avg": {"method": "hetero_avg"},
    "inco": {"method": "inco", "surgery": SurgeryConfig()},
    "inco_wo_norm": {"method": "inco", "surgery": SurgeryConfig(normalize=False)},
    "inco_wo_opt": {"method": "inco", "surgery": SurgeryConfig(optimize=False)},
    "inco_wo_norm_opt": {
        "method": "inco", "surgery": SurgeryConfig(normalize=False, optimize=False),
    },
}


# ─── Client training ───────────────────────────────────────


def _add_upload_noise(
    delta: dict[LayerKey, Tensor], scale: float, rng: np.random.Generator,
) -> dict[LayerKey, Tensor]:
    noisy: dict[LayerKey, Tensor] = {}
    for key, tensor in delta.items():
        std = scale * float(np.std(tensor))
        noisy[key] = tensor + rng.normal(0.0, std, size=tensor.shape) if std > 0.0 else tensor
    return noisy


async def _train_sampled(
    state: ServerState,
    fed: Federation,
    cfg: ExperimentConfig,
    sampled: list[int],
    round_index: int,
    max_workers: int,
) -> dict[int, dict[LayerKey, Tensor]]:
    tcfg = cfg.client_trainer()
    semaphore = asyncio.Semaphore(max_workers)

    async def _train_one(cid: int) -> tuple[int, dict[LayerKey, Tensor]]:
        async with semaphore:
            group = fed.client_group[cid]
            weights = distribute(state, group)
            rng = np.random.default_rng([state.seed, cid, round_index])
            try:
                _, delta = await asyncio.to_thread(
                    local_train, weights, fed.train[cid], tcfg, weights, rng,
                )
            except InCoError as e:
                raise ExperimentError(f"round {round_index}, client {cid}: {e}") from e
            if cfg.upload_noise_scale > 0.0:
                noise_rng = np.random.default_rng([state.seed, cid, round_index, 1])
                delta = _add_upload_noise(delta, cfg.upload_noise_scale, noise_rng)
            return cid, delta

    results = await asyncio.gather(*(_train_one(cid) for cid in sampled))
    return dict(results)


# ─── Evaluation ────────────────────────────────────────────


def _evaluate(
    state: ServerState,
    fed: Federation,
    cfg: ExperimentConfig,
    settings: SimSettings,
    deep_layers: list[LayerKey],
) -> Row:
    row: Row = {"round": state.round, "method": cfg.method_label, "seed": state.seed}

    per_client: dict[int, float] = {}
    for cid in fed.client_ids:
        holdout = fed.holdout[cid]
        if len(holdout) == 0:
            continue
        logits, _, _ = forward(distribute(state, fed.client_group[cid]), holdout.features)
        per_client[cid] = accuracy(logits, holdout.labels)
    if per_client:
        values = list(per_client.values())
        row["mean_acc"] = float(np.mean(values))
        row["max_acc"] = float(np.max(values))
        row["min_acc"] = float(np.min(values))
    for group in state.groups:
        accs = [per_client[c] for c in group.client_ids if c in per_client]
        row[f"acc_group_{group.group_id}"] = float(np.mean(accs)) if accs else None

    group_models = [distribute(state, g) for g in state.groups]
    group_ids = [g.group_id for g in state.groups]
    for stage in range(int(cfg.model.stages)):
        try:
            matrix = pairwise_stage_cka(group_models, fed.eval_batch, stage, group_ids)
            row[f"cka_stage_{stage}"] = matrix.mean_off_diagonal()
        except DegenerateFeaturesError:
            logger.warning("Round %d: degenerate stage-%d features, CKA left blank", state.round, stage)
            row[f"cka_stage_{stage}"] = None

    for key in deep_layers:
        row[beta_column(key)] = state.beta_stats.positive_rate(key)

    row["eta_bound_estimate"] = None
    if settings.diagnostics and fed.pooled_holdout is not None:
        try:
            bound = eta_bound_diagnostic(
                state.global_weights, fed.pooled_holdout, cfg.client_trainer(),
                settings.diagnostic_probes, state.seed * 100003 + state.round,
            )
            row["eta_bound_estimate"] = bound.value
        except ConvergenceError as e:
            logger.warning("Round %d: step-size diagnostic unavailable: %s", state.round, e)
    return row


# ─── Runs ──────────────────────────────────────────────────


async def _run_rounds(
    cfg: ExperimentConfig, seed: int, settings: SimSettings, summary: RunSummary,
    deep_layers: list[LayerKey],
) -> ServerState:
    fed = build_federation(cfg, seed)
    state = init_server_state(cfg, seed)
    counts = {cid: len(ds) for cid, ds in fed.train.items()} if cfg.weighted_aggregation else None

    summary.rows.append(_evaluate(state, fed, cfg, settings, deep_layers))
    for t in range(1, cfg.rounds + 1):
        sampled = sample_clients(t, cfg, sampling_rng(seed, t))
        deltas = await _train_sampled(state, fed, cfg, sampled, t, settings.max_workers)
        try:
            state = server_round(state, deltas, cfg, counts)
        except InCoError as e:
            raise ExperimentError(f"round {t}, server aggregation: {e}") from e

        if t % cfg.log_every == 0 or t == cfg.rounds:
            row = _evaluate(state, fed, cfg, settings, deep_layers)
            summary.rows.append(row)
            logger.info(
                "[%s seed %d] round %d/%d mean_acc=%.4f",
                cfg.method_label, seed, t, cfg.rounds, row.get("mean_acc") or 0.0,
            )
    return state


def run_experiment(
    cfg: ExperimentConfig,
    seed: int | None = None,
    out_dir: str | Path | None = None,
    settings: SimSettings | None = None,
    write_artifacts: bool = True,
) -> RunSummary:
    """
    Run one seeded experiment and (optionally) write its artifacts.

    Args:
        cfg: Validated experiment configuration.
        seed: Run seed; defaults to the first of ``cfg.seeds``.
        out_dir: Artifact directory; defaults to ``settings.output_dir``.
        settings: Process settings; read from the environment when omitted.
        write_artifacts: Write ``<method>_seed<seed>.csv`` and ``.json``.

    Returns:
        The RunSummary with one row for round 0 and one per logged round.

    Raises:
        ExperimentError: Wrapping any component error with its round and client.
    """
    settings = settings or SimSettings()
    seed = cfg.seeds[0] if seed is None else seed
    run_id = generate_run_id()
    largest = cfg.sorted_groups()[-1]
    deep_layers = [
        LayerKey.block(s, i)
        for s, depth in enumerate(largest.depth_per_stage)
        for i in range(1, depth)
    ]
    summary = RunSummary(
        method=cfg.method_label,
        seed=seed,
        run_id=run_id,
        columns=metric_columns(cfg.groups, int(cfg.model.stages), deep_layers),
        config=cfg.model_dump(mode="json"),
    )

    logger.info("Run %s: %s seed %d, %d rounds", run_id, cfg.method_label, seed, cfg.rounds)
    started = time.perf_counter()
    try:
        state = asyncio.run(_run_rounds(cfg, seed, settings, summary, deep_layers))
    except ExperimentError:
        raise
    except InCoError as e:
        raise ExperimentError(f"setup failed: {e}") from e
    summary.wall_clock_seconds = time.perf_counter() - started
    summary.mean_theta = {layer_suffix(k): state.beta_stats.mean_theta(k) for k in deep_layers}

    if write_artifacts:
        write_run_artifacts(Path(out_dir or settings.output_dir), summary)
    logger.info("Run %s finished in %.1fs", run_id, summary.wall_clock_seconds)
    return summary


def variant_config(cfg: ExperimentConfig, variant: str) -> ExperimentConfig:
    """``cfg`` switched to one point of the method/ablation lattice."""
    if variant not in VARIANTS:
        raise ExperimentError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
    return cfg.model_copy(update=VARIANTS[variant])


def run_comparison(
    cfg: ExperimentConfig,
    variants: Iterable[str] | None = None,
    seeds: Iterable[int] | None = None,
    out_dir: str | Path | None = None,
    settings: SimSettings | None = None,
    write_artifacts: bool = True,
) -> dict[str, list[RunSummary]]:
    """
    Run every variant for every seed and write seed-averaged final metrics.

    Returns:
        method label -> one RunSummary per seed.
    """
    settings = settings or SimSettings()
    variants = list(variants) if variants is not None else list(VARIANTS)
    seeds = list(seeds) if seeds is not None else list(cfg.seeds)
    out = Path(out_dir or settings.output_dir)

    results: dict[str, list[RunSummary]] = {}
    for variant in variants:
        vcfg = variant_config(cfg, variant)
        results[vcfg.method_label] = [
            run_experiment(vcfg, seed, out, settings, write_artifacts) for seed in seeds
        ]

    if write_artifacts:
        columns, rows = comparison_rows(results)
        write_metrics_csv(out / "comparison.csv", columns, rows)
        logger.info("Wrote %s", out / "comparison.csv")
    return results


def comparison_rows(results: dict[str, list[RunSummary]]) -> tuple[list[str], list[Row]]:
    """Seed-averaged final-round values of every numeric column, per method."""
    metric_names: list[str] = []
    for summaries in results.values():
        for col in summaries[0].columns:
            if col not in ("round", "method", "seed") and col not in metric_names:
                metric_names.append(col)

    rows: list[Row] = []
    for label, summaries in results.items():
        row: Row = {"method": label, "seeds": len(summaries)}
        for col in metric_names:
            values = [s.final.get(col) for s in summaries]
            values = [v for v in values if v is not None]
            row[col] = float(np.mean(values)) if values else None
        rows.append(row)
    return ["method", "seeds", *metric_names], rows
