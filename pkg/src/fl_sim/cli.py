"""
Command-line entry point.

Subcommands:
  run                 one seeded experiment, writes CSV + JSON artifacts
  compare             the method/ablation lattice over several seeds
  project             one-shot halfspace projection of gk against g0
  cka                 linear CKA of two feature matrices
  estimate-constants  plug-in convergence constants at initialisation

Run as:  python -m src.fl_sim <subcommand> ...
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from src.convergence_lab import StageNetObjective, estimate_constants, eta_bound_diagnostic
from src.fl_sim.config import SimSettings, load_experiment_config
from src.fl_sim.federation import build_federation
from src.fl_sim.runner import VARIANTS, comparison_rows, run_comparison, run_experiment
from src.fl_sim.server import init_server_state
from src.grad_surgery import GradientView, SurgeryConfig, mix_cross_layer
from src.metrics import linear_cka
from src.shared.exceptions import ConfigError, InCoError
from src.shared.logging import set_log_level, setup_logging
from src.shared.models import LayerKey
from src.tensor_core import Tensor, as_tensor

logger = setup_logging("fl_sim.cli", level="INFO")

# Options whose values may be negative numbers.
VALUE_OPTIONS = frozenset({"--g0", "--gk", "--features-a", "--features-b"})


# ─── Input parsing ─────────────────────────────────────────


def _read_matrix(text: str) -> Tensor:
    """A CSV file path, or inline values: ``1,2,3`` or ``1,2;3,4`` for rows."""
    path = Path(text)
    try:
        if path.is_file():
            return as_tensor(np.atleast_1d(np.loadtxt(path, delimiter=",", dtype=np.float64)))
        rows = [[float(v) for v in row.split(",") if v.strip()] for row in text.split(";")]
        return as_tensor(rows[0] if len(rows) == 1 else rows)
    except ValueError as e:
        raise ConfigError(f"cannot parse numeric input {text!r}: {e}") from e


def _read_features(text: str) -> Tensor:
    """Samples x features; a single column of values is n samples of one feature."""
    values = _read_matrix(text)
    return values.reshape(-1, 1) if values.ndim == 1 else values


def _attach_values(argv: list[str]) -> list[str]:
    """Rewrite ``--gk -1,2`` as ``--gk=-1,2`` so values may start with a minus sign."""
    out: list[str] = []
    args = iter(argv)
    for arg in args:
        value = next(args, None) if arg in VALUE_OPTIONS else None
        if value is None:
            out.append(arg)
        elif value.startswith("--"):
            out += [arg, value]
        else:
            out.append(f"{arg}={value}")
    return out


def _as_list(values: np.ndarray) -> list:
    return np.asarray(values).tolist()


# ─── Subcommands ───────────────────────────────────────────


def _cmd_run(args: argparse.Namespace, settings: SimSettings) -> int:
    cfg = load_experiment_config(args.config)
    summary = run_experiment(cfg, seed=args.seed, out_dir=args.out, settings=settings)
    print(json.dumps(summary.to_json(), indent=2, default=str))
    return 0


def _cmd_compare(args: argparse.Namespace, settings: SimSettings) -> int:
    cfg = load_experiment_config(args.config)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else None
    variants = args.variants.split(",") if args.variants else None
    results = run_comparison(cfg, variants, seeds, out_dir=args.out, settings=settings)
    _, rows = comparison_rows(results)
    print(json.dumps(rows, indent=2, default=str))
    return 0


def _cmd_project(args: argparse.Namespace, settings: SimSettings) -> int:
    g0 = _read_matrix(args.g0)
    gk = _read_matrix(args.gk)
    cfg = SurgeryConfig(
        normalize=args.normalize, optimize=True, always_subtract=not args.strict_branch,
    )
    result = mix_cross_layer(
        GradientView(LayerKey.block(0, 0), g0), GradientView(LayerKey.block(0, 1), gk), cfg,
    )
    print(json.dumps({
        "theta": result.theta,
        "alpha": result.alpha,
        "beta": result.beta,
        "branch": result.branch.value if result.branch else None,
        "g_opt": _as_list(result.update),
    }, indent=2))
    return 0


def _cmd_cka(args: argparse.Namespace, settings: SimSettings) -> int:
    a = _read_features(args.features_a)
    b = _read_features(args.features_b)
    print(json.dumps({"cka": linear_cka(a, b)}, indent=2))
    return 0


def _cmd_estimate(args: argparse.Namespace, settings: SimSettings) -> int:
    cfg = load_experiment_config(args.config)
    seed = cfg.seeds[0] if args.seed is None else args.seed
    fed = build_federation(cfg, seed)
    state = init_server_state(cfg, seed)
    shard = fed.pooled_holdout
    tcfg = cfg.client_trainer()

    objective = StageNetObjective(state.global_weights, shard.features, shard.labels)
    constants = estimate_constants(
        objective, settings.diagnostic_probes, seed, batch_size=tcfg.batch_size,
    )
    bound = eta_bound_diagnostic(
        state.global_weights, shard, tcfg, settings.diagnostic_probes, seed,
    )
    print(json.dumps({
        "estimate": constants.model_dump(include={"L", "sigma2", "rho", "gamma"}),
        "eta_bound_estimate": bound.value,
        "eta_admissible": bound.admissible,
        "learning_rate": tcfg.learning_rate,
        "samples": len(shard),
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.fl_sim", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None)
    run.set_defaults(handler=_cmd_run)

    compare = sub.add_parser("compare", help="Run the method/ablation lattice")
    compare.add_argument("--config", required=True)
    compare.add_argument("--seeds", default=None, help="Comma-separated seeds")
    compare.add_argument(
        "--variants", default=None, help=f"Comma-separated subset of {','.join(VARIANTS)}",
    )
    compare.add_argument("--out", default=None)
    compare.set_defaults(handler=_cmd_compare)

    project = sub.add_parser("project", help="Project gk onto the halfspace of g0")
    project.add_argument("--g0", required=True)
    project.add_argument("--gk", required=True)
    project.add_argument("--normalize", action="store_true")
    project.add_argument("--strict-branch", action="store_true")
    project.set_defaults(handler=_cmd_project)

    cka = sub.add_parser("cka", help="Linear CKA of two feature matrices")
    cka.add_argument("--features-a", required=True)
    cka.add_argument("--features-b", required=True)
    cka.set_defaults(handler=_cmd_cka)

    estimate = sub.add_parser("estimate-constants", help="Estimate convergence constants")
    estimate.add_argument("--config", required=True)
    estimate.add_argument("--seed", type=int, default=None)
    estimate.set_defaults(handler=_cmd_estimate)
    return parser


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_attach_values(argv))
    settings = SimSettings()
    set_log_level(settings.log_level)
    try:
        return args.handler(args, settings)
    except InCoError as e:
        logger.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
