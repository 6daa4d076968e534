"""
kitchenloop command line

    kitchenloop run --variant clea --variant baseline --out runs/demo
    kitchenloop replay --trace runs/demo/trace-search-clea-0.jsonl
    kitchenloop validate --world lib/world/configs/kitchen.json
"""

import argparse
import asyncio
import json
import sys
from pathlib import Path

from loguru import logger
from pydantic import ValidationError

from config import settings
from lib.backends.remote import endpoint_from_settings, new_remote
from lib.errors import ConfigError, KitchenLoopError
from lib.harness import (
    DEFAULT_SUITE,
    compute_metrics,
    emit_report,
    load_suite,
    replay_file,
    run_suite,
    scripted_factory,
    tally_traces,
    trace_name,
)
from lib.harness.runner import BackendFactory
from lib.world.simulator import load_world_file
from models import AgentVariant, Budgets, EndpointConfig

# "closed-loop" is kept as an alias of "clea"
VARIANTS = {
    "clea": AgentVariant.CLOSED_LOOP,
    "closed-loop": AgentVariant.CLOSED_LOOP,
    "no-critic": AgentVariant.NO_CRITIC,
    "baseline": AgentVariant.OPEN_LOOP_BASELINE,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kitchenloop", description="Run and inspect kitchen agent trials"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a task suite and write a report")
    run.add_argument("--suite", default=str(DEFAULT_SUITE), help="suite JSON file")
    run.add_argument(
        "--variant",
        action="append",
        choices=sorted(VARIANTS),
        help="agent variant, repeatable (default: all three)",
    )
    run.add_argument("--backend", choices=["scripted", "remote"], default="scripted")
    run.add_argument("--endpoint", help="chat-completions base URL for the remote backend")
    run.add_argument("--model", help="model name for the remote backend")
    run.add_argument("--config", help="endpoint config JSON (base_url, model, api_key_env, ...)")
    run.add_argument("--seed", type=int, default=0, help="first trial seed")
    run.add_argument("--workers", type=int, default=settings.WORKERS)
    run.add_argument("--out", default=settings.OUTPUT_DIR, help="report directory")
    run.add_argument("--max-steps", type=int, default=settings.MAX_STEPS)

    replay = sub.add_parser("replay", help="re-execute a stored trace and compare digests")
    replay.add_argument("--trace", required=True)

    validate = sub.add_parser("validate", help="check a world config file")
    validate.add_argument("--world", required=True)
    return parser


def load_endpoint(args: argparse.Namespace) -> EndpointConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
            config = EndpointConfig.model_validate(data)
        except (OSError, json.JSONDecodeError, ValidationError) as e:
            raise ConfigError(f"invalid endpoint config {args.config}: {e}")
        updates = {"base_url": args.endpoint, "model": args.model}
        return config.model_copy(update={k: v for k, v in updates.items() if v})
    return endpoint_from_settings(args.endpoint, args.model)


async def run_command(args: argparse.Namespace) -> int:
    suite = load_suite(args.suite)
    out_dir = settings.ensure_output_dir(args.out)
    variants = list(dict.fromkeys(VARIANTS[name] for name in args.variant or VARIANTS))
    budgets = Budgets(
        max_steps=args.max_steps,
        max_rejections=settings.MAX_REJECTIONS,
        max_plan_retries=settings.MAX_PLAN_RETRIES,
    )

    factory: BackendFactory
    if args.backend == "remote":
        remote = new_remote(load_endpoint(args))
        factory = lambda task: remote  # noqa: E731
    else:
        factory = scripted_factory(suite)

    outcomes = await run_suite(
        suite,
        variants,
        factory,
        base_seed=args.seed,
        workers=args.workers,
        budgets=budgets,
        history_capacity=settings.HISTORY_CAPACITY,
        show_progress=True,
    )
    results = [result for result, _ in outcomes]
    traces = {trace_name(result): trace for result, trace in outcomes}
    metrics = compute_metrics(results)
    critic_tallies, failure_tallies = tally_traces(list(traces.values()))
    emit_report(results, metrics, critic_tallies, failure_tallies, out_dir, traces)

    for row in metrics.rows:
        if row.family == "overall":
            print(
                f"{row.variant.value:20} SR {row.successes}/{row.trials} "
                f"AS {row.average_score:.2f}"
            )
    return 0


def replay_command(args: argparse.Namespace) -> int:
    result = replay_file(args.trace)
    if result.matches:
        print(f"replay ok: {result.steps} steps, digest {result.actual}")
        return 0
    print(f"replay mismatch: expected {result.expected}, got {result.actual}")
    return 1


def validate_command(args: argparse.Namespace) -> int:
    config = load_world_file(args.world)
    print(
        f"world '{config.name}' ok: {len(config.robots)} robots, "
        f"{len(config.objects)} objects, {len(config.places)} places"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return asyncio.run(run_command(args))
        if args.command == "replay":
            return replay_command(args)
        return validate_command(args)
    except KitchenLoopError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return 1
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
