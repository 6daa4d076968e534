import json
from collections import Counter
from pathlib import Path

from loguru import logger

from lib.agent.trace import EpisodeTrace
from lib.harness.metrics import render_ratio_table
from models import AgentVariant, FailureClass, Metrics, TrialResult

_VARIANT_ORDER = {variant: index for index, variant in enumerate(AgentVariant)}
BUDGET_EXHAUSTED_NOTE = (
    "budget_exhausted: the step budget ran out, or a baseline plan ended before the goal "
    "without an execution error."
)


def _sort_key(result: TrialResult) -> tuple[str, int, int]:
    return (result.task_id, _VARIANT_ORDER[result.variant], result.seed)


def trace_name(result: TrialResult) -> str:
    return f"trace-{result.task_id}-{result.variant.value}-{result.seed}.jsonl"


def render_summary(
    metrics: Metrics,
    critic_tallies: dict[str, int],
    failure_tallies: dict[str, int],
    results: list[TrialResult] | None = None,
) -> str:
    lines = ["# Trial summary", "", "## Success rate and average score", ""]
    lines.append("| Variant | Family | Trials | SR | AS | Max |")
    lines.append("|---|---|---:|---:|---:|---:|")
    for row in metrics.rows:
        lines.append(
            f"| {row.variant.value} | {row.family} | {row.trials} | "
            f"{row.successes}/{row.trials} ({100 * row.success_rate:.1f}%) | "
            f"{row.average_score:.2f} | {row.max_score} |"
        )
    lines.extend(["", "## Critic rejections", "", render_ratio_table("Reason", critic_tallies)])
    lines.extend(["", "## Agent failures", "", render_ratio_table("Reason", failure_tallies)])
    if results is not None:
        failed = Counter(r.failure_class for r in results if not r.success)
        counts = {c.value: failed[c] for c in FailureClass if c != FailureClass.NONE}
        lines.extend(["", "## Failed trials", "", render_ratio_table("Class", counts), ""])
        lines.append(BUDGET_EXHAUSTED_NOTE)
    lines.append("")
    return "\n".join(lines)


def emit_report(
    results: list[TrialResult],
    metrics: Metrics,
    critic_tallies: dict[str, int],
    failure_tallies: dict[str, int],
    out_dir: str | Path,
    traces: dict[str, EpisodeTrace] | None = None,
) -> list[Path]:
    """
    write trials.jsonl, summary.md and one trace file per trial

    output contains no timestamps, so a scripted rerun is byte-identical.
    `traces` maps trace_name(result) to its trace.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    trials_path = out / "trials.jsonl"
    ordered = sorted(results, key=_sort_key)
    with open(trials_path, "w", encoding="utf-8") as f:
        for result in ordered:
            f.write(json.dumps(result.model_dump(mode="json"), sort_keys=True) + "\n")

    summary_path = out / "summary.md"
    summary_path.write_text(
        render_summary(metrics, critic_tallies, failure_tallies, ordered), encoding="utf-8"
    )

    written = [trials_path, summary_path]
    for name, trace in sorted((traces or {}).items()):
        path = out / name
        path.write_text(trace.to_jsonl(), encoding="utf-8")
        written.append(path)

    logger.info(f"Wrote {len(ordered)} trial results and {len(written) - 2} traces to {out}")
    return written
