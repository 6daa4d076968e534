from collections import Counter
from statistics import fmean

from lib.agent.critic import CriticCategory
from lib.agent.trace import EpisodeTrace, TraceEvent
from lib.errors import EmptyResultsError
from models import AgentVariant, FailureClass, MetricRow, Metrics, TrialResult

CRITIC_CATEGORIES = [c.value for c in CriticCategory if c != CriticCategory.NONE]
# failure reasons that the agent itself causes, tallied per event
FAILURE_REASONS = [
    FailureClass.INVALID_ACTIONS.value,
    FailureClass.CRITIC_FAILURE.value,
    FailureClass.MULTI_ROBOT.value,
]


def _row(variant: AgentVariant, family: str, results: list[TrialResult]) -> MetricRow:
    successes = sum(1 for r in results if r.success)
    return MetricRow(
        variant=variant,
        family=family,
        trials=len(results),
        successes=successes,
        success_rate=successes / len(results),
        average_score=fmean(r.score for r in results),
        max_score=max(r.max_score for r in results),
    )


def compute_metrics(results: list[TrialResult]) -> Metrics:
    """SR and AS per (variant, family), plus an 'overall' row per variant"""
    if not results:
        raise EmptyResultsError("no trial results to aggregate")

    rows = []
    variants = [v for v in AgentVariant if any(r.variant == v for r in results)]
    for variant in variants:
        mine = [r for r in results if r.variant == variant]
        families = sorted({r.family.value for r in mine})
        for family in families:
            rows.append(_row(variant, family, [r for r in mine if r.family.value == family]))
        rows.append(_row(variant, "overall", mine))
    return Metrics(rows=rows)


def classify_trace(trace: EpisodeTrace) -> tuple[dict[str, int], dict[str, int]]:
    """
    count critic rejections by category and agent-caused errors by failure reason

    invalid_actions counts unusable planner lines and unparseable plans, critic_failure
    counts actions the critic approved that then failed, multi_robot counts errors from
    asking a stationary robot to move.
    """
    critic = Counter({category: 0 for category in CRITIC_CATEGORIES})
    failures = Counter({reason: 0 for reason in FAILURE_REASONS})
    start = trace.start
    closed_loop = start is not None and start.data.get("variant") == AgentVariant.CLOSED_LOOP.value

    for record in trace.records:
        if record.event == TraceEvent.CRITIQUE and not record.data["verdict"]["valid"]:
            critic[record.data["verdict"]["category"]] += 1
        elif record.event == TraceEvent.PLAN:
            failures[FailureClass.INVALID_ACTIONS.value] += len(record.data.get("diagnostics", []))
        elif record.event == TraceEvent.PLAN_ERROR:
            failures[FailureClass.INVALID_ACTIONS.value] += 1
        elif record.event == TraceEvent.SKIP and record.data.get("category") == "wrong_planning":
            failures[FailureClass.MULTI_ROBOT.value] += 1
        elif record.event == TraceEvent.EXECUTE and record.data["feedback"]["status"] == "Err":
            if record.data["feedback"].get("kind") == "ImmobileRobot":
                failures[FailureClass.MULTI_ROBOT.value] += 1
            elif closed_loop:
                failures[FailureClass.CRITIC_FAILURE.value] += 1
    return dict(critic), dict(failures)


def tally_traces(traces: list[EpisodeTrace]) -> tuple[dict[str, int], dict[str, int]]:
    critic: Counter[str] = Counter({category: 0 for category in CRITIC_CATEGORIES})
    failures: Counter[str] = Counter({reason: 0 for reason in FAILURE_REASONS})
    for trace in traces:
        trace_critic, trace_failures = classify_trace(trace)
        critic.update(trace_critic)
        failures.update(trace_failures)
    return dict(critic), dict(failures)


def format_ratios(counts: dict[str, int]) -> dict[str, str]:
    """each count as a one-decimal percentage of the total"""
    total = sum(counts.values())
    return {
        name: f"{100 * count / total:.1f}%" if total else "0.0%" for name, count in counts.items()
    }


def render_ratio_table(title: str, counts: dict[str, int]) -> str:
    ratios = format_ratios(counts)
    lines = [f"| {title} | Count | Ratio |", "|---|---:|---:|"]
    lines.extend(f"| {name} | {counts[name]} | {ratios[name]} |" for name in counts)
    return "\n".join(lines)
