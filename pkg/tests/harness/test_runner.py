"""
trial runner tests: failure classification and the scripted default suite
"""

import time

import pytest
import pytest_asyncio

from lib.agent.controller import SECOND_EXECUTION_ERROR
from lib.agent.trace import EpisodeOutcome, EpisodeStatus, EpisodeTrace, TraceEvent
from lib.backends.base import ChatBackend
from lib.backends.scripted import new_scripted
from lib.errors import ConfigError
from lib.harness.metrics import compute_metrics
from lib.harness.runner import classify_failure, run_suite, run_trial, scripted_factory
from models import AgentVariant, Budgets, FailureClass, TaskFamily

ALL_VARIANTS = list(AgentVariant)


def outcome(status=EpisodeStatus.FAILURE, reason=""):
    return EpisodeOutcome(status=status, score=0, max_score=2, steps_used=5, reason=reason)


def trace_of(variant, *events):
    trace = EpisodeTrace()
    trace.add(0, TraceEvent.EPISODE_START, variant=variant)
    for event, data in events:
        trace.add(1, event, **data)
    return trace


def err(kind):
    return (TraceEvent.EXECUTE, {"action": "x", "feedback": {"status": "Err", "kind": kind}})


OK = (TraceEvent.EXECUTE, {"action": "x", "feedback": {"status": "Ok", "kind": None}})


class BrokenBackend(ChatBackend):
    name = "broken"

    async def complete(self, request):
        raise RuntimeError("connection pool exploded")


class TestClassifyFailure:
    def test_success(self):
        assert classify_failure(outcome(EpisodeStatus.SUCCESS), trace_of("clea")) == (
            FailureClass.NONE
        )

    def test_infrastructure(self):
        status = EpisodeStatus.INFRASTRUCTURE_FAILURE
        assert classify_failure(outcome(status), trace_of("clea")) == (
            FailureClass.INFRASTRUCTURE
        )

    @pytest.mark.parametrize(
        "variant,events,expected",
        [
            ("clea", [], FailureClass.BUDGET_EXHAUSTED),
            ("clea", [OK, OK], FailureClass.BUDGET_EXHAUSTED),
            ("clea", [(TraceEvent.PLAN_ERROR, {})], FailureClass.INVALID_ACTIONS),
            (
                "no_critic",
                [err("HandFull"), (TraceEvent.PLAN, {"diagnostics": [{"kind": "BadToken"}]})],
                FailureClass.INVALID_ACTIONS,
            ),
            (
                "clea",
                [(TraceEvent.SKIP, {"category": "wrong_planning"})],
                FailureClass.MULTI_ROBOT,
            ),
            ("no_critic", [err("ImmobileRobot")], FailureClass.MULTI_ROBOT),
            ("clea", [err("ContainerClosed"), OK], FailureClass.CRITIC_FAILURE),
            ("no_critic", [err("ContainerClosed")], FailureClass.BUDGET_EXHAUSTED),
            (
                "clea",
                [(TraceEvent.PLAN_DISCARD, {"subgoal": "s"})],
                FailureClass.CRITIC_FAILURE,
            ),
        ],
    )
    def test_last_error_decides(self, variant, events, expected):
        assert classify_failure(outcome(), trace_of(variant, *events)) == expected

    @pytest.mark.parametrize(
        "reason,kind,expected",
        [
            (SECOND_EXECUTION_ERROR, "ContainerClosed", FailureClass.INVALID_ACTIONS),
            (SECOND_EXECUTION_ERROR, "ImmobileRobot", FailureClass.MULTI_ROBOT),
            ("step budget exhausted", "ContainerClosed", FailureClass.BUDGET_EXHAUSTED),
        ],
    )
    def test_baseline_stop_rule(self, reason, kind, expected):
        trace = trace_of("open_loop_baseline", err("HandEmpty"), err(kind))
        assert classify_failure(outcome(reason=reason), trace) == expected


class TestRunTrial:
    @pytest.mark.asyncio
    async def test_unexpected_exception_is_infrastructure(self, default_suite):
        result, trace = await run_trial(
            default_suite, default_suite.tasks[0], AgentVariant.NO_CRITIC, BrokenBackend(), seed=0
        )
        assert result.failure_class == FailureClass.INFRASTRUCTURE
        assert not result.success and result.steps_used == 0
        assert result.error == "unexpected RuntimeError: connection pool exploded"
        assert trace.records == []

    @pytest.mark.asyncio
    async def test_backend_without_planner_is_infrastructure(self, default_suite):
        task = default_suite.tasks[0]
        backend = new_scripted([{"role": "critic", "response": "VERDICT: true\nFEEDBACK: ok"}])
        result, trace = await run_trial(
            default_suite, task, AgentVariant.CLOSED_LOOP, backend, seed=0
        )
        assert result.failure_class == FailureClass.INFRASTRUCTURE
        assert result.steps_used == 0 and not result.success
        assert result.error
        assert trace.records == []

    @pytest.mark.asyncio
    async def test_condition_label_recorded(self, default_suite):
        task = next(t for t in default_suite.tasks if t.id == "search")
        backend = scripted_factory(default_suite)(task)
        result, _ = await run_trial(default_suite, task, AgentVariant.CLOSED_LOOP, backend, 1)
        assert result.condition == "default"
        assert result.success
        assert result.final_digest

    def test_scripted_factory_needs_a_script(self, default_suite):
        task = default_suite.tasks[0].model_copy(update={"script": None})
        with pytest.raises(ConfigError):
            scripted_factory(default_suite)(task)


class TestDefaultSuiteOrdering:
    @pytest.mark.asyncio
    async def test_variant_ordering(self, default_suite):
        started = time.monotonic()
        outcomes = await run_suite(
            default_suite, ALL_VARIANTS, scripted_factory(default_suite), workers=4
        )
        elapsed = time.monotonic() - started
        assert elapsed < 60

        results = [r for r, _ in outcomes]
        assert len(results) == 36
        metrics = compute_metrics(results)
        closed = metrics.get(AgentVariant.CLOSED_LOOP)
        ablation = metrics.get(AgentVariant.NO_CRITIC)
        baseline = metrics.get(AgentVariant.OPEN_LOOP_BASELINE)

        assert closed.successes == 12
        assert ablation.success_rate < closed.success_rate
        assert baseline.success_rate <= ablation.success_rate
        assert closed.average_score > ablation.average_score >= baseline.average_score

        integration = metrics.get(AgentVariant.OPEN_LOOP_BASELINE, TaskFamily.INTEGRATION.value)
        assert integration.successes == 0

        for result, trace in outcomes:
            if result.variant == AgentVariant.CLOSED_LOOP:
                assert result.failure_class == FailureClass.NONE
                assert trace.records[-1].event == TraceEvent.OUTCOME

    @pytest.mark.asyncio
    async def test_results_in_plan_order(self, default_suite):
        outcomes = await run_suite(
            default_suite, [AgentVariant.NO_CRITIC], scripted_factory(default_suite), workers=3
        )
        keys = [(r.task_id, r.seed) for r, _ in outcomes]
        assert keys == [(t.id, s) for t, s in default_suite.planned_trials()]


# position of each event inside one step; a step never goes backwards
STEP_ORDER = {
    TraceEvent.PERTURBATION: 0,
    TraceEvent.OBSERVE: 1,
    TraceEvent.DESCRIBE: 2,
    TraceEvent.SUMMARIZE: 3,
    TraceEvent.PLAN: 4,
    TraceEvent.PLAN_ERROR: 4,
    TraceEvent.CRITIQUE: 5,
    TraceEvent.SKIP: 6,
    TraceEvent.EXECUTE: 6,
    TraceEvent.PLAN_DISCARD: 7,
    TraceEvent.MILESTONE: 8,
}


def steps_of(trace):
    steps: dict[int, list[TraceEvent]] = {}
    for record in trace.records:
        if record.event in STEP_ORDER:
            steps.setdefault(record.step, []).append(record.event)
    return steps


def failed_executions(trace):
    return [r for r in trace.events(TraceEvent.EXECUTE) if r.data["feedback"]["status"] == "Err"]


class TestDefaultSuiteTraces:
    @pytest_asyncio.fixture
    async def outcomes(self, default_suite):
        return await run_suite(
            default_suite, ALL_VARIANTS, scripted_factory(default_suite), workers=4
        )

    @pytest.mark.asyncio
    async def test_step_order_and_budget(self, outcomes):
        budgets = Budgets()
        for result, trace in outcomes:
            for step, events in steps_of(trace).items():
                assert step < budgets.max_steps
                ranks = [STEP_ORDER[e] for e in events]
                assert ranks == sorted(ranks), (result.task_id, result.seed, step, events)
                actions = [e for e in events if e in (TraceEvent.EXECUTE, TraceEvent.SKIP)]
                assert len(actions) <= 1
                if result.variant != AgentVariant.OPEN_LOOP_BASELINE:
                    assert events.count(TraceEvent.OBSERVE) == 1
                    assert events.count(TraceEvent.SUMMARIZE) == 1
            assert trace.records[-1].event == TraceEvent.OUTCOME
            assert trace.records[-1].step == result.steps_used <= budgets.max_steps

    @pytest.mark.asyncio
    async def test_rejections_end_in_discard(self, outcomes):
        limit = Budgets().max_rejections
        for result, trace in outcomes:
            streak = 0
            for record in trace.records:
                if record.event == TraceEvent.SKIP:
                    streak += 1
                    assert streak <= limit
                elif record.event == TraceEvent.PLAN_DISCARD:
                    assert streak == limit
                    streak = 0
                elif record.event == TraceEvent.EXECUTE:
                    streak = 0

    @pytest.mark.asyncio
    async def test_variant_trace_shapes(self, outcomes):
        for result, trace in outcomes:
            if result.variant == AgentVariant.OPEN_LOOP_BASELINE:
                assert len(trace.events(TraceEvent.PLAN, TraceEvent.PLAN_ERROR)) <= 2
                assert not trace.events(TraceEvent.SUMMARIZE)
                assert not trace.events(TraceEvent.CRITIQUE, TraceEvent.SKIP)
            elif result.variant == AgentVariant.NO_CRITIC:
                assert not trace.events(TraceEvent.CRITIQUE, TraceEvent.SKIP)
            else:
                assert len(trace.events(TraceEvent.CRITIQUE)) == len(
                    trace.events(TraceEvent.EXECUTE, TraceEvent.SKIP)
                )

    @pytest.mark.asyncio
    async def test_no_critic_fails_on_precondition_faults(self, outcomes):
        succeeded = set()
        for result, trace in outcomes:
            if result.variant != AgentVariant.NO_CRITIC:
                continue
            if failed_executions(trace):
                assert not result.success, (result.task_id, result.seed)
            if result.success:
                succeeded.add((result.task_id, result.seed))
        assert succeeded == {("search", 0), ("manipulation", 0)}

    @pytest.mark.asyncio
    async def test_baseline_stop_is_not_budget_exhaustion(self, outcomes):
        stopped = [
            (result, trace)
            for result, trace in outcomes
            if result.variant == AgentVariant.OPEN_LOOP_BASELINE
            and trace.outcome.reason == SECOND_EXECUTION_ERROR
        ]
        assert stopped
        for result, _ in stopped:
            assert result.steps_used < Budgets().max_steps
            assert result.failure_class in (FailureClass.INVALID_ACTIONS, FailureClass.MULTI_ROBOT)
