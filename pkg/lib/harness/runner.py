import asyncio
from collections.abc import Callable
from typing import Any

from loguru import logger
from tqdm import tqdm

from lib.agent.controller import SECOND_EXECUTION_ERROR, RoleBackends, run_episode
from lib.agent.trace import EpisodeOutcome, EpisodeStatus, EpisodeTrace, TraceEvent
from lib.backends.base import ChatBackend
from lib.backends.scripted import ScriptedBackend
from lib.errors import ConfigError, KitchenLoopError
from lib.harness.suite import Suite
from models import AgentVariant, Budgets, FailureClass, TaskSpec, TrialResult

BackendFactory = Callable[[TaskSpec], ChatBackend]

_ERROR_EVENTS = (
    TraceEvent.PLAN,
    TraceEvent.PLAN_ERROR,
    TraceEvent.PLAN_DISCARD,
    TraceEvent.SKIP,
    TraceEvent.EXECUTE,
)


def _is_error(record_event: TraceEvent, data: dict[str, Any]) -> bool:
    if record_event == TraceEvent.PLAN:
        return bool(data.get("diagnostics"))
    if record_event == TraceEvent.EXECUTE:
        return data["feedback"]["status"] == "Err"
    return True


def classify_failure(outcome: EpisodeOutcome, trace: EpisodeTrace) -> FailureClass:
    """failure class from the last error-like event of the trace"""
    if outcome.status == EpisodeStatus.SUCCESS:
        return FailureClass.NONE
    if outcome.status == EpisodeStatus.INFRASTRUCTURE_FAILURE:
        return FailureClass.INFRASTRUCTURE

    start = trace.start
    variant = start.data.get("variant") if start is not None else None
    errors = [r for r in trace.events(*_ERROR_EVENTS) if _is_error(r.event, r.data)]
    if not errors:
        return FailureClass.BUDGET_EXHAUSTED

    last = errors[-1]
    if last.event in (TraceEvent.PLAN, TraceEvent.PLAN_ERROR):
        return FailureClass.INVALID_ACTIONS
    if last.event == TraceEvent.SKIP and last.data.get("category") == "wrong_planning":
        return FailureClass.MULTI_ROBOT
    if last.event == TraceEvent.EXECUTE:
        if last.data["feedback"].get("kind") == "ImmobileRobot":
            return FailureClass.MULTI_ROBOT
        if variant == AgentVariant.CLOSED_LOOP.value:
            # the critic approved an action that then failed
            return FailureClass.CRITIC_FAILURE
        if outcome.reason == SECOND_EXECUTION_ERROR:
            # the baseline stopped on this action, not on the step budget
            return FailureClass.INVALID_ACTIONS
    if last.event == TraceEvent.PLAN_DISCARD and variant == AgentVariant.CLOSED_LOOP.value:
        return FailureClass.CRITIC_FAILURE
    return FailureClass.BUDGET_EXHAUSTED


def _infrastructure_result(
    task: TaskSpec, variant: AgentVariant, seed: int, condition: str, message: str
) -> TrialResult:
    return TrialResult(
        task_id=task.id,
        family=task.family,
        variant=variant,
        seed=seed,
        condition=condition,
        success=False,
        score=0,
        max_score=task.max_score,
        steps_used=0,
        failure_class=FailureClass.INFRASTRUCTURE,
        error=message,
    )


async def run_trial(
    suite: Suite,
    task: TaskSpec,
    variant: AgentVariant,
    backend: ChatBackend,
    seed: int,
    *,
    budgets: Budgets | None = None,
    history_capacity: int = 32,
    allow_fallback: bool = True,
) -> tuple[TrialResult, EpisodeTrace]:
    """run one seeded trial; failures of any kind come back inside the result"""
    condition = task.condition_for(seed)
    try:
        world = suite.world_for(task, seed)
        backends = RoleBackends.from_backend(backend, allow_fallback=allow_fallback)
        outcome, trace = await run_episode(
            world, task, variant, backends, budgets, history_capacity=history_capacity
        )
    except KitchenLoopError as e:
        logger.error(f"Trial {task.id} [{variant.value}] seed {seed} could not run: {e.message}")
        result = _infrastructure_result(task, variant, seed, condition.label, e.message)
        return result, EpisodeTrace()
    except Exception as e:
        logger.exception(f"Trial {task.id} [{variant.value}] seed {seed} crashed")
        message = f"unexpected {type(e).__name__}: {e}"
        return _infrastructure_result(task, variant, seed, condition.label, message), EpisodeTrace()

    result = TrialResult(
        task_id=task.id,
        family=task.family,
        variant=variant,
        seed=seed,
        condition=condition.label,
        success=outcome.success,
        score=outcome.score,
        max_score=outcome.max_score,
        steps_used=outcome.steps_used,
        failure_class=classify_failure(outcome, trace),
        final_digest=outcome.final_digest,
        error=outcome.reason if outcome.status == EpisodeStatus.INFRASTRUCTURE_FAILURE else None,
    )
    return result, trace


def scripted_factory(suite: Suite) -> BackendFactory:
    """backend per task built from the task's rule file"""

    def build(task: TaskSpec) -> ChatBackend:
        path = suite.script_path(task)
        if path is None:
            raise ConfigError(f"task '{task.id}' has no script for the scripted backend")
        return ScriptedBackend.from_file(path)

    return build


async def run_suite(
    suite: Suite,
    variants: list[AgentVariant],
    factory: BackendFactory,
    *,
    base_seed: int = 0,
    workers: int = 4,
    budgets: Budgets | None = None,
    history_capacity: int = 32,
    show_progress: bool = False,
) -> list[tuple[TrialResult, EpisodeTrace]]:
    """every planned trial for every variant, at most `workers` at once, in plan order"""
    semaphore = asyncio.Semaphore(max(1, workers))
    backends: dict[str, ChatBackend] = {}
    for task in suite.tasks:
        backends[task.id] = factory(task)

    planned = [
        (variant, task, seed)
        for variant in variants
        for task, seed in suite.planned_trials(base_seed)
    ]
    progress = tqdm(total=len(planned), desc="trials", disable=not show_progress)

    async def bounded(
        variant: AgentVariant, task: TaskSpec, seed: int
    ) -> tuple[TrialResult, EpisodeTrace]:
        async with semaphore:
            outcome = await run_trial(
                suite,
                task,
                variant,
                backends[task.id],
                seed,
                budgets=budgets,
                history_capacity=history_capacity,
            )
        progress.update(1)
        return outcome

    logger.info(f"Running {len(planned)} trials of suite '{suite.name}' with {workers} workers")
    try:
        results = await asyncio.gather(*(bounded(v, t, s) for v, t, s in planned))
    finally:
        progress.close()

    successes = sum(1 for result, _ in results if result.success)
    logger.info(f"Suite '{suite.name}' finished: {successes}/{len(results)} trials succeeded")
    return list(results)
