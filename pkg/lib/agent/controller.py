"""
Episode controller for the closed-loop agent, its no-critic ablation and the
open-loop baseline.
"""

import logging
from dataclasses import dataclass

from lib.agent.critic import CriticVerdict, critique
from lib.agent.planner import Plan, PlanningMode, plan
from lib.agent.trace import EpisodeOutcome, EpisodeStatus, EpisodeTrace, TraceEvent
from lib.backends.base import ChatBackend, Role
from lib.errors import BackendError, ConfigError, PlanError
from lib.memory import SKIPPED, Belief, EntryFeedback, HistoryEntry, new_buffer, summarize
from lib.observer import describe, join_observations
from lib.skills import Action, render_action, skill_catalog
from lib.world.models import RawObservation, WorldConfig, WorldState
from lib.world.predicates import holds
from lib.world.simulator import (
    apply_perturbations,
    load_world,
    observe_all,
    state_digest,
    step,
)
from models import AgentVariant, Budgets, TaskSpec

logger = logging.getLogger(__name__)

SECOND_EXECUTION_ERROR = "second execution error"


@dataclass
class RoleBackends:
    """per-role backends; None sends that role down its deterministic path"""

    planner: ChatBackend
    observer: ChatBackend | None = None
    summarizer: ChatBackend | None = None
    critic: ChatBackend | None = None
    allow_fallback: bool = True

    @classmethod
    def from_backend(cls, backend: ChatBackend, allow_fallback: bool = True) -> "RoleBackends":
        session = backend.session()
        if not session.serves(Role.PLANNER):
            raise ConfigError(f"backend '{session.name}' cannot serve the planner role")

        def pick(role: Role) -> ChatBackend | None:
            return session if session.serves(role) else None

        return cls(
            planner=session,
            observer=pick(Role.OBSERVER),
            summarizer=pick(Role.SUMMARIZER),
            critic=pick(Role.CRITIC),
            allow_fallback=allow_fallback,
        )


class MilestoneTracker:
    """milestones latch once reached; the goal also needs every goal predicate to hold now"""

    def __init__(self, task: TaskSpec, config: WorldConfig):
        self.task = task
        self.config = config
        self.latched = [False] * len(task.milestones)

    @property
    def score(self) -> int:
        return sum(self.latched)

    def update(self, state: WorldState) -> list[str]:
        reached = []
        for index, milestone in enumerate(self.task.milestones):
            if not self.latched[index] and holds(milestone, self.config, state):
                self.latched[index] = True
                reached.append(milestone.describe())
        return reached

    def goal_reached(self, state: WorldState) -> bool:
        return all(self.latched) and all(holds(p, self.config, state) for p in self.task.goal)


class _Episode:
    def __init__(
        self,
        config: WorldConfig,
        task: TaskSpec,
        variant: AgentVariant,
        backends: RoleBackends,
        budgets: Budgets,
        history_capacity: int,
    ):
        self.config = config
        self.task = task
        self.variant = variant
        self.backends = backends
        self.budgets = budgets
        self.state = load_world(config)
        self.buffer = new_buffer(history_capacity)
        self.milestones = MilestoneTracker(task, config)
        self.trace = EpisodeTrace()
        self.robots = [
            f"{r.token} ({'mobile' if r.mobile else 'stationary'}, holds up to {r.hand_capacity})"
            for r in config.robots
        ]
        self.steps_used = 0
        self.tag = f"{task.id}/{variant.value}"

    async def run(self) -> tuple[EpisodeOutcome, EpisodeTrace]:
        self.trace.add(
            0,
            TraceEvent.EPISODE_START,
            task=self.task.id,
            instruction=self.task.instruction,
            variant=self.variant.value,
            world=self.config.model_dump(mode="json"),
            digest=state_digest(self.state),
        )
        logger.info(f"[{self.tag}] episode started")
        try:
            if self.variant == AgentVariant.OPEN_LOOP_BASELINE:
                status, reason = await self._run_open_loop()
            else:
                status, reason = await self._run_closed_loop()
        except BackendError as e:
            logger.error(f"[{self.tag}] episode aborted: {e.message}")
            status, reason = EpisodeStatus.INFRASTRUCTURE_FAILURE, e.message

        outcome = EpisodeOutcome(
            status=status,
            score=self.milestones.score,
            max_score=self.task.max_score,
            steps_used=self.steps_used,
            reason=reason,
            final_digest=state_digest(self.state),
        )
        self.trace.add(self.steps_used, TraceEvent.OUTCOME, outcome=outcome.model_dump(mode="json"))
        return outcome, self.trace

    def _perturb(self, index: int) -> None:
        events = [e for e in self.config.perturbations if e.step == index]
        if events:
            self.state = apply_perturbations(self.config, self.state, events, index)
            self.trace.add(
                index,
                TraceEvent.PERTURBATION,
                events=[e.model_dump(mode="json") for e in events],
                digest=state_digest(self.state),
            )

    async def _observe(self, index: int) -> tuple[dict[str, RawObservation], str]:
        observations = observe_all(self.config, self.state)
        self.trace.add(
            index,
            TraceEvent.OBSERVE,
            observations={r: raw.model_dump(mode="json") for r, raw in observations.items()},
        )
        texts = [
            await describe(
                self.backends.observer,
                raw,
                self.task.instruction,
                fallback=self.backends.allow_fallback,
            )
            for raw in observations.values()
        ]
        text = join_observations(texts)
        self.trace.add(index, TraceEvent.DESCRIBE, text=text)
        return observations, text

    def _execute(self, index: int, action: Action) -> EntryFeedback:
        action_text = render_action(action)
        self.state, feedback = step(self.config, self.state, action)
        self.trace.add(
            index,
            TraceEvent.EXECUTE,
            action=action_text,
            feedback=feedback.model_dump(mode="json"),
            digest=state_digest(self.state),
        )
        return EntryFeedback.from_world(feedback)

    def _check_milestones(self, index: int) -> bool:
        reached = self.milestones.update(self.state)
        if reached:
            self.trace.add(
                index, TraceEvent.MILESTONE, reached=reached, score=self.milestones.score
            )
        return self.milestones.goal_reached(self.state)

    async def _plan(
        self,
        index: int,
        observation: str,
        mode: PlanningMode,
        belief: Belief | None = None,
        critic: CriticVerdict | None = None,
        last_feedback: str | None = None,
        abandoned: str | None = None,
    ) -> Plan | None:
        try:
            result = await plan(
                self.backends.planner,
                belief,
                observation,
                skill_catalog(),
                self.task.instruction,
                step=index,
                mode=mode,
                robots=self.robots,
                critic=critic,
                last_feedback=last_feedback,
                abandoned=abandoned,
                max_retries=self.budgets.max_plan_retries,
            )
        except PlanError as e:
            self.trace.add(index, TraceEvent.PLAN_ERROR, message=e.message, **e.detail)
            return None
        self.trace.add(
            index,
            TraceEvent.PLAN,
            mode=mode.value,
            subgoal=result.subgoal,
            actions=[render_action(a) for a in result.actions],
            diagnostics=[d.model_dump(mode="json") for d in result.diagnostics],
        )
        return result

    async def _run_closed_loop(self) -> tuple[EpisodeStatus, str]:
        current: Plan | None = None
        critic_note: CriticVerdict | None = None
        last_feedback: str | None = None
        abandoned: str | None = None
        rejections = 0
        use_critic = self.variant == AgentVariant.CLOSED_LOOP

        for index in range(self.budgets.max_steps):
            self.steps_used = index + 1
            self._perturb(index)
            observations, text = await self._observe(index)
            belief = await summarize(
                self.backends.summarizer,
                self.buffer.entries,
                self.task.instruction,
                fallback=self.backends.allow_fallback,
            )
            self.trace.add(index, TraceEvent.SUMMARIZE, belief=belief.model_dump(mode="json"))

            if current is None:
                current = await self._plan(
                    index,
                    text,
                    PlanningMode.CLOSED_LOOP,
                    belief=belief,
                    critic=critic_note,
                    last_feedback=last_feedback,
                    abandoned=abandoned,
                )
                critic_note = None
                abandoned = None
                if current is None:
                    last_feedback = "the previous plan could not be parsed"
                    if self._check_milestones(index):
                        return EpisodeStatus.SUCCESS, "goal reached"
                    continue

            action = current.actions.pop(0)
            action_text = render_action(action)

            if use_critic:
                verdict = await critique(
                    self.backends.critic,
                    action,
                    belief,
                    observations,
                    config=self.config,
                    history=self.buffer.entries,
                    fallback=self.backends.allow_fallback,
                )
                self.trace.add(
                    index,
                    TraceEvent.CRITIQUE,
                    action=action_text,
                    verdict=verdict.model_dump(mode="json"),
                )
                if not verdict.valid:
                    rejections += 1
                    logger.info(
                        f"[{self.tag}] critic rejected {action_text} "
                        f"({verdict.category.value}): {verdict.feedback}"
                    )
                    self.buffer.push(
                        HistoryEntry(
                            step=index,
                            observation=text,
                            action=SKIPPED,
                            feedback=EntryFeedback(
                                status="Err",
                                kind=f"critic_{verdict.category.value}",
                                message=f"critic rejected {action_text}: {verdict.feedback}",
                            ),
                        )
                    )
                    self.trace.add(
                        index,
                        TraceEvent.SKIP,
                        action=action_text,
                        category=verdict.category.value,
                        digest=state_digest(self.state),
                    )
                    critic_note = verdict
                    if rejections >= self.budgets.max_rejections:
                        logger.warning(
                            f"[{self.tag}] abandoning sub-goal '{current.subgoal}' "
                            f"after {rejections} rejections"
                        )
                        self.trace.add(
                            index,
                            TraceEvent.PLAN_DISCARD,
                            subgoal=current.subgoal,
                            rejections=rejections,
                        )
                        abandoned = current.subgoal
                        critic_note = None
                        rejections = 0
                    current = None
                    if self._check_milestones(index):
                        return EpisodeStatus.SUCCESS, "goal reached"
                    continue

            rejections = 0
            feedback = self._execute(index, action)
            self.buffer.push(
                HistoryEntry(step=index, observation=text, action=action_text, feedback=feedback)
            )
            if feedback.ok:
                last_feedback = None
                if not current.actions:
                    current = None
            else:
                last_feedback = f"{action_text} failed: {feedback.kind}: {feedback.message}"
                current = None

            if self._check_milestones(index):
                return EpisodeStatus.SUCCESS, "goal reached"

        return EpisodeStatus.FAILURE, "step budget exhausted"

    async def _run_open_loop(self) -> tuple[EpisodeStatus, str]:
        current: Plan | None = None
        replans_left = 1
        planned = False
        last_feedback: str | None = None

        for index in range(self.budgets.max_steps):
            self.steps_used = index + 1
            self._perturb(index)

            if current is None:
                _, text = await self._observe(index)
                mode = PlanningMode.OPEN_LOOP_REPLAN if planned else PlanningMode.OPEN_LOOP
                planned = True
                current = await self._plan(index, text, mode, last_feedback=last_feedback)
                if current is None:
                    if replans_left == 0:
                        return EpisodeStatus.FAILURE, "replan unparseable"
                    replans_left -= 1
                    last_feedback = "the previous plan could not be parsed"
                    continue

            action = current.actions.pop(0)
            action_text = render_action(action)
            feedback = self._execute(index, action)
            goal = self._check_milestones(index)
            if goal:
                return EpisodeStatus.SUCCESS, "goal reached"

            if not feedback.ok:
                if replans_left == 0:
                    return EpisodeStatus.FAILURE, SECOND_EXECUTION_ERROR
                replans_left -= 1
                last_feedback = f"{action_text} failed: {feedback.kind}: {feedback.message}"
                current = None
            elif not current.actions:
                return EpisodeStatus.FAILURE, "plan finished before the goal"

        return EpisodeStatus.FAILURE, "step budget exhausted"


async def run_episode(
    config: WorldConfig,
    task: TaskSpec,
    variant: AgentVariant,
    backends: RoleBackends,
    budgets: Budgets | None = None,
    *,
    history_capacity: int = 32,
) -> tuple[EpisodeOutcome, EpisodeTrace]:
    """
    run one episode to success, failure or infrastructure failure

    `config` carries the trial's perturbation schedule. Action errors never abort the
    episode; only a BackendError with fallback disabled ends it early.
    """
    episode = _Episode(config, task, variant, backends, budgets or Budgets(), history_capacity)
    outcome, trace = await episode.run()
    logger.info(
        f"[{episode.tag}] {outcome.status.value} "
        f"score {outcome.score}/{outcome.max_score} in {outcome.steps_used} steps"
    )
    return outcome, trace
