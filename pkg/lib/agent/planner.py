import logging
import re
from enum import Enum
from typing import TYPE_CHECKING

from pydantic import BaseModel, Field

from lib.backends.base import ChatBackend, Role
from lib.errors import PlanError
from lib.memory import Belief
from lib.prompting import ask
from lib.skills import Action, ParseError, SkillDoc, extract_actions, render_catalog

if TYPE_CHECKING:
    from lib.agent.critic import CriticVerdict

logger = logging.getLogger(__name__)

_SUBGOAL_RE = re.compile(r"^[ \t>*#_-]*SUBGOAL[ \t*_]*:[ \t*_]*(.+?)\s*$", re.I | re.M)


class PlanningMode(str, Enum):
    CLOSED_LOOP = "closed-loop"
    OPEN_LOOP = "open-loop"
    OPEN_LOOP_REPLAN = "open-loop-replan"


class Plan(BaseModel):
    subgoal: str
    actions: list[Action] = Field(..., min_length=1)
    origin_step: int = Field(..., ge=0)
    diagnostics: list[ParseError] = Field(default_factory=list)


def parse_plan(text: str, origin_step: int) -> tuple[Plan | None, list[str], list[ParseError]]:
    """returns the plan (None when unusable), the problems found and the line diagnostics"""
    problems: list[str] = []
    subgoals = _SUBGOAL_RE.findall(text)
    if not subgoals:
        problems.append("missing SUBGOAL: line")

    actions, diagnostics = extract_actions(text)
    problems.extend(f"{d.kind.value} at {d.span[0]}-{d.span[1]}: {d.message}" for d in diagnostics)
    if not actions:
        problems.append("ACTIONS block holds no valid skill call")

    if not subgoals or not actions:
        return None, problems, diagnostics
    plan = Plan(
        subgoal=subgoals[-1], actions=actions, origin_step=origin_step, diagnostics=diagnostics
    )
    return plan, problems, diagnostics


async def plan(
    backend: ChatBackend,
    belief: Belief | None,
    observation: str,
    catalog: list[SkillDoc],
    task: str,
    *,
    step: int = 0,
    mode: PlanningMode = PlanningMode.CLOSED_LOOP,
    robots: list[str] | None = None,
    critic: "CriticVerdict | None" = None,
    last_feedback: str | None = None,
    abandoned: str | None = None,
    max_retries: int = 1,
) -> Plan:
    """
    ask the planner for the next sub-goal and its skill calls

    a response without a sub-goal or without any valid call is retried with the
    diagnostics appended; PlanError once the retries are spent. BackendError propagates.
    """
    context = {
        "task": task,
        "mode": mode.value,
        "step": step,
        "robots": robots or [],
        "catalog": render_catalog(catalog),
        "belief": belief.render() if belief is not None else None,
        "observation": observation,
        "critic": critic,
        "last_feedback": last_feedback,
        "abandoned": abandoned,
    }

    note: str | None = None
    problems: list[str] = []
    text = ""
    for attempt in range(max_retries + 1):
        text = await ask(backend, Role.PLANNER, context, note)
        result, problems, diagnostics = parse_plan(text, step)
        if result is not None:
            if diagnostics:
                logger.info(
                    f"Planner response had {len(diagnostics)} unusable action line(s), "
                    f"kept {len(result.actions)}"
                )
            return result
        logger.info(f"Planner response unusable (attempt {attempt + 1}): {problems}")
        note = "PREVIOUS RESPONSE ERRORS:\n" + "\n".join(f"- {p}" for p in problems)
        note += "\nAnswer again with a SUBGOAL: line and an ACTIONS: block of skill calls."

    raise PlanError(
        "planner response unparseable",
        detail={"kind": "unparseable", "problems": problems, "response": text},
    )
