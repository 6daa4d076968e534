"""
Observer: raw scene graph to natural-language observation.

The deterministic description uses fixed sentence templates that the summarizer's
fallback parses back, so both sides import the patterns from here.
"""

import logging
import re

from pydantic import BaseModel

from lib.backends.base import ChatBackend, Role
from lib.errors import BackendError, BackendErrorKind
from lib.prompting import ask
from lib.world.models import RawObservation

logger = logging.getLogger(__name__)

NOTHING_VISIBLE = "Nothing else is visible."

LOCATION_RE = re.compile(r"\b([a-z][a-z0-9_]*) is (?:in|on) ([a-z][a-z0-9_]*)\.")
HOLDING_RE = re.compile(r"\b([a-z][a-z0-9_]*) is holding ([a-z][a-z0-9_]*)\.")
POSITION_RE = re.compile(r"\b([a-z][a-z0-9_]*) is at ([a-z][a-z0-9_]*)\.")
CONTAINER_RE = re.compile(r"\b([a-z][a-z0-9_]*) is (open|closed)\.")


class TextObservation(BaseModel):
    robot: str
    step: int
    text: str


def describe_deterministic(raw: RawObservation, task: str = "") -> TextObservation:
    """template sentences for one robot; `task` does not change the rendering"""
    lines = [f"{raw.robot} is at {raw.position}."]
    for container, is_open in sorted(raw.container_flags.items()):
        lines.append(f"{container} is {'open' if is_open else 'closed'}.")
    for fact in raw.facts:
        if fact.attribute == "held":
            lines.append(f"{fact.place} is holding {fact.entity}.")
        else:
            lines.append(f"{fact.entity} is {fact.attribute} {fact.place}.")
    if not raw.facts:
        lines.append(NOTHING_VISIBLE)
    return TextObservation(robot=raw.robot, step=raw.step, text=" ".join(lines))


async def describe(
    backend: ChatBackend | None, raw: RawObservation, task: str, *, fallback: bool = True
) -> TextObservation:
    """
    describe one robot's observation with the observer model

    without a backend, or when the call fails and fallback is allowed, the
    deterministic templates are used instead.
    """
    if backend is None:
        return describe_deterministic(raw)
    try:
        text = (await ask(backend, Role.OBSERVER, {"task": task, "raw": raw.model_dump()})).strip()
        if not text:
            raise BackendError("observer returned no text", kind=BackendErrorKind.MALFORMED)
    except BackendError as e:
        if not fallback:
            raise
        logger.warning(f"Observer call failed for {raw.robot} ({e.message}), using templates")
        return describe_deterministic(raw)
    return TextObservation(robot=raw.robot, step=raw.step, text=text)


def join_observations(observations: list[TextObservation]) -> str:
    """one paragraph per robot, in roster order"""
    return "\n".join(o.text for o in observations)
