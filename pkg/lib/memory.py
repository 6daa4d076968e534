"""
Interaction history and the summarizer that turns it into a belief state
"""

import logging
import re
from collections import deque

from pydantic import BaseModel, Field, model_validator

from lib.backends.base import ChatBackend, Role
from lib.errors import BackendError, InvalidCapacityError, NonMonotonicStepError
from lib.observer import HOLDING_RE, LOCATION_RE
from lib.prompting import ask
from lib.skills import PickFrom, ReleaseTo, parse_action
from lib.world.models import Feedback

logger = logging.getLogger(__name__)

SKIPPED = "skipped"
DEFAULT_CAPACITY = 32
MAX_ISSUES = 3


class EntryFeedback(BaseModel):
    status: str = Field(..., description="'Ok' or 'Err'")
    kind: str | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "Ok"

    @classmethod
    def from_world(cls, feedback: Feedback) -> "EntryFeedback":
        return cls(
            status=feedback.status.value,
            kind=feedback.kind.value if feedback.kind else None,
            message=feedback.message,
        )


class HistoryEntry(BaseModel):
    step: int = Field(..., ge=0)
    observation: str
    action: str = Field(..., description="canonical skill call, or 'skipped' after a veto")
    feedback: EntryFeedback

    @property
    def skipped(self) -> bool:
        return self.action == SKIPPED


class HistoryBuffer:
    """bounded FIFO of history entries; the oldest entry is evicted first"""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise InvalidCapacityError(
                f"history capacity must be at least 1, got {capacity}",
                detail={"capacity": capacity},
            )
        self.capacity = capacity
        self._entries: deque[HistoryEntry] = deque(maxlen=capacity)

    def push(self, entry: HistoryEntry) -> "HistoryBuffer":
        if self._entries and entry.step <= self._entries[-1].step:
            raise NonMonotonicStepError(
                f"step {entry.step} does not follow step {self._entries[-1].step}",
                detail={"step": entry.step, "last_step": self._entries[-1].step},
            )
        self._entries.append(entry)
        return self

    @property
    def entries(self) -> list[HistoryEntry]:
        return list(self._entries)

    @property
    def last(self) -> HistoryEntry | None:
        return self._entries[-1] if self._entries else None

    def __len__(self) -> int:
        return len(self._entries)


def new_buffer(capacity: int = DEFAULT_CAPACITY) -> HistoryBuffer:
    return HistoryBuffer(capacity)


class BeliefFact(BaseModel):
    object: str
    place: str = Field(..., description="place token, or robot token while held")
    step: int = 0


class Belief(BaseModel):
    summary: str = ""
    facts: list[BeliefFact] = Field(default_factory=list)
    completed: list[str] = Field(default_factory=list)
    issues: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _one_place_per_object(self) -> "Belief":
        objects = [f.object for f in self.facts]
        if len(objects) != len(set(objects)):
            raise ValueError("belief lists an object at more than one place")
        return self

    def place_of(self, obj: str) -> str | None:
        return next((f.place for f in self.facts if f.object == obj), None)

    def render(self) -> str:
        """text block used inside planner and critic prompts"""
        facts = [f"{f.object} -> {f.place}" for f in self.facts]
        sections = [
            f"Summary: {self.summary or 'none'}",
            "Known object locations:\n" + _bullets(facts),
            "Completed:\n" + _bullets(self.completed),
            "Open issues:\n" + _bullets(self.issues),
        ]
        return "\n".join(sections)


def _bullets(items: list[str]) -> str:
    return "\n".join(f"- {item}" for item in items) if items else "- none"


def summarize_deterministic(entries: list[HistoryEntry], task: str = "") -> Belief:
    """template summary of the retained history; latest statement about an object wins"""
    if not entries:
        return Belief()

    facts: dict[str, BeliefFact] = {}
    hands: dict[str, list[str]] = {}
    completed: list[str] = []
    issues: list[str] = []

    def place(obj: str, where: str, step: int) -> None:
        for held in hands.values():
            if obj in held:
                held.remove(obj)
        # re-insert so iteration order follows recency
        facts.pop(obj, None)
        facts[obj] = BeliefFact(object=obj, place=where, step=step)

    for entry in entries:
        for obj, where in LOCATION_RE.findall(entry.observation):
            place(obj, where, entry.step)
        for robot, obj in HOLDING_RE.findall(entry.observation):
            place(obj, robot, entry.step)
            hands.setdefault(robot, []).append(obj)

        if entry.skipped:
            issues.append(f"step {entry.step}: {entry.feedback.message}")
            continue
        if not entry.feedback.ok:
            issues.append(f"step {entry.step}: {entry.action} failed: {entry.feedback.message}")
            continue

        completed.append(entry.action)
        action = parse_action(entry.action)
        if isinstance(action, PickFrom):
            place(action.object, action.robot, entry.step)
            hands.setdefault(action.robot, []).append(action.object)
        elif isinstance(action, ReleaseTo) and hands.get(action.robot):
            released = hands[action.robot][0]
            place(released, action.space, entry.step)

    succeeded = sum(1 for e in entries if e.feedback.ok)
    last = entries[-1]
    outcome = "Ok" if last.feedback.ok else f"Err {last.feedback.kind}"
    summary = (
        f"{len(entries)} recorded steps, {succeeded} succeeded, {len(entries) - succeeded} failed; "
        f"last step {last.step}: {last.action} -> {outcome}."
    )
    return Belief(
        summary=summary,
        facts=sorted(facts.values(), key=lambda f: f.object),
        completed=completed[-8:],
        issues=issues[-MAX_ISSUES:],
    )


_SECTION_RE = re.compile(
    r"^[ \t*#]*(SUMMARY|FACTS|DONE|ISSUES)[ \t*]*:[ \t]*(.*)$", re.IGNORECASE | re.MULTILINE
)
_FACT_RE = re.compile(
    r"^([a-z][a-z0-9_]*)\s*(?:->|:|is in|is on|is at|is held by)\s*([a-z][a-z0-9_]*)\.?$"
)
_NONE_ITEMS = {"none", "n/a", "nothing", "-"}


class BeliefParseError(ValueError):
    pass


def parse_belief(text: str) -> Belief:
    """parse SUMMARY / FACTS / DONE / ISSUES sections; raises BeliefParseError"""
    matches = list(_SECTION_RE.finditer(text))
    sections: dict[str, list[str]] = {}
    for i, match in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        body = [match.group(2)] + text[match.end() : end].splitlines()
        items = [line.strip().lstrip("-*").strip() for line in body]
        sections[match.group(1).upper()] = [
            item for item in items if item and item.lower() not in _NONE_ITEMS
        ]

    if "SUMMARY" not in sections or "FACTS" not in sections:
        raise BeliefParseError("response needs SUMMARY: and FACTS: sections")

    facts: dict[str, BeliefFact] = {}
    for item in sections["FACTS"]:
        fact = _FACT_RE.match(item)
        if fact is None:
            raise BeliefParseError(f"cannot read fact line '{item}'")
        # later lines win
        facts[fact.group(1)] = BeliefFact(object=fact.group(1), place=fact.group(2))

    return Belief(
        summary=" ".join(sections["SUMMARY"]),
        facts=list(facts.values()),
        completed=sections.get("DONE", []),
        issues=sections.get("ISSUES", []),
    )


async def summarize(
    backend: ChatBackend | None,
    entries: list[HistoryEntry],
    task: str,
    *,
    fallback: bool = True,
) -> Belief:
    """
    ask the summarizer model for a belief state

    an unparseable answer is retried once with the parse error attached; after that, or on
    backend failure when fallback is allowed, the deterministic summary is returned.
    """
    if backend is None:
        return summarize_deterministic(entries, task)

    context = {"task": task, "entries": [e.model_dump() for e in entries]}
    note: str | None = None
    try:
        for _ in range(2):
            text = await ask(backend, Role.SUMMARIZER, context, note)
            try:
                return parse_belief(text)
            except (BeliefParseError, ValueError) as e:
                logger.info(f"Summarizer response unparseable: {e}")
                note = f"PREVIOUS RESPONSE ERRORS:\n- {e}\nUse the exact section format."
    except BackendError as e:
        if not fallback:
            raise
        logger.warning(f"Summarizer call failed ({e.message}), using template summary")
    return summarize_deterministic(entries, task)
