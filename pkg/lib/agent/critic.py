"""
Critic: judges one candidate action against the current raw observations.

The rule critic checks categories in a fixed order and reports the first that fails:
invalid, redundant, outdated, wrong_planning.
"""

import logging
import re
from enum import Enum

from pydantic import BaseModel, model_validator

from lib.backends.base import ChatBackend, Role
from lib.errors import BackendError
from lib.memory import Belief, HistoryEntry
from lib.prompting import ask
from lib.skills import Action, Close, GoTo, Open, PickFrom, ReleaseTo, render_action
from lib.world.models import RawObservation, WorldConfig
from lib.world.simulator import validate_action

logger = logging.getLogger(__name__)


class CriticCategory(str, Enum):
    NONE = "none"
    OUTDATED = "outdated"
    REDUNDANT = "redundant"
    INVALID = "invalid"
    WRONG_PLANNING = "wrong_planning"


class CriticVerdict(BaseModel):
    valid: bool
    category: CriticCategory = CriticCategory.NONE
    feedback: str = ""
    advice: str = ""

    @model_validator(mode="after")
    def _category_matches_validity(self) -> "CriticVerdict":
        if self.valid and self.category != CriticCategory.NONE:
            raise ValueError("an approved action has no rejection category")
        if not self.valid and self.category == CriticCategory.NONE:
            raise ValueError("a rejected action needs a category")
        return self

    @classmethod
    def approve(cls, feedback: str = "") -> "CriticVerdict":
        return cls(valid=True, feedback=feedback)

    @classmethod
    def reject(cls, category: CriticCategory, feedback: str, advice: str = "") -> "CriticVerdict":
        return cls(valid=False, category=category, feedback=feedback, advice=advice)


class _View:
    """what the robots currently perceive, merged across robots"""

    def __init__(self, observations: dict[str, RawObservation]):
        self.observations = observations
        self.flags: dict[str, bool] = {}
        self.contents: dict[str, set[str]] = {}
        for raw in observations.values():
            self.flags.update(raw.container_flags)
            if raw.container_flags.get(raw.position, True):
                self.contents.setdefault(raw.position, set())
            for fact in raw.facts:
                if fact.attribute != "held":
                    self.contents.setdefault(fact.place, set()).add(fact.entity)

    def position(self, robot: str) -> str | None:
        raw = self.observations.get(robot)
        return raw.position if raw else None

    def hand(self, robot: str) -> list[str] | None:
        raw = self.observations.get(robot)
        if raw is None:
            return None
        return [f.entity for f in raw.facts if f.attribute == "held"]


def _location_of(action: Action) -> str | None:
    if isinstance(action, (Open, Close)):
        return action.target
    if isinstance(action, (PickFrom, ReleaseTo)):
        return action.space
    return None


def rule_critic(
    action: Action,
    observations: dict[str, RawObservation],
    belief: Belief | None,
    recent_history: list[HistoryEntry],
    config: WorldConfig,
) -> CriticVerdict:
    invalid = validate_action(config, action)
    if invalid is not None:
        return CriticVerdict.reject(
            CriticCategory.INVALID,
            invalid.message,
            "use a skill signature from the catalog with entities from the scene",
        )

    view = _View(observations)
    for check in (_redundant, _outdated, _wrong_planning):
        verdict = check(action, view, belief, recent_history, config)
        if verdict is not None:
            return verdict
    return CriticVerdict.approve()


def _redundant(
    action: Action,
    view: _View,
    belief: Belief | None,
    history: list[HistoryEntry],
    config: WorldConfig,
) -> CriticVerdict | None:
    if isinstance(action, Open) and view.flags.get(action.target) is True:
        return CriticVerdict.reject(
            CriticCategory.REDUNDANT,
            f"{action.target} is already open",
            "skip this action and continue with the next step",
        )
    if isinstance(action, Close) and view.flags.get(action.target) is False:
        return CriticVerdict.reject(
            CriticCategory.REDUNDANT,
            f"{action.target} is already closed",
            "skip this action and continue with the next step",
        )
    if isinstance(action, GoTo) and view.position(action.robot) == action.navpoint:
        return CriticVerdict.reject(
            CriticCategory.REDUNDANT,
            f"{action.robot} is already at {action.navpoint}",
            "continue with the action planned at this location",
        )
    if isinstance(action, PickFrom):
        held = view.hand(action.robot) or []
        believed = belief.place_of(action.object) if belief is not None else None
        if action.object in held or believed == action.robot:
            return CriticVerdict.reject(
                CriticCategory.REDUNDANT,
                f"{action.robot} is already holding {action.object}",
                "continue with the next step of the sub-goal",
            )
    return None


def _outdated(
    action: Action,
    view: _View,
    belief: Belief | None,
    history: list[HistoryEntry],
    config: WorldConfig,
) -> CriticVerdict | None:
    rendered = render_action(action)
    last = history[-1] if history else None
    if last is not None and last.action == rendered and not last.feedback.ok:
        return CriticVerdict.reject(
            CriticCategory.OUTDATED,
            f"{rendered} just failed: {last.feedback.message}",
            "choose a different action that addresses the failure",
        )

    robot = config.robot(action.robot)
    assert robot is not None
    hand = view.hand(action.robot) or []

    if isinstance(action, ReleaseTo) and not hand:
        return CriticVerdict.reject(
            CriticCategory.OUTDATED,
            f"{action.robot} is not holding anything",
            f"pick up an object with {action.robot} before releasing",
        )
    if isinstance(action, PickFrom) and len(hand) >= robot.hand_capacity:
        return CriticVerdict.reject(
            CriticCategory.OUTDATED,
            f"{action.robot}'s hand is full",
            f"release an object with {action.robot} first",
        )

    location = _location_of(action)
    position = view.position(action.robot)
    if location is None:
        return None
    if robot.mobile and position != location:
        return CriticVerdict.reject(
            CriticCategory.OUTDATED,
            f"{action.robot} is at {position}, not at {location}",
            f"go_to({action.robot}, {location}) first",
        )
    if position != location:
        return None

    if isinstance(action, (PickFrom, ReleaseTo)) and view.flags.get(location) is False:
        return CriticVerdict.reject(
            CriticCategory.OUTDATED,
            f"{location} is closed",
            f"open({action.robot}, {location}) before {rendered}",
        )
    if isinstance(action, PickFrom):
        seen = view.contents.get(location)
        if seen is not None and action.object not in seen:
            others = [c for c in config.container_tokens if c != location]
            return CriticVerdict.reject(
                CriticCategory.OUTDATED,
                f"{action.object} is not in {location}",
                f"check other compartments: {', '.join(others)}",
            )
    return None


def _wrong_planning(
    action: Action,
    view: _View,
    belief: Belief | None,
    history: list[HistoryEntry],
    config: WorldConfig,
) -> CriticVerdict | None:
    robot = config.robot(action.robot)
    assert robot is not None
    if robot.mobile:
        return None
    movers = [r.token for r in config.robots if r.mobile]
    helper = ", ".join(movers) if movers else "none available"
    if isinstance(action, GoTo):
        return CriticVerdict.reject(
            CriticCategory.WRONG_PLANNING,
            f"{action.robot} is stationary and cannot navigate",
            f"assign navigation to a mobile robot ({helper})",
        )
    location = _location_of(action)
    position = view.position(action.robot)
    if location is not None and position != location:
        return CriticVerdict.reject(
            CriticCategory.WRONG_PLANNING,
            f"{action.robot} is stationary at {position} and cannot reach {location}",
            f"assign this action to a mobile robot ({helper}) or bring the object to {position}",
        )
    return None


_VERDICT_RE = re.compile(r"^[ \t*#]*VERDICT[ \t*]*:[ \t*]*(true|false)\b", re.I | re.M)
_CATEGORY_RE = re.compile(r"^[ \t*#]*CATEGORY[ \t*]*:[ \t*]*([a-z_ ]+?)\s*$", re.I | re.M)
_FEEDBACK_RE = re.compile(r"^[ \t*#]*FEEDBACK[ \t*]*:[ \t*]*(.*?)\s*$", re.I | re.M)
_ADVICE_RE = re.compile(r"^[ \t*#]*ADVICE[ \t*]*:[ \t*]*(.*?)\s*$", re.I | re.M)


def parse_verdict(text: str) -> CriticVerdict:
    """raises ValueError when the response does not follow the verdict format"""
    verdict = _VERDICT_RE.search(text)
    feedback = _FEEDBACK_RE.search(text)
    if verdict is None or feedback is None:
        raise ValueError("response needs VERDICT: and FEEDBACK: lines")
    advice = _ADVICE_RE.search(text)
    if verdict.group(1).lower() == "true":
        return CriticVerdict.approve(feedback.group(1))

    category = _CATEGORY_RE.search(text)
    if category is None:
        raise ValueError("a false verdict needs a CATEGORY: line")
    name = category.group(1).strip().lower().replace(" ", "_")
    name = name.removesuffix("_actions").removesuffix("_action")
    try:
        kind = CriticCategory(name)
    except ValueError:
        raise ValueError(f"unknown category '{category.group(1).strip()}'")
    return CriticVerdict.reject(kind, feedback.group(1), advice.group(1) if advice else "")


async def critique(
    backend: ChatBackend | None,
    action: Action,
    belief: Belief | None,
    observations: dict[str, RawObservation],
    *,
    config: WorldConfig,
    history: list[HistoryEntry] | None = None,
    fallback: bool = True,
) -> CriticVerdict:
    """ask the critic model; unparseable twice or unreachable falls back to the rule critic"""
    history = history or []
    if backend is None:
        return rule_critic(action, observations, belief, history, config)

    context = {
        "action": render_action(action),
        "robots": [
            f"{r.token} ({'mobile' if r.mobile else 'stationary'}, holds up to {r.hand_capacity})"
            for r in config.robots
        ],
        "observations": {robot: raw.model_dump() for robot, raw in observations.items()},
        "belief": belief.render() if belief is not None else None,
        "history": [f"step {e.step}: {e.action} -> {e.feedback.message}" for e in history[-5:]],
    }
    note: str | None = None
    try:
        for _ in range(2):
            text = await ask(backend, Role.CRITIC, context, note)
            try:
                return parse_verdict(text)
            except ValueError as e:
                logger.info(f"Critic response unparseable: {e}")
                note = f"PREVIOUS RESPONSE ERRORS:\n- {e}\nUse the exact verdict format."
    except BackendError as e:
        if not fallback:
            raise
        logger.warning(f"Critic call failed ({e.message}), using rule critic")
    return rule_critic(action, observations, belief, history, config)
