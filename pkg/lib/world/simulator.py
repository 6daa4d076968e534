"""
Deterministic kitchen simulator.

Transition rules, checked in this order so the returned error kind is deterministic:

    every skill      UnknownEntity (first unknown token) > MalformedAction (wrong kind)
    open / close     NotAtLocation > ContainerOpen (open) | ContainerClosed (close)
    pick_from        NotAtLocation > ContainerClosed > ObjectNotVisible > HandFull
    release_to       HandEmpty > NotAtLocation > ContainerClosed
    go_to            ImmobileRobot

Any Err leaves the state untouched (same object is returned). Ok increments the step counter.
"""

import hashlib
import json
import logging

from lib.errors import ConfigError, UnknownEntityError
from lib.skills import Action, Close, GoTo, Open, PickFrom, ReleaseTo, render_action
from lib.world.models import (
    Feedback,
    FeedbackKind,
    ObservedFact,
    PerturbationEvent,
    PerturbationKind,
    RawObservation,
    WorldConfig,
    WorldState,
)

logger = logging.getLogger(__name__)

# open space a stationary robot keeps in view
TABLE = "table"


def load_world(cfg: WorldConfig) -> WorldState:
    cfg.check_references()
    return WorldState(
        locations={o.token: o.place for o in cfg.objects},
        open={c.token: c.open for c in cfg.containers},
        positions={r.token: r.start for r in cfg.robots},
        hands={r.token: [] for r in cfg.robots},
        removed=[],
        step=0,
    )


def validate_action(cfg: WorldConfig, action: Action) -> Feedback | None:
    """static check of an action against the config; None when valid"""
    for token, _ in action.typed_args():
        if not cfg.kinds_of(token):
            return Feedback.error(FeedbackKind.UNKNOWN_ENTITY, f"unknown entity '{token}'")
    for token, kind in action.typed_args():
        if not cfg.accepts(token, kind):
            return Feedback.error(
                FeedbackKind.MALFORMED_ACTION,
                f"{render_action(action)}: '{token}' is not a valid {kind.value}",
            )
    return None


def step(cfg: WorldConfig, state: WorldState, action: Action) -> tuple[WorldState, Feedback]:
    invalid = validate_action(cfg, action)
    if invalid is not None:
        return state, invalid

    if isinstance(action, (Open, Close)):
        return _toggle(state, action)
    if isinstance(action, PickFrom):
        return _pick(cfg, state, action)
    if isinstance(action, ReleaseTo):
        return _release(cfg, state, action)
    return _go_to(cfg, state, action)


def _advance(state: WorldState) -> WorldState:
    successor = state.model_copy(deep=True)
    successor.step += 1
    return successor


def _not_at(state: WorldState, robot: str, place: str) -> Feedback | None:
    position = state.positions[robot]
    if position != place:
        return Feedback.error(
            FeedbackKind.NOT_AT_LOCATION, f"{robot} is at {position}, not at {place}"
        )
    return None


def _toggle(state: WorldState, action: Open | Close) -> tuple[WorldState, Feedback]:
    away = _not_at(state, action.robot, action.target)
    if away:
        return state, away

    opening = isinstance(action, Open)
    if opening and state.open[action.target]:
        return state, Feedback.error(
            FeedbackKind.CONTAINER_OPEN, f"{action.target} is already open"
        )
    if not opening and not state.open[action.target]:
        return state, Feedback.error(FeedbackKind.CONTAINER_CLOSED, f"{action.target} is closed")

    successor = _advance(state)
    successor.open[action.target] = opening
    verb = "opened" if opening else "closed"
    return successor, Feedback.success(f"{action.robot} {verb} {action.target}")


def _pick(cfg: WorldConfig, state: WorldState, action: PickFrom) -> tuple[WorldState, Feedback]:
    away = _not_at(state, action.robot, action.space)
    if away:
        return state, away
    if cfg.is_container(action.space) and not state.open[action.space]:
        return state, Feedback.error(FeedbackKind.CONTAINER_CLOSED, f"{action.space} is closed")
    if state.locations.get(action.object) != action.space:
        return state, Feedback.error(
            FeedbackKind.OBJECT_NOT_VISIBLE, f"{action.object} is not in {action.space}"
        )
    robot = cfg.robot(action.robot)
    assert robot is not None
    if len(state.hands[action.robot]) >= robot.hand_capacity:
        return state, Feedback.error(FeedbackKind.HAND_FULL, f"{action.robot}'s hand is full")

    successor = _advance(state)
    successor.locations[action.object] = action.robot
    successor.hands[action.robot].append(action.object)
    return successor, Feedback.success(
        f"{action.robot} picked {action.object} from {action.space}"
    )


def _release(
    cfg: WorldConfig, state: WorldState, action: ReleaseTo
) -> tuple[WorldState, Feedback]:
    if not state.hands[action.robot]:
        return state, Feedback.error(
            FeedbackKind.HAND_EMPTY, f"{action.robot} is not holding anything"
        )
    away = _not_at(state, action.robot, action.space)
    if away:
        return state, away
    if cfg.is_container(action.space) and not state.open[action.space]:
        return state, Feedback.error(FeedbackKind.CONTAINER_CLOSED, f"{action.space} is closed")

    successor = _advance(state)
    obj = successor.hands[action.robot].pop(0)
    if cfg.is_destructive(action.space):
        del successor.locations[obj]
        successor.removed.append(obj)
        return successor, Feedback.success(f"{obj} was disposed of in {action.space}")
    successor.locations[obj] = action.space
    return successor, Feedback.success(f"{action.robot} released {obj} to {action.space}")


def _go_to(cfg: WorldConfig, state: WorldState, action: GoTo) -> tuple[WorldState, Feedback]:
    robot = cfg.robot(action.robot)
    assert robot is not None
    if not robot.mobile:
        return state, Feedback.error(FeedbackKind.IMMOBILE_ROBOT, f"{action.robot} cannot move")

    successor = _advance(state)
    successor.positions[action.robot] = action.navpoint
    return successor, Feedback.success(f"{action.robot} moved to {action.navpoint}")


def _place_facts(cfg: WorldConfig, state: WorldState, place: str) -> list[ObservedFact]:
    attribute = "on" if cfg.is_space(place) else "in"
    return [
        ObservedFact(entity=obj, place=place, attribute=attribute)
        for obj in sorted(state.locations)
        if state.locations[obj] == place
    ]


def observe(cfg: WorldConfig, state: WorldState, robot: str) -> RawObservation:
    """
    what one robot sees: its own hand, the place at its navpoint (contents only when open)

    a stationary robot always sees the table as well, wherever it was placed.
    """
    if robot not in state.positions:
        raise UnknownEntityError(f"unknown robot '{robot}'", detail={"token": robot})

    position = state.positions[robot]
    facts = [ObservedFact(entity=obj, place=robot, attribute="held") for obj in state.hands[robot]]
    flags: dict[str, bool] = {}

    visible = True
    if cfg.is_container(position):
        flags[position] = state.open[position]
        visible = state.open[position]
    if visible:
        facts.extend(_place_facts(cfg, state, position))

    robot_cfg = cfg.robot(robot)
    stationary = robot_cfg is not None and not robot_cfg.mobile
    if stationary and position != TABLE and cfg.is_space(TABLE):
        facts.extend(_place_facts(cfg, state, TABLE))

    return RawObservation(
        robot=robot, position=position, facts=facts, container_flags=flags, step=state.step
    )


def observe_all(cfg: WorldConfig, state: WorldState) -> dict[str, RawObservation]:
    return {robot: observe(cfg, state, robot) for robot in cfg.robot_tokens}


def apply_perturbations(
    cfg: WorldConfig,
    state: WorldState,
    schedule: list[PerturbationEvent],
    step_index: int,
) -> WorldState:
    events = [e for e in schedule if e.step == step_index]
    if not events:
        return state

    successor = state.model_copy(deep=True)
    for event in events:
        if event.effect == PerturbationKind.CLOSE:
            if event.target not in successor.open:
                logger.warning(f"Skipping perturbation on missing container '{event.target}'")
                continue
            successor.open[event.target] = False
        else:
            place = event.place
            if event.target not in successor.locations or place not in cfg.places:
                logger.warning(f"Skipping perturbation moving '{event.target}' to '{place}'")
                continue
            assert place is not None
            holder = successor.locations[event.target]
            if holder in successor.hands:
                successor.hands[holder].remove(event.target)
            successor.locations[event.target] = place
        logger.debug(
            f"Applied perturbation {event.effect.value} {event.target} at step {step_index}"
        )
    return successor


def state_digest(state: WorldState) -> str:
    canonical = json.dumps(state.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def where_is(cfg: WorldConfig, state: WorldState, obj: str) -> str | None:
    """current place of an object, None once it has been disposed of"""
    if obj not in cfg.object_tokens:
        raise UnknownEntityError(f"unknown object '{obj}'", detail={"token": obj})
    return state.locations.get(obj)


def is_open(cfg: WorldConfig, state: WorldState, container: str) -> bool:
    if not cfg.is_container(container):
        raise UnknownEntityError(f"unknown container '{container}'", detail={"token": container})
    return state.open[container]


def holding(cfg: WorldConfig, state: WorldState, robot: str) -> list[str]:
    if robot not in cfg.robot_tokens:
        raise UnknownEntityError(f"unknown robot '{robot}'", detail={"token": robot})
    return list(state.hands[robot])


def load_world_file(path: str) -> WorldConfig:
    """read and validate a world config JSON file"""
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"world config {path} is not valid JSON: {e.msg} (line {e.lineno})",
                detail={"path": path},
            )
    try:
        cfg = WorldConfig.model_validate(data)
    except ValueError as e:
        raise ConfigError(f"invalid world config {path}: {e}", detail={"path": path})
    cfg.check_references()
    return cfg
