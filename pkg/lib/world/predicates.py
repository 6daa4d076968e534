"""
World-state predicates used as task milestones and goals
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict

from lib.errors import ConfigError
from lib.world.models import WorldConfig, WorldState
from lib.world.simulator import observe_all


class PredicateKind(str, Enum):
    VISIBLE = "visible"
    AT = "at"
    OPEN = "open"
    CLOSED = "closed"
    HELD = "held"
    REMOVED = "removed"


class Predicate(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: PredicateKind
    target: str
    place: str | None = None
    robot: str | None = None

    def describe(self) -> str:
        if self.kind == PredicateKind.AT:
            return f"{self.target} at {self.place}"
        if self.kind == PredicateKind.HELD:
            return f"{self.target} held" + (f" by {self.robot}" if self.robot else "")
        return f"{self.target} {self.kind.value}"


def check_predicate(pred: Predicate, cfg: WorldConfig) -> None:
    """raise ConfigError when the predicate names entities the world does not have"""
    if pred.kind in (PredicateKind.OPEN, PredicateKind.CLOSED):
        if not cfg.is_container(pred.target):
            raise ConfigError(f"predicate '{pred.describe()}' needs a container")
    elif pred.target not in cfg.object_tokens:
        raise ConfigError(f"predicate '{pred.describe()}' references missing object")

    if pred.kind == PredicateKind.AT and pred.place not in cfg.places:
        raise ConfigError(f"predicate '{pred.describe()}' references missing place")
    if pred.robot is not None and pred.robot not in cfg.robot_tokens:
        raise ConfigError(f"predicate '{pred.describe()}' references missing robot")


def holds(pred: Predicate, cfg: WorldConfig, state: WorldState) -> bool:
    if pred.kind == PredicateKind.VISIBLE:
        return any(
            fact.entity == pred.target
            for observation in observe_all(cfg, state).values()
            for fact in observation.facts
        )
    if pred.kind == PredicateKind.AT:
        return state.locations.get(pred.target) == pred.place
    if pred.kind == PredicateKind.OPEN:
        return state.open.get(pred.target, False)
    if pred.kind == PredicateKind.CLOSED:
        return not state.open.get(pred.target, True)
    if pred.kind == PredicateKind.HELD:
        holder = state.locations.get(pred.target)
        if pred.robot is not None:
            return holder == pred.robot
        return holder in state.hands
    return pred.target in state.removed
