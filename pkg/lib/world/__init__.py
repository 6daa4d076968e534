from pathlib import Path

from lib.world.models import (
    Feedback,
    FeedbackKind,
    FeedbackStatus,
    ObservedFact,
    PerturbationEvent,
    PerturbationKind,
    RawObservation,
    WorldConfig,
    WorldState,
)
from lib.world.simulator import (
    apply_perturbations,
    holding,
    is_open,
    load_world,
    load_world_file,
    observe,
    observe_all,
    state_digest,
    step,
    validate_action,
    where_is,
)

CONFIGS_DIR = Path(__file__).parent / "configs"

__all__ = [
    "CONFIGS_DIR",
    "Feedback",
    "FeedbackKind",
    "FeedbackStatus",
    "ObservedFact",
    "PerturbationEvent",
    "PerturbationKind",
    "RawObservation",
    "WorldConfig",
    "WorldState",
    "apply_perturbations",
    "holding",
    "is_open",
    "load_world",
    "load_world_file",
    "observe",
    "observe_all",
    "state_digest",
    "step",
    "validate_action",
    "where_is",
]
