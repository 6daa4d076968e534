"""
Trace replay: rebuild the world from the episode_start record, re-execute the recorded
actions and perturbations, and compare the final digest with the recorded one.
"""

from pathlib import Path

from pydantic import BaseModel

from lib.agent.trace import EpisodeTrace, TraceEvent
from lib.errors import ReplayError
from lib.skills import ParseError, parse_action
from lib.world.models import WorldConfig
from lib.world.simulator import apply_perturbations, load_world, state_digest, step


class ReplayResult(BaseModel):
    expected: str
    actual: str
    steps: int

    @property
    def matches(self) -> bool:
        return self.expected == self.actual


def replay_trace(trace: EpisodeTrace) -> ReplayResult:
    start = trace.start
    outcome = trace.outcome
    if start is None or outcome is None:
        raise ReplayError("trace needs episode_start and outcome records")

    config = WorldConfig.model_validate(start.data["world"])
    state = load_world(config)
    if state_digest(state) != start.data["digest"]:
        raise ReplayError("initial world does not match the recorded digest")

    actions = {r.step: r.data["action"] for r in trace.events(TraceEvent.EXECUTE)}
    for index in range(outcome.steps_used):
        state = apply_perturbations(config, state, config.perturbations, index)
        if index not in actions:
            continue
        action = parse_action(actions[index])
        if isinstance(action, ParseError):
            raise ReplayError(f"step {index}: recorded action is unparseable: {action.message}")
        state, _ = step(config, state, action)

    return ReplayResult(
        expected=outcome.final_digest, actual=state_digest(state), steps=outcome.steps_used
    )


def replay_file(path: str | Path) -> ReplayResult:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ReplayError(f"cannot read trace {path}: {e}")
    return replay_trace(EpisodeTrace.from_jsonl(text))
