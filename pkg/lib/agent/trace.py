"""
Episode trace: append-only event log written as one JSON line per record
"""

import json
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field

from lib.errors import ReplayError


class TraceEvent(str, Enum):
    EPISODE_START = "episode_start"
    PERTURBATION = "perturbation"
    OBSERVE = "observe"
    DESCRIBE = "describe"
    SUMMARIZE = "summarize"
    PLAN = "plan"
    PLAN_ERROR = "plan_error"
    PLAN_DISCARD = "plan_discard"
    CRITIQUE = "critique"
    SKIP = "skip"
    EXECUTE = "execute"
    MILESTONE = "milestone"
    OUTCOME = "outcome"


class EpisodeStatus(str, Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    INFRASTRUCTURE_FAILURE = "infrastructure_failure"


class EpisodeOutcome(BaseModel):
    status: EpisodeStatus
    score: int = Field(..., ge=0)
    max_score: int = Field(..., ge=1)
    steps_used: int = Field(..., ge=0)
    reason: str = ""
    final_digest: str = ""

    @property
    def success(self) -> bool:
        return self.status == EpisodeStatus.SUCCESS


class TraceRecord(BaseModel):
    seq: int
    step: int
    event: TraceEvent
    data: dict[str, Any] = Field(default_factory=dict)


class EpisodeTrace(BaseModel):
    records: list[TraceRecord] = Field(default_factory=list)

    def add(self, step: int, event: TraceEvent, **data: Any) -> TraceRecord:
        if self.records and step < self.records[-1].step:
            raise ValueError(f"trace step {step} goes back from {self.records[-1].step}")
        record = TraceRecord(seq=len(self.records), step=step, event=event, data=data)
        self.records.append(record)
        return record

    def events(self, *kinds: TraceEvent) -> list[TraceRecord]:
        return [r for r in self.records if r.event in kinds]

    def at_step(self, step: int) -> list[TraceRecord]:
        return [r for r in self.records if r.step == step]

    @property
    def start(self) -> TraceRecord | None:
        found = self.events(TraceEvent.EPISODE_START)
        return found[0] if found else None

    @property
    def outcome(self) -> EpisodeOutcome | None:
        found = self.events(TraceEvent.OUTCOME)
        if not found:
            return None
        return EpisodeOutcome.model_validate(found[-1].data["outcome"])

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.model_dump(mode="json"), sort_keys=True) for r in self.records]
        return "\n".join(lines) + "\n" if lines else ""

    @classmethod
    def from_jsonl(cls, text: str) -> "EpisodeTrace":
        records = []
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(TraceRecord.model_validate_json(line))
            except ValueError as e:
                raise ReplayError(f"trace line {number} is not a record: {e}")
        return cls(records=records)
