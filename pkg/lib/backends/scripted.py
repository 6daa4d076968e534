"""
Scripted backend: ordered rules answer requests without any network access.

A rule matches when its role (if set) equals the request role and its substring or regex
(if set) is found in the final user message. The first matching rule wins. A rule marked
`once` is consumed after it answers, per session.
"""

import logging
import re
from pathlib import Path
from typing import Any

import yaml  # type: ignore[import-untyped]
from pydantic import BaseModel, ValidationError, model_validator

from lib.backends.base import ChatBackend, ChatRequest, Role
from lib.errors import BackendError, BackendErrorKind, SchemaError

logger = logging.getLogger(__name__)


class ScriptRule(BaseModel):
    role: Role | None = None
    contains: str | None = None
    pattern: str | None = None
    response: str
    once: bool = False

    @model_validator(mode="after")
    def _single_matcher(self) -> "ScriptRule":
        if self.contains is not None and self.pattern is not None:
            raise ValueError("a rule uses either 'contains' or 'pattern', not both")
        if self.pattern is not None:
            try:
                re.compile(self.pattern)
            except re.error as e:
                raise ValueError(f"invalid pattern '{self.pattern}': {e}")
        return self

    def matches(self, request: ChatRequest) -> bool:
        if self.role is not None and self.role != request.role:
            return False
        text = request.final_user_message
        if self.contains is not None:
            return self.contains in text
        if self.pattern is not None:
            return re.search(self.pattern, text, re.MULTILINE) is not None
        return True


class ScriptedBackend(ChatBackend):
    name = "scripted"

    def __init__(self, rules: list[ScriptRule]):
        self.rules = list(rules)
        self._spent: set[int] = set()

    async def complete(self, request: ChatRequest) -> str:
        for index, rule in enumerate(self.rules):
            if index in self._spent or not rule.matches(request):
                continue
            if rule.once:
                self._spent.add(index)
            logger.debug(f"Scripted rule {index} answered {request.role.value} request")
            return rule.response
        raise BackendError(
            f"no scripted rule matched the {request.role.value} request",
            kind=BackendErrorKind.NO_RULE_MATCHED,
            detail={"role": request.role.value},
        )

    def serves(self, role: Role) -> bool:
        return any(rule.role is None or rule.role == role for rule in self.rules)

    def session(self) -> "ScriptedBackend":
        return ScriptedBackend(self.rules)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        return cls(load_script(path))


def new_scripted(rules: list[ScriptRule] | list[dict[str, Any]]) -> ScriptedBackend:
    return ScriptedBackend([ScriptRule.model_validate(rule) for rule in rules])


def load_script(path: str | Path) -> list[ScriptRule]:
    """read a YAML rule file: either a bare list or a mapping with a `rules` list"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise SchemaError(f"cannot read script {path}: {e}", detail={"path": str(path)})

    raw = data.get("rules", []) if isinstance(data, dict) else data
    if not isinstance(raw, list):
        raise SchemaError(f"script {path} must hold a list of rules", detail={"path": str(path)})

    rules = []
    for index, item in enumerate(raw):
        try:
            rules.append(ScriptRule.model_validate(item))
        except ValidationError as e:
            raise SchemaError(
                f"invalid rule {index} in {path}: {e.errors()[0]['msg']}",
                detail={"path": str(path), "location": f"rules[{index}]"},
            )
    return rules
