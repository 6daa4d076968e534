"""
Custom exceptions for simulation, agent and harness execution
"""

from enum import Enum
from typing import Any


class KitchenLoopError(Exception):
    """Base exception for all kitchenloop errors"""

    def __init__(self, message: str, detail: dict[str, Any] | None = None):
        self.message = message
        self.detail: dict[str, Any] = detail or {}
        super().__init__(self.message)


class ConfigError(KitchenLoopError):
    """Raised when a world or endpoint config is invalid or has a dangling reference"""

    pass


class SchemaError(KitchenLoopError):
    """Raised when a suite or script file does not match its schema"""

    pass


class UnknownEntityError(KitchenLoopError):
    """Raised by world queries when a token is not part of the config"""

    pass


class BackendErrorKind(str, Enum):
    TIMEOUT = "timeout"
    HTTP = "http"
    NO_RULE_MATCHED = "no_rule_matched"
    MALFORMED = "malformed"


class BackendError(KitchenLoopError):
    """Raised when a chat backend cannot produce a response"""

    def __init__(
        self,
        message: str,
        kind: BackendErrorKind,
        status: int | None = None,
        detail: dict[str, Any] | None = None,
    ):
        self.kind = kind
        self.status = status
        super().__init__(message, detail={"kind": kind.value, "status": status, **(detail or {})})


class PlanError(KitchenLoopError):
    """Raised when the planner response stays unparseable after retries"""

    pass


class InvalidCapacityError(KitchenLoopError):
    """Raised when a history buffer is created with capacity < 1"""

    pass


class NonMonotonicStepError(KitchenLoopError):
    """Raised when a history entry does not advance the step index"""

    pass


class EmptyResultsError(KitchenLoopError):
    """Raised when metrics are requested for an empty result set"""

    pass


class ReplayError(KitchenLoopError):
    """Raised when a stored trace cannot be replayed"""

    pass
