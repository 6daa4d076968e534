from abc import ABC, abstractmethod
from enum import Enum

from pydantic import BaseModel, Field


class Role(str, Enum):
    OBSERVER = "observer"
    SUMMARIZER = "summarizer"
    PLANNER = "planner"
    CRITIC = "critic"


class MessageRole(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class ChatMessage(BaseModel):
    role: MessageRole
    content: str = Field(..., min_length=1)


class ChatRequest(BaseModel):
    role: Role
    messages: list[ChatMessage] = Field(..., min_length=1)
    model: str = "default"
    temperature: float = Field(default=0.2, ge=0.0, le=2.0)
    max_tokens: int | None = Field(default=None, ge=1)

    @property
    def final_user_message(self) -> str:
        for message in reversed(self.messages):
            if message.role == MessageRole.USER:
                return message.content
        return ""


class ChatBackend(ABC):
    """one chat-completion endpoint shared by the agent roles"""

    name: str = "backend"

    @abstractmethod
    async def complete(self, request: ChatRequest) -> str:
        """return the assistant text or raise BackendError"""
        pass

    def model_for(self, role: Role) -> str:
        return "default"

    def serves(self, role: Role) -> bool:
        """whether calls for this role should go to the backend at all"""
        return True

    def session(self) -> "ChatBackend":
        """a backend whose per-episode state starts fresh"""
        return self
