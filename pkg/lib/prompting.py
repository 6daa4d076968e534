import logging
from typing import Any

from lib.backends.base import ChatBackend, ChatMessage, ChatRequest, MessageRole, Role
from lib.prompts import prompt_registry
from lib.template_renderer import render_template

logger = logging.getLogger(__name__)


def build_request(
    backend: ChatBackend, role: Role, context: dict[str, Any], note: str | None = None
) -> ChatRequest:
    """render the role prompt; `note` is appended to the user message on retries"""
    prompt = prompt_registry.get(role.value)
    system = render_template(prompt.system, context)
    user = render_template(prompt.user, context)
    if note:
        user = f"{user}\n\n{note}"
    return ChatRequest(
        role=role,
        messages=[
            ChatMessage(role=MessageRole.SYSTEM, content=system),
            ChatMessage(role=MessageRole.USER, content=user),
        ],
        model=backend.model_for(role),
        temperature=prompt.temperature,
        max_tokens=prompt.max_tokens,
    )


async def ask(
    backend: ChatBackend, role: Role, context: dict[str, Any], note: str | None = None
) -> str:
    request = build_request(backend, role, context, note)
    logger.debug(f"{role.value} prompt:\n{request.final_user_message}")
    text = await backend.complete(request)
    logger.debug(f"{role.value} response:\n{text}")
    return text
