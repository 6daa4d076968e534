"""
mock chat-completions server answering from a scripted rule file
run: MOCK_SCRIPT=lib/harness/suites/default/scripts/search.yaml python3 mock_llm.py
then run the cli with --backend remote --endpoint http://localhost:8001/v1 --model mock
"""

import os
from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from lib.backends.base import ChatMessage, ChatRequest, Role
from lib.backends.scripted import ScriptedBackend, ScriptRule, load_script
from lib.errors import BackendError

# requests are tagged with a role by the agent prompts, recovered from the system message
_ROLE_HINTS = {
    "You plan for": Role.PLANNER,
    "You check a single robot action": Role.CRITIC,
    "You keep the memory": Role.SUMMARIZER,
    "You describe what": Role.OBSERVER,
}


class CompletionRequest(BaseModel):
    model: str
    messages: list[ChatMessage]
    temperature: float | None = None
    max_tokens: int | None = None


def _role_of(messages: list[ChatMessage]) -> Role:
    system = next((m.content for m in messages if m.role.value == "system"), "")
    for hint, role in _ROLE_HINTS.items():
        if system.startswith(hint):
            return role
    return Role.PLANNER


def create_app(rules: list[ScriptRule]) -> FastAPI:
    app = FastAPI()
    backend = ScriptedBackend(rules)

    @app.post("/v1/chat/completions")
    async def chat_completions(request: CompletionRequest) -> dict[str, Any]:
        chat = ChatRequest(
            role=_role_of(request.messages),
            messages=request.messages,
            model=request.model,
            temperature=request.temperature if request.temperature is not None else 0.2,
        )
        try:
            content = await backend.complete(chat)
        except BackendError as e:
            raise HTTPException(status_code=422, detail=e.message)
        return {
            "id": "mock-completion",
            "object": "chat.completion",
            "model": request.model,
            "choices": [
                {
                    "index": 0,
                    "message": {"role": "assistant", "content": content},
                    "finish_reason": "stop",
                }
            ],
            "usage": {"prompt_tokens": 0, "completion_tokens": 0, "total_tokens": 0},
        }

    return app


def _script_rules() -> list[ScriptRule]:
    path = os.getenv("MOCK_SCRIPT")
    return load_script(path) if path else []


app = create_app(_script_rules())


if __name__ == "__main__":
    import uvicorn

    print("starting mock llm server on http://localhost:8001")
    print("use --backend remote --endpoint http://localhost:8001/v1")
    uvicorn.run(app, host="0.0.0.0", port=8001)
