import asyncio
import logging
import os
import re
from typing import Any

import litellm

from config import settings
from lib.backends.base import ChatBackend, ChatRequest, Role
from lib.errors import BackendError, BackendErrorKind, ConfigError
from models import EndpointConfig

logger = logging.getLogger(__name__)

_RETRYABLE_STATUS = {408, 409, 429}


class RemoteBackend(ChatBackend):
    """OpenAI-compatible chat endpoint called through litellm"""

    name = "remote"

    def __init__(self, config: EndpointConfig):
        self.config = config

    def model_for(self, role: Role) -> str:
        assert self.config.model is not None
        return self.config.role_models.get(role.value, self.config.model)

    def _route(self, model: str) -> dict[str, Any]:
        base_url = self.config.base_url or ""
        # ollama wants its own provider prefix and the bare host as api_base
        if "11434" in base_url and "/" not in model:
            api_base = re.sub(r"/(v1/chat/completions|v1|api/generate).*$", "", base_url)
            return {"model": f"ollama/{model}", "api_base": api_base}
        api_key = os.getenv(self.config.api_key_env, "") or settings.LLM_API_KEY
        return {
            "model": model,
            "custom_llm_provider": "openai",
            "api_base": base_url,
            "api_key": api_key or "none",
        }

    async def complete(self, request: ChatRequest) -> str:
        model = request.model if request.model != "default" else self.model_for(request.role)
        route = self._route(model)
        messages = [m.model_dump(mode="json") for m in request.messages]
        attempts = self.config.max_retries + 1

        for attempt in range(attempts):
            try:
                logger.info(
                    f"Calling LiteLLM for {request.role.value} with model={route['model']} "
                    f"(attempt {attempt + 1}/{attempts})"
                )
                response = await litellm.acompletion(
                    messages=messages,
                    temperature=request.temperature,
                    max_tokens=request.max_tokens,
                    timeout=self.config.timeout,
                    **route,
                )
                content = response.choices[0].message.content
            except Exception as e:
                error = _classify(e)
                if attempt + 1 < attempts and _retryable(error):
                    delay = self.config.backoff * (2**attempt)
                    logger.warning(f"{error.message}, retrying in {delay:.2f}s")
                    await asyncio.sleep(delay)
                    continue
                raise error

            if not isinstance(content, str) or not content.strip():
                raise BackendError(
                    "endpoint returned an empty completion", kind=BackendErrorKind.MALFORMED
                )
            return content

        raise BackendError("no attempts were made", kind=BackendErrorKind.MALFORMED)


def _classify(e: Exception) -> BackendError:
    if isinstance(e, BackendError):
        return e
    if isinstance(e, (litellm.Timeout, asyncio.TimeoutError, TimeoutError)):
        return BackendError(f"request timed out: {e}", kind=BackendErrorKind.TIMEOUT)
    status = getattr(e, "status_code", None)
    if isinstance(status, int):
        return BackendError(
            f"endpoint returned HTTP {status}", kind=BackendErrorKind.HTTP, status=status
        )
    if isinstance(e, (AttributeError, IndexError, KeyError, TypeError)):
        return BackendError(f"malformed completion: {e}", kind=BackendErrorKind.MALFORMED)
    return BackendError(f"endpoint request failed: {e}", kind=BackendErrorKind.HTTP)


def _retryable(error: BackendError) -> bool:
    if error.kind == BackendErrorKind.TIMEOUT:
        return True
    if error.kind != BackendErrorKind.HTTP:
        return False
    return error.status is None or error.status >= 500 or error.status in _RETRYABLE_STATUS


def new_remote(config: EndpointConfig) -> RemoteBackend:
    if not config.base_url:
        raise ConfigError("remote backend needs a base_url", detail={"field": "base_url"})
    if not config.model:
        raise ConfigError("remote backend needs a model", detail={"field": "model"})
    return RemoteBackend(config)


def endpoint_from_settings(
    base_url: str | None = None, model: str | None = None
) -> EndpointConfig:
    return EndpointConfig(
        base_url=base_url or settings.LLM_ENDPOINT,
        model=model or settings.LLM_MODEL,
        timeout=settings.LLM_TIMEOUT,
        max_retries=settings.LLM_MAX_RETRIES,
        backoff=settings.LLM_BACKOFF,
        role_models=settings.role_models(),
    )
