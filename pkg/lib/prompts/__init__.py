"""
Role prompts, one YAML file per agent role
"""

import logging
from pathlib import Path

import yaml  # type: ignore[import-untyped]
from pydantic import BaseModel, Field, ValidationError

from lib.errors import ConfigError

logger = logging.getLogger(__name__)


class PromptTemplate(BaseModel):
    name: str
    description: str = ""
    system: str
    user: str
    temperature: float = Field(default=0.2, ge=0.0, le=2.0)
    max_tokens: int = Field(default=1024, ge=1)


class PromptRegistry:
    """Registry for role prompt templates"""

    def __init__(self, prompts_dir: Path | None = None):
        if prompts_dir is None:
            prompts_dir = Path(__file__).parent
        self.prompts_dir = prompts_dir
        self._prompts: dict[str, PromptTemplate] = {}
        self._load_prompts()

    def _load_prompts(self) -> None:
        for prompt_file in sorted(self.prompts_dir.glob("*.yaml")):
            try:
                with open(prompt_file, "r", encoding="utf-8") as f:
                    data = yaml.safe_load(f)
                self._prompts[prompt_file.stem] = PromptTemplate.model_validate(data)
            except (OSError, yaml.YAMLError, ValidationError) as e:
                logger.warning(f"Skipping prompt file {prompt_file.name}: {e}")

    def list_prompts(self) -> list[str]:
        return sorted(self._prompts)

    def get(self, role: str) -> PromptTemplate:
        prompt = self._prompts.get(role)
        if prompt is None:
            raise ConfigError(f"no prompt registered for role '{role}'", detail={"role": role})
        return prompt


# Singleton instance
prompt_registry = PromptRegistry()
