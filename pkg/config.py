import logging
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


class Settings:
    LLM_ENDPOINT: str = os.getenv("LLM_ENDPOINT", "http://localhost:11434/v1")
    LLM_API_KEY: str = os.getenv("LLM_API_KEY", "")
    LLM_MODEL: str = os.getenv("LLM_MODEL", "qwen2.5:72b-instruct")

    # per-role overrides, empty means LLM_MODEL
    OBSERVER_MODEL: str = os.getenv("OBSERVER_MODEL", "")
    SUMMARIZER_MODEL: str = os.getenv("SUMMARIZER_MODEL", "")
    PLANNER_MODEL: str = os.getenv("PLANNER_MODEL", "")
    CRITIC_MODEL: str = os.getenv("CRITIC_MODEL", "")

    LLM_TIMEOUT: float = float(os.getenv("LLM_TIMEOUT", "60"))
    LLM_MAX_RETRIES: int = int(os.getenv("LLM_MAX_RETRIES", "2"))
    LLM_BACKOFF: float = float(os.getenv("LLM_BACKOFF", "0.5"))

    HISTORY_CAPACITY: int = int(os.getenv("HISTORY_CAPACITY", "32"))
    MAX_STEPS: int = int(os.getenv("MAX_STEPS", "50"))
    MAX_REJECTIONS: int = int(os.getenv("MAX_REJECTIONS", "3"))
    MAX_PLAN_RETRIES: int = int(os.getenv("MAX_PLAN_RETRIES", "1"))

    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "runs")
    WORKERS: int = int(os.getenv("WORKERS", "4"))

    DEBUG: bool = os.getenv("DEBUG", "false").lower() in ("true", "1", "yes")
    REMOTE_SMOKE: bool = os.getenv("REMOTE_SMOKE", "false").lower() in ("true", "1", "yes")

    def role_models(self) -> dict[str, str]:
        overrides = {
            "observer": self.OBSERVER_MODEL,
            "summarizer": self.SUMMARIZER_MODEL,
            "planner": self.PLANNER_MODEL,
            "critic": self.CRITIC_MODEL,
        }
        return {role: model for role, model in overrides.items() if model}

    @classmethod
    def ensure_output_dir(cls, path: str | None = None) -> Path:
        out = Path(path or cls.OUTPUT_DIR)
        out.mkdir(parents=True, exist_ok=True)
        return out


settings = Settings()

_QUIET_LOGGERS = ("httpcore", "httpx", "LiteLLM")


def configure_logging(debug: bool) -> None:
    if debug:
        fmt = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
        logging.basicConfig(level=logging.DEBUG, format=fmt)
    else:
        logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(message)s")
        # per-step world transitions are only useful when debugging
        logging.getLogger("lib.world.simulator").setLevel(logging.WARNING)
    for name in _QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)


configure_logging(settings.DEBUG)
