"""
Test configuration and fixtures
"""

import asyncio
import os

import pytest

os.environ["DEBUG"] = "false"


@pytest.fixture(scope="session", autouse=True)
def event_loop_policy():
    """set event loop policy to avoid hanging"""
    asyncio.set_event_loop_policy(asyncio.DefaultEventLoopPolicy())


MINI_WORLD = {
    "name": "mini",
    "objects": [
        {"token": "apple", "place": "table"},
        {"token": "cup", "place": "box"},
    ],
    "containers": [{"token": "box", "open": False}],
    "spaces": ["table", "sink"],
    "devices": [],
    "navpoints": ["table", "sink", "box"],
    "robots": [
        {"token": "r1", "mobile": True, "hand_capacity": 1, "start": "table"},
        {"token": "r2", "mobile": False, "hand_capacity": 1, "start": "sink"},
    ],
}


@pytest.fixture
def mini_world():
    """2 robots, 2 objects, 1 container, 2 spaces"""
    from lib.world.models import WorldConfig

    return WorldConfig.model_validate(MINI_WORLD)


@pytest.fixture
def kitchen():
    """bundled kitchen config"""
    from lib.world import CONFIGS_DIR
    from lib.world.simulator import load_world_file

    return load_world_file(str(CONFIGS_DIR / "kitchen.json"))


@pytest.fixture
def default_suite():
    from lib.harness.suite import DEFAULT_SUITE, load_suite

    return load_suite(DEFAULT_SUITE)


def make_entry(step, action, status="Ok", kind=None, message="", observation=""):
    """history entry with world-style feedback"""
    from lib.memory import EntryFeedback, HistoryEntry

    return HistoryEntry(
        step=step,
        observation=observation,
        action=action,
        feedback=EntryFeedback(status=status, kind=kind, message=message),
    )


def llm_reply(content):
    """litellm-shaped completion with a single message"""
    from unittest.mock import MagicMock

    return MagicMock(choices=[MagicMock(message=MagicMock(content=content))])
