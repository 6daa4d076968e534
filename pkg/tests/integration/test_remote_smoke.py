import pytest

from config import settings
from lib.agent.controller import RoleBackends, run_episode
from lib.agent.trace import EpisodeStatus, TraceEvent
from lib.backends.remote import endpoint_from_settings, new_remote
from lib.harness import DEFAULT_SUITE, load_suite
from models import AgentVariant, Budgets

pytestmark = pytest.mark.skipif(
    not settings.REMOTE_SMOKE, reason="set REMOTE_SMOKE=true with a reachable LLM_ENDPOINT"
)


@pytest.mark.integration
@pytest.mark.asyncio
async def test_search_task_against_remote_endpoint():
    """one closed-loop search episode against the configured endpoint"""
    suite = load_suite(DEFAULT_SUITE)
    task = next(t for t in suite.tasks if t.id == "search")
    backend = new_remote(endpoint_from_settings())
    outcome, trace = await run_episode(
        suite.world_for(task, 1),
        task,
        AgentVariant.CLOSED_LOOP,
        RoleBackends.from_backend(backend),
        Budgets(max_steps=20),
    )

    assert outcome.status != EpisodeStatus.INFRASTRUCTURE_FAILURE
    assert trace.events(TraceEvent.PLAN) or trace.events(TraceEvent.PLAN_ERROR)
    print(f"Remote episode: {outcome.status.value} score {outcome.score}/{outcome.max_score}")


@pytest.mark.integration
@pytest.mark.asyncio
async def test_remote_backend_answers_planner_prompt():
    """the planner prompt gets a non-empty answer"""
    from lib.backends.base import Role
    from lib.prompting import ask

    backend = new_remote(endpoint_from_settings())
    context = {
        "task": "Find the water.",
        "mode": "closed-loop",
        "step": 0,
        "robots": ["robot1 (mobile, holds up to 2)"],
        "catalog": "- go_to(robot, navi_point): robot navigate to navigation point",
        "belief": None,
        "observation": "robot1 is at table. apple is on table.",
        "critic": None,
        "last_feedback": None,
        "abandoned": None,
    }
    text = await ask(backend, Role.PLANNER, context)
    assert len(text) > 0
    print(f"Planner response: {text}")
