import asyncio

from lib.agent.controller import RoleBackends, run_episode
from lib.backends.scripted import ScriptedBackend
from lib.harness.suite import DEFAULT_SUITE, load_suite
from models import AgentVariant

TASK_ID = "integration-2"
SEED = 0
VARIANT = AgentVariant.CLOSED_LOOP


async def main() -> None:
    suite = load_suite(DEFAULT_SUITE)
    task = next(t for t in suite.tasks if t.id == TASK_ID)
    script = suite.script_path(task)
    assert script is not None

    backends = RoleBackends.from_backend(ScriptedBackend.from_file(script))
    outcome, trace = await run_episode(suite.world_for(task, SEED), task, VARIANT, backends)

    for record in trace.records:
        if record.event.value in ("plan", "critique", "skip", "execute", "milestone"):
            print(f"[{record.step:02d}] {record.event.value}: {record.data}")
    print(f"outcome: {outcome.model_dump()}")


if __name__ == "__main__":
    asyncio.run(main())
