"""
Task suites: JSON files listing tasks, their worlds, milestones and trial conditions
"""

import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, ValidationError

from lib.errors import ConfigError, SchemaError
from lib.world import CONFIGS_DIR
from lib.world.models import WorldConfig
from lib.world.predicates import check_predicate
from lib.world.simulator import load_world_file
from models import TaskSpec

DEFAULT_SUITE = Path(__file__).parent / "suites" / "default" / "suite.json"


class Suite(BaseModel):
    name: str = "suite"
    trials_per_task: int = Field(default=3, ge=1)
    tasks: list[TaskSpec] = Field(..., min_length=1)
    base_dir: Path = Field(default=Path("."), exclude=True)
    worlds: dict[str, WorldConfig] = Field(default_factory=dict, exclude=True)

    def planned_trials(self, base_seed: int = 0) -> list[tuple[TaskSpec, int]]:
        return [
            (task, base_seed + offset)
            for task in self.tasks
            for offset in range(self.trials_per_task)
        ]

    def world_for(self, task: TaskSpec, seed: int) -> WorldConfig:
        """the task's world with the seed's trial condition and all perturbations applied"""
        condition = task.condition_for(seed)
        world = self.worlds[task.world].with_overrides(
            placements=condition.placements,
            open_containers=condition.open_containers,
            robot_starts=condition.robot_starts,
            perturbations=task.perturbations + condition.perturbations,
        )
        world.check_references()
        return world

    def script_path(self, task: TaskSpec) -> Path | None:
        return self.base_dir / task.script if task.script else None


def _location(error: dict[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"])


def resolve_world(ref: str, base_dir: Path) -> WorldConfig:
    """a world ref is a JSON path relative to the suite, or the name of a bundled config"""
    candidates = [base_dir / ref, CONFIGS_DIR / f"{ref}.json"]
    for path in candidates:
        if path.is_file():
            return load_world_file(str(path))
    raise SchemaError(f"world config '{ref}' not found", detail={"world": ref})


def load_suite(path: str | Path) -> Suite:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise SchemaError(f"cannot read suite {path}: {e}", detail={"path": str(path)})
    except json.JSONDecodeError as e:
        raise SchemaError(
            f"suite {path} is not valid JSON: {e.msg}",
            detail={"path": str(path), "location": f"line {e.lineno}"},
        )

    try:
        suite = Suite.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise SchemaError(
            f"invalid suite {path} at {_location(first)}: {first['msg']}",
            detail={"path": str(path), "location": _location(first)},
        )

    suite.base_dir = path.parent
    ids = [task.id for task in suite.tasks]
    for index, task in enumerate(suite.tasks):
        where = f"tasks.{index}"
        if ids.count(task.id) > 1:
            raise SchemaError(f"duplicate task id '{task.id}'", detail={"location": f"{where}.id"})
        try:
            if task.world not in suite.worlds:
                suite.worlds[task.world] = resolve_world(task.world, suite.base_dir)
            world = suite.worlds[task.world]
            for pred in task.milestones + task.goal:
                check_predicate(pred, world)
            for seed in range(len(task.conditions)):
                suite.world_for(task, seed)
        except (ConfigError, SchemaError) as e:
            raise SchemaError(
                f"task '{task.id}': {e.message}", detail={"location": where, **e.detail}
            )
        script = suite.script_path(task)
        if script is not None and not script.is_file():
            raise SchemaError(
                f"task '{task.id}' references missing script '{task.script}'",
                detail={"location": f"{where}.script"},
            )
    return suite
