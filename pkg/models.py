from enum import Enum

from pydantic import BaseModel, Field, model_validator

from lib.world.models import PerturbationEvent
from lib.world.predicates import Predicate


class AgentVariant(str, Enum):
    CLOSED_LOOP = "clea"
    NO_CRITIC = "no_critic"
    OPEN_LOOP_BASELINE = "open_loop_baseline"


class Budgets(BaseModel):
    max_steps: int = Field(default=50, ge=1)
    max_rejections: int = Field(default=3, ge=1, description="Consecutive critic rejections")
    max_plan_retries: int = Field(default=1, ge=1)


class TaskFamily(str, Enum):
    SEARCH = "search"
    MANIPULATION = "manipulation"
    INTEGRATION = "integration"


class TrialCondition(BaseModel):
    label: str = "default"
    placements: dict[str, str] = Field(default_factory=dict)
    open_containers: list[str] = Field(default_factory=list)
    robot_starts: dict[str, str] = Field(default_factory=dict)
    perturbations: list[PerturbationEvent] = Field(default_factory=list)


class TaskSpec(BaseModel):
    id: str
    family: TaskFamily
    instruction: str
    world: str = Field(..., description="World config file or bundled config name")
    milestones: list[Predicate] = Field(..., min_length=1)
    goal: list[Predicate] = Field(
        default_factory=list, description="Must hold at once, on top of every latched milestone"
    )
    perturbations: list[PerturbationEvent] = Field(default_factory=list)
    conditions: list[TrialCondition] = Field(default_factory=lambda: [TrialCondition()])
    script: str | None = Field(default=None, description="Scripted backend rule file")

    @property
    def max_score(self) -> int:
        return len(self.milestones)

    def condition_for(self, seed: int) -> TrialCondition:
        return self.conditions[seed % len(self.conditions)]


class FailureClass(str, Enum):
    NONE = "none"
    INVALID_ACTIONS = "invalid_actions"
    CRITIC_FAILURE = "critic_failure"
    MULTI_ROBOT = "multi_robot"
    BUDGET_EXHAUSTED = "budget_exhausted"
    INFRASTRUCTURE = "infrastructure"


class TrialResult(BaseModel):
    task_id: str
    family: TaskFamily
    variant: AgentVariant
    seed: int
    condition: str = "default"
    success: bool
    score: int = Field(..., ge=0)
    max_score: int = Field(..., ge=1)
    steps_used: int = Field(..., ge=0)
    failure_class: FailureClass = FailureClass.NONE
    final_digest: str = ""
    error: str | None = None

    @model_validator(mode="after")
    def _success_scores_full(self) -> "TrialResult":
        if self.success and self.score != self.max_score:
            raise ValueError("a successful trial scores every milestone")
        if self.score > self.max_score:
            raise ValueError("score exceeds max_score")
        return self


class MetricRow(BaseModel):
    variant: AgentVariant
    family: str
    trials: int
    successes: int
    success_rate: float = Field(..., ge=0.0, le=1.0)
    average_score: float
    max_score: int


class Metrics(BaseModel):
    rows: list[MetricRow]

    def get(self, variant: AgentVariant, family: str = "overall") -> MetricRow | None:
        return next((r for r in self.rows if r.variant == variant and r.family == family), None)


class EndpointConfig(BaseModel):
    base_url: str | None = None
    model: str | None = None
    api_key_env: str = Field(
        default="LLM_API_KEY", description="Environment variable holding the key"
    )
    timeout: float = Field(default=60.0, gt=0)
    max_retries: int = Field(default=2, ge=0)
    backoff: float = Field(default=0.5, ge=0.0, description="Base delay, doubled per retry")
    role_models: dict[str, str] = Field(default_factory=dict)
