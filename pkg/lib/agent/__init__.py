from lib.agent.controller import MilestoneTracker, RoleBackends, run_episode
from lib.agent.critic import CriticCategory, CriticVerdict, critique, rule_critic
from lib.agent.planner import Plan, PlanningMode, plan
from lib.agent.trace import (
    EpisodeOutcome,
    EpisodeStatus,
    EpisodeTrace,
    TraceEvent,
    TraceRecord,
)

__all__ = [
    "CriticCategory",
    "CriticVerdict",
    "EpisodeOutcome",
    "EpisodeStatus",
    "EpisodeTrace",
    "MilestoneTracker",
    "Plan",
    "PlanningMode",
    "RoleBackends",
    "TraceEvent",
    "TraceRecord",
    "critique",
    "plan",
    "rule_critic",
    "run_episode",
]
