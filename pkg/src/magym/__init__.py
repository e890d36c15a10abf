"""magym: a deterministic, seedable simulator and evaluation harness for
autonomous workflow management with manager, worker, and stakeholder agents."""

from .actions import ManagerAction, StakeholderAction, observe
from .engine import Engine, EpisodeConfig, run_episode
from .evaluation import MetricReport, aggregate, compute_metrics
from .model import (
    Artifact,
    Constraint,
    Deliverable,
    Message,
    PreferenceVector,
    Task,
    TaskDraft,
    TaskGraph,
    TaskStatus,
    Worker,
    WorkerKind,
    WorkflowError,
    WorkflowState,
)
from .policies import (
    AssignAllPolicy,
    GreedyPolicy,
    PolicySpec,
    RandomPolicy,
    ScriptedStakeholderPolicy,
    StakeholderScript,
)
from .scenario import (
    ScenarioDoc,
    bundled_scenarios,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    validate_scenario,
)
from .trace import Trace, read_trace

__version__ = "0.1.0"

__all__ = [
    "Artifact",
    "AssignAllPolicy",
    "Constraint",
    "Deliverable",
    "Engine",
    "EpisodeConfig",
    "GreedyPolicy",
    "ManagerAction",
    "Message",
    "MetricReport",
    "PolicySpec",
    "PreferenceVector",
    "RandomPolicy",
    "ScenarioDoc",
    "ScriptedStakeholderPolicy",
    "StakeholderAction",
    "StakeholderScript",
    "Task",
    "TaskDraft",
    "TaskGraph",
    "TaskStatus",
    "Trace",
    "Worker",
    "WorkerKind",
    "WorkflowError",
    "WorkflowState",
    "aggregate",
    "bundled_scenarios",
    "compute_metrics",
    "load_scenario",
    "observe",
    "parse_scenario",
    "read_trace",
    "run_episode",
    "serialize_scenario",
    "validate_scenario",
]
