"""Scenario documents: strict JSON parsing, validation, canonical serialization.

A scenario declares the initial workflow (tasks, edges, team, constraints),
the stakeholder's preference schedule, execution-model overrides, and default
episode config. Constraint predicates use a closed vocabulary evaluated by the
evaluation module; free-text constraints are out of scope.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .model import (
    Constraint,
    Deliverable,
    PreferenceVector,
    SubtaskTemplate,
    TaskDraft,
    Worker,
    WorkerKind,
    WorkflowError,
    WorkflowState,
)

PREDICATE_TYPES = {
    "task_completed_by": {"task_id": str, "timestep": int},
    "artifact_exists_for": {"task_id": str},
    "no_assignment_of_kind": {"worker_kind": str, "task_id": (str, type(None))},
    "message_sent_before": {"receiver": str, "timestep": int},
    "budget_below": {"amount": (int, float)},
}

END_APPROVAL_RULES = ("always", "never", "when_deliverables_complete")

DELIVERABLE_COUNT_RANGE = (10, 25)


class ScenarioError(Exception):
    """Scenario document cannot be parsed or fails validation."""


@dataclass
class Diagnostic:
    severity: str  # error | warning
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


@dataclass
class ScheduleEntry:
    timestep: int
    weights: dict[str, float]


@dataclass
class StakeholderSpec:
    reply_latency: int = 2
    end_approval: str = "when_deliverables_complete"


@dataclass
class ExecutionProfile:
    """Stochasticity knobs for worker execution."""

    duration_sigma: float = 0.0
    quality_noise: float = 0.0
    human_latency_multiplier: float = 1.0
    hours_per_timestep: float = 1.0


@dataclass
class EpisodeDefaults:
    max_manager_actions: int = 100
    max_timesteps: int = 100
    worker_capacity: int = 1


@dataclass
class ScenarioDoc:
    id: str
    title: str
    domain: str
    tasks: list[TaskDraft] = field(default_factory=list)
    edges: list[tuple[str, str]] = field(default_factory=list)
    decomposition_templates: dict[str, list[SubtaskTemplate]] = field(default_factory=dict)
    workers: list[Worker] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    preference_schedule: list[ScheduleEntry] = field(default_factory=list)
    stakeholder: StakeholderSpec = field(default_factory=StakeholderSpec)
    execution: ExecutionProfile = field(default_factory=ExecutionProfile)
    config: EpisodeDefaults = field(default_factory=EpisodeDefaults)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "title": self.title,
            "domain": self.domain,
            "tasks": [
                {
                    "id": t.id,
                    "name": t.name,
                    "description": t.description,
                    "estimated_hours": float(t.estimated_hours),
                    "estimated_cost": float(t.estimated_cost),
                    "required_skills": list(t.required_skills),
                    "deliverable": None
                    if t.deliverable is None
                    else {
                        "tier": t.deliverable.tier,
                        "points": float(t.deliverable.points),
                        "scoring": t.deliverable.scoring,
                    },
                }
                for t in self.tasks
            ],
            "edges": [list(e) for e in self.edges],
            "decomposition_templates": {
                tid: [
                    {
                        "name": s.name,
                        "description": s.description,
                        "estimated_hours": float(s.estimated_hours),
                        "estimated_cost": float(s.estimated_cost),
                        "required_skills": list(s.required_skills),
                        "after": list(s.after),
                    }
                    for s in subs
                ]
                for tid, subs in sorted(self.decomposition_templates.items())
            },
            "workers": [
                {
                    "id": w.id,
                    "kind": w.kind.value,
                    "capabilities": {k: float(v) for k, v in sorted(w.capabilities.items())},
                    "cost_rate": float(w.cost_rate),
                    "join_timestep": w.join_timestep,
                    "leave_timestep": w.leave_timestep,
                }
                for w in self.workers
            ],
            "constraints": [
                {
                    "id": c.id,
                    "kind": c.kind,
                    "description": c.description,
                    "predicate": dict(c.predicate),
                    "penalty_weight": None if c.penalty_weight is None else float(c.penalty_weight),
                }
                for c in self.constraints
            ],
            "preference_schedule": [
                {"timestep": e.timestep, "weights": {k: float(v) for k, v in sorted(e.weights.items())}}
                for e in self.preference_schedule
            ],
            "stakeholder": {
                "reply_latency": self.stakeholder.reply_latency,
                "end_approval": self.stakeholder.end_approval,
            },
            "execution": {
                "duration_sigma": float(self.execution.duration_sigma),
                "quality_noise": float(self.execution.quality_noise),
                "human_latency_multiplier": float(self.execution.human_latency_multiplier),
                "hours_per_timestep": float(self.execution.hours_per_timestep),
            },
            "config": {
                "max_manager_actions": self.config.max_manager_actions,
                "max_timesteps": self.config.max_timesteps,
                "worker_capacity": self.config.worker_capacity,
            },
        }


# ----- strict parsing -------------------------------------------------


def _strict(obj: Any, path: str, allowed: set[str]) -> dict[str, Any]:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(f"{path}: unknown field(s) {sorted(unknown)}")
    return obj


def _get(obj: dict, path: str, key: str, types: Any, default: Any = ...) -> Any:
    if key not in obj or obj[key] is None:
        if default is ...:
            raise ScenarioError(f"{path}: missing required field {key!r}")
        return copy.deepcopy(default)
    value = obj[key]
    if types is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, types) or (types in (int, float) and isinstance(value, bool)):
        raise ScenarioError(f"{path}.{key}: wrong type")
    return value


def parse_scenario(text: str) -> ScenarioDoc:
    """Parse a scenario document; rejects unknown fields and bad references."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return scenario_from_dict(raw)


def scenario_from_dict(raw: Any) -> ScenarioDoc:
    top = _strict(
        raw,
        "scenario",
        {
            "id",
            "title",
            "domain",
            "tasks",
            "edges",
            "decomposition_templates",
            "workers",
            "constraints",
            "preference_schedule",
            "stakeholder",
            "execution",
            "config",
        },
    )
    doc = ScenarioDoc(
        id=_get(top, "scenario", "id", str),
        title=_get(top, "scenario", "title", str),
        domain=_get(top, "scenario", "domain", str, ""),
    )

    for i, item in enumerate(_get(top, "scenario", "tasks", list, [])):
        path = f"tasks[{i}]"
        obj = _strict(
            item,
            path,
            {"id", "name", "description", "estimated_hours", "estimated_cost", "required_skills", "deliverable"},
        )
        deliverable = None
        if obj.get("deliverable") is not None:
            dpath = f"{path}.deliverable"
            dobj = _strict(obj["deliverable"], dpath, {"tier", "points", "scoring"})
            deliverable = Deliverable(
                tier=_get(dobj, dpath, "tier", str),
                points=_get(dobj, dpath, "points", float),
                scoring=_get(dobj, dpath, "scoring", str, "binary"),
            )
        skills = _get(obj, path, "required_skills", list, [])
        if not all(isinstance(s, str) for s in skills):
            raise ScenarioError(f"{path}.required_skills: entries must be strings")
        doc.tasks.append(
            TaskDraft(
                id=_get(obj, path, "id", str),
                name=_get(obj, path, "name", str),
                description=_get(obj, path, "description", str, ""),
                estimated_hours=_get(obj, path, "estimated_hours", float, 1.0),
                estimated_cost=_get(obj, path, "estimated_cost", float, 0.0),
                required_skills=list(skills),
                deliverable=deliverable,
            )
        )

    task_ids = {t.id for t in doc.tasks}
    for i, item in enumerate(_get(top, "scenario", "edges", list, [])):
        path = f"edges[{i}]"
        if not (isinstance(item, list) and len(item) == 2 and all(isinstance(x, str) for x in item)):
            raise ScenarioError(f"{path}: expected a [prereq_id, dep_id] pair")
        for endpoint in item:
            if endpoint not in task_ids:
                raise ScenarioError(f"{path}: unknown task id {endpoint!r}")
        doc.edges.append((item[0], item[1]))

    templates = _get(top, "scenario", "decomposition_templates", dict, {})
    for tid, subs in templates.items():
        path = f"decomposition_templates[{tid!r}]"
        if tid not in task_ids:
            raise ScenarioError(f"{path}: unknown task id {tid!r}")
        if not isinstance(subs, list):
            raise ScenarioError(f"{path}: expected a list of subtask templates")
        parsed_subs = []
        for j, sub in enumerate(subs):
            spath = f"{path}[{j}]"
            sobj = _strict(
                sub, spath, {"name", "description", "estimated_hours", "estimated_cost", "required_skills", "after"}
            )
            after = _get(sobj, spath, "after", list, [])
            if not all(isinstance(a, int) and not isinstance(a, bool) for a in after):
                raise ScenarioError(f"{spath}.after: entries must be integers")
            skills = _get(sobj, spath, "required_skills", list, [])
            if not all(isinstance(s, str) for s in skills):
                raise ScenarioError(f"{spath}.required_skills: entries must be strings")
            parsed_subs.append(
                SubtaskTemplate(
                    name=_get(sobj, spath, "name", str),
                    description=_get(sobj, spath, "description", str, ""),
                    estimated_hours=_get(sobj, spath, "estimated_hours", float, 1.0),
                    estimated_cost=_get(sobj, spath, "estimated_cost", float, 0.0),
                    required_skills=list(skills),
                    after=list(after),
                )
            )
        doc.decomposition_templates[tid] = parsed_subs

    for i, item in enumerate(_get(top, "scenario", "workers", list, [])):
        path = f"workers[{i}]"
        obj = _strict(
            item, path, {"id", "kind", "capabilities", "cost_rate", "join_timestep", "leave_timestep"}
        )
        kind = _get(obj, path, "kind", str)
        if kind not in (WorkerKind.AI.value, WorkerKind.SIMULATED_HUMAN.value):
            raise ScenarioError(f"{path}.kind: unknown worker kind {kind!r}")
        caps = _get(obj, path, "capabilities", dict, {})
        for skill, level in caps.items():
            if not isinstance(skill, str) or isinstance(level, bool) or not isinstance(level, (int, float)):
                raise ScenarioError(f"{path}.capabilities: skill->proficiency map expected")
        leave = obj.get("leave_timestep")
        if leave is not None and (isinstance(leave, bool) or not isinstance(leave, int)):
            raise ScenarioError(f"{path}.leave_timestep: wrong type")
        doc.workers.append(
            Worker(
                id=_get(obj, path, "id", str),
                kind=WorkerKind(kind),
                capabilities={k: float(v) for k, v in caps.items()},
                cost_rate=_get(obj, path, "cost_rate", float, 0.0),
                join_timestep=_get(obj, path, "join_timestep", int, 0),
                leave_timestep=leave,
            )
        )

    worker_ids = {w.id for w in doc.workers}
    for i, item in enumerate(_get(top, "scenario", "constraints", list, [])):
        path = f"constraints[{i}]"
        obj = _strict(item, path, {"id", "kind", "description", "predicate", "penalty_weight"})
        predicate = _get(obj, path, "predicate", dict)
        ptype = predicate.get("type")
        if ptype not in PREDICATE_TYPES:
            raise ScenarioError(f"{path}.predicate: unknown predicate type {ptype!r}")
        spec = PREDICATE_TYPES[ptype]
        unknown = set(predicate) - set(spec) - {"type"}
        if unknown:
            raise ScenarioError(f"{path}.predicate: unknown field(s) {sorted(unknown)}")
        for pkey, ptypes in spec.items():
            optional = isinstance(ptypes, tuple) and type(None) in ptypes
            if pkey not in predicate:
                if optional:
                    continue
                raise ScenarioError(f"{path}.predicate: missing field {pkey!r}")
            if not isinstance(predicate[pkey], ptypes):
                raise ScenarioError(f"{path}.predicate.{pkey}: wrong type")
        ref = predicate.get("task_id")
        if ref is not None and ref not in task_ids:
            raise ScenarioError(f"{path}.predicate: unknown task id {ref!r}")
        receiver = predicate.get("receiver")
        if receiver is not None and receiver != "stakeholder" and receiver not in worker_ids:
            raise ScenarioError(f"{path}.predicate: unknown receiver {receiver!r}")
        penalty = obj.get("penalty_weight")
        if penalty is not None and (isinstance(penalty, bool) or not isinstance(penalty, (int, float))):
            raise ScenarioError(f"{path}.penalty_weight: wrong type")
        doc.constraints.append(
            Constraint(
                id=_get(obj, path, "id", str),
                kind=_get(obj, path, "kind", str),
                description=_get(obj, path, "description", str, ""),
                predicate=dict(predicate),
                penalty_weight=None if penalty is None else float(penalty),
            )
        )

    for i, item in enumerate(_get(top, "scenario", "preference_schedule", list, [])):
        path = f"preference_schedule[{i}]"
        obj = _strict(item, path, {"timestep", "weights"})
        weights = _get(obj, path, "weights", dict)
        for name, w in weights.items():
            if not isinstance(name, str) or isinstance(w, bool) or not isinstance(w, (int, float)):
                raise ScenarioError(f"{path}.weights: objective->weight map expected")
        doc.preference_schedule.append(
            ScheduleEntry(
                timestep=_get(obj, path, "timestep", int),
                weights={k: float(v) for k, v in weights.items()},
            )
        )

    sh = _strict(top.get("stakeholder") or {}, "stakeholder", {"reply_latency", "end_approval"})
    doc.stakeholder = StakeholderSpec(
        reply_latency=_get(sh, "stakeholder", "reply_latency", int, 2),
        end_approval=_get(sh, "stakeholder", "end_approval", str, "when_deliverables_complete"),
    )

    ex = _strict(
        top.get("execution") or {},
        "execution",
        {"duration_sigma", "quality_noise", "human_latency_multiplier", "hours_per_timestep"},
    )
    doc.execution = ExecutionProfile(
        duration_sigma=_get(ex, "execution", "duration_sigma", float, 0.0),
        quality_noise=_get(ex, "execution", "quality_noise", float, 0.0),
        human_latency_multiplier=_get(ex, "execution", "human_latency_multiplier", float, 1.0),
        hours_per_timestep=_get(ex, "execution", "hours_per_timestep", float, 1.0),
    )

    cf = _strict(
        top.get("config") or {},
        "config",
        {"max_manager_actions", "max_timesteps", "worker_capacity"},
    )
    doc.config = EpisodeDefaults(
        max_manager_actions=_get(cf, "config", "max_manager_actions", int, 100),
        max_timesteps=_get(cf, "config", "max_timesteps", int, 100),
        worker_capacity=_get(cf, "config", "worker_capacity", int, 1),
    )
    return doc


def serialize_scenario(doc: ScenarioDoc) -> str:
    """Canonical document text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ----- semantic validation -------------------------------------------------


def validate_scenario(doc: ScenarioDoc) -> list[Diagnostic]:
    """Return diagnostics; an empty list means the document is runnable."""
    out: list[Diagnostic] = []

    def error(location: str, message: str) -> None:
        out.append(Diagnostic("error", location, message))

    def warning(location: str, message: str) -> None:
        out.append(Diagnostic("warning", location, message))

    if not doc.id:
        error("id", "scenario id must be non-empty")
    if not doc.title:
        error("title", "scenario title must be non-empty")

    seen_tasks: set[str] = set()
    deliverable_count = 0
    for i, t in enumerate(doc.tasks):
        path = f"tasks[{i}]"
        if t.id in seen_tasks:
            error(path, f"duplicate task id {t.id!r}")
        seen_tasks.add(t.id)
        try:
            t.validate()
        except WorkflowError as exc:
            error(path, str(exc))
        if t.deliverable is not None:
            deliverable_count += 1
    if deliverable_count:
        lo, hi = DELIVERABLE_COUNT_RANGE
        if not lo <= deliverable_count <= hi:
            error("tasks", f"{deliverable_count} deliverables declared; expected {lo}-{hi}")

    seen_edges: set[tuple[str, str]] = set()
    adjacency: dict[str, list[str]] = {}
    for i, (a, b) in enumerate(doc.edges):
        path = f"edges[{i}]"
        for endpoint in (a, b):
            if endpoint not in seen_tasks:
                error(path, f"unknown task id {endpoint!r}")
        if a == b:
            error(path, f"self-dependency on {a!r}")
        if (a, b) in seen_edges:
            warning(path, f"duplicate edge {a!r} -> {b!r}")
        seen_edges.add((a, b))
        adjacency.setdefault(a, []).append(b)
    if _has_cycle(seen_tasks, adjacency):
        error("edges", "initial dependency edges contain a cycle")

    for tid, subs in doc.decomposition_templates.items():
        path = f"decomposition_templates[{tid!r}]"
        if tid not in seen_tasks:
            error(path, f"unknown task id {tid!r}")
        if not subs:
            error(path, "template is empty")
        for j, sub in enumerate(subs):
            if not sub.name:
                error(f"{path}[{j}]", "subtask name must be non-empty")
            if sub.estimated_hours < 0 or sub.estimated_cost < 0:
                error(f"{path}[{j}]", "estimates must be non-negative")
            for a in sub.after:
                if not 0 <= a < j:
                    error(f"{path}[{j}]", f"'after' index {a} must reference an earlier entry")

    seen_workers: set[str] = set()
    for i, w in enumerate(doc.workers):
        path = f"workers[{i}]"
        if w.id in seen_workers:
            error(path, f"duplicate worker id {w.id!r}")
        seen_workers.add(w.id)
        if w.id in ("manager", "stakeholder"):
            error(path, f"worker id {w.id!r} is reserved")
        for skill, level in w.capabilities.items():
            if not 0.0 <= level <= 1.0:
                error(path, f"proficiency {skill}={level} outside [0,1]")
        if w.cost_rate < 0:
            error(path, "cost_rate must be non-negative")
        if w.join_timestep < 0:
            error(path, "join_timestep must be >= 0")
        if w.leave_timestep is not None and w.leave_timestep <= w.join_timestep:
            error(path, "leave_timestep must be after join_timestep")

    for i, c in enumerate(doc.constraints):
        path = f"constraints[{i}]"
        try:
            c.validate()
        except WorkflowError as exc:
            error(path, str(exc))
        if c.predicate.get("type") not in PREDICATE_TYPES:
            error(f"{path}.predicate", f"unknown predicate type {c.predicate.get('type')!r}")
        kind = c.predicate.get("worker_kind")
        if kind is not None and kind not in ("ai", "simulated_human"):
            error(f"{path}.predicate", f"unknown worker kind {kind!r}")
        ref = c.predicate.get("task_id")
        if ref is not None and ref not in seen_tasks:
            error(f"{path}.predicate", f"unknown task id {ref!r}")
        receiver = c.predicate.get("receiver")
        if receiver is not None and receiver != "stakeholder" and receiver not in seen_workers:
            error(f"{path}.predicate", f"unknown receiver {receiver!r}")

    if not doc.preference_schedule:
        error("preference_schedule", "at least one entry (at timestep 0) is required")
    else:
        if doc.preference_schedule[0].timestep != 0:
            error("preference_schedule[0]", "first entry must be at timestep 0")
        last = -1
        for i, entry in enumerate(doc.preference_schedule):
            path = f"preference_schedule[{i}]"
            if entry.timestep <= last and i > 0:
                error(path, "timesteps must be strictly increasing")
            last = entry.timestep
            try:
                PreferenceVector(entry.weights).validate()
            except WorkflowError as exc:
                error(path, str(exc))

    if doc.stakeholder.reply_latency < 0:
        error("stakeholder.reply_latency", "must be >= 0")
    if doc.stakeholder.end_approval not in END_APPROVAL_RULES:
        error("stakeholder.end_approval", f"must be one of {END_APPROVAL_RULES}")

    ex = doc.execution
    if ex.duration_sigma < 0:
        error("execution.duration_sigma", "must be >= 0")
    if ex.quality_noise < 0:
        error("execution.quality_noise", "must be >= 0")
    if ex.human_latency_multiplier <= 0:
        error("execution.human_latency_multiplier", "must be > 0")
    if ex.hours_per_timestep <= 0:
        error("execution.hours_per_timestep", "must be > 0")

    cf = doc.config
    if cf.max_manager_actions < 1:
        error("config.max_manager_actions", "must be >= 1")
    if cf.max_timesteps < 1:
        error("config.max_timesteps", "must be >= 1")
    if cf.worker_capacity < 1:
        error("config.worker_capacity", "must be >= 1")

    return out


def _has_cycle(nodes: set[str], adjacency: dict[str, list[str]]) -> bool:
    in_degree = {n: 0 for n in nodes}
    for a, targets in adjacency.items():
        for b in targets:
            if b in in_degree:
                in_degree[b] += 1
    queue = [n for n, d in in_degree.items() if d == 0]
    visited = 0
    while queue:
        n = queue.pop()
        visited += 1
        for b in adjacency.get(n, []):
            if b in in_degree:
                in_degree[b] -= 1
                if in_degree[b] == 0:
                    queue.append(b)
    return visited != len(nodes)


def load_scenario(source: str | Path | dict[str, Any] | ScenarioDoc) -> ScenarioDoc:
    """Resolve a scenario from a doc, dict, bundled name, or file path.

    Raises ScenarioError when parsing fails or validation finds errors.
    """
    if isinstance(source, ScenarioDoc):
        doc = source
    elif isinstance(source, dict):
        doc = scenario_from_dict(source)
    else:
        name = str(source)
        if name in bundled_scenario_names():
            doc = parse_scenario(_bundled_text(name))
        else:
            path = Path(name)
            if not path.exists():
                raise ScenarioError(f"no such scenario file or bundled name: {name}")
            doc = parse_scenario(path.read_text(encoding="utf-8"))
    problems = [d for d in validate_scenario(doc) if d.severity == "error"]
    if problems:
        raise ScenarioError("; ".join(str(d) for d in problems))
    return doc


def build_initial_state(doc: ScenarioDoc) -> WorkflowState:
    """Hydrate the timestep-0 workflow state from a validated document."""
    state = WorkflowState()
    for draft in doc.tasks:
        state.add_task(
            TaskDraft(
                id=draft.id,
                name=draft.name,
                description=draft.description,
                estimated_hours=draft.estimated_hours,
                estimated_cost=draft.estimated_cost,
                required_skills=list(draft.required_skills),
                deliverable=None
                if draft.deliverable is None
                else Deliverable(
                    tier=draft.deliverable.tier,
                    points=draft.deliverable.points,
                    scoring=draft.deliverable.scoring,
                ),
            )
        )
    for prereq, dep in doc.edges:
        state.add_dependency(prereq, dep)
    for w in doc.workers:
        state.add_worker(
            Worker(
                id=w.id,
                kind=w.kind,
                capabilities=dict(w.capabilities),
                cost_rate=w.cost_rate,
                join_timestep=w.join_timestep,
                leave_timestep=w.leave_timestep,
            )
        )
    state.constraints = [
        Constraint(
            id=c.id,
            kind=c.kind,
            description=c.description,
            predicate=dict(c.predicate),
            penalty_weight=c.penalty_weight,
        )
        for c in doc.constraints
    ]
    if doc.preference_schedule:
        state.set_preferences(PreferenceVector(dict(doc.preference_schedule[0].weights)))
    state.refresh_statuses()
    return state


# ----- bundled scenario suite -------------------------------------------------


def bundled_scenario_names() -> list[str]:
    files = resources.files("magym").joinpath("scenarios")
    return sorted(p.name[: -len(".json")] for p in files.iterdir() if p.name.endswith(".json"))


def _bundled_text(name: str) -> str:
    return (
        resources.files("magym").joinpath("scenarios").joinpath(f"{name}.json").read_text("utf-8")
    )


def bundled_scenarios() -> list[ScenarioDoc]:
    """The shipped desk-scale scenario suite."""
    return [parse_scenario(_bundled_text(name)) for name in bundled_scenario_names()]
