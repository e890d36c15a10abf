"""Workflow state: task graph, workers, communications, artifacts, preferences.

The :class:`WorkflowState` holds one episode's complete ground truth; agents
only ever see role-scoped views of it (see :mod:`magym.actions`). All graph
mutations go through the methods here, which enforce acyclicity, status
transitions, and assignment consistency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

SIMPLEX_TOLERANCE = 1e-9

MANAGER = "manager"
STAKEHOLDER = "stakeholder"

MANAGER_INSTRUCTIONS_HEADER = "MANAGER_INSTRUCTIONS:"

# Deliverable point ranges per tier, inclusive.
DELIVERABLE_TIERS = {
    "critical": (12.0, 18.0),
    "major": (8.0, 12.0),
    "supporting": (3.0, 8.0),
}


class WorkflowError(Exception):
    """Base error for invalid workflow operations."""


class CycleError(WorkflowError):
    """Adding an edge would create a dependency cycle."""

    def __init__(self, path: list[str]):
        self.path = path
        super().__init__("dependency cycle: " + " -> ".join(path))


class TaskStatus(str, Enum):
    PENDING = "pending"
    READY = "ready"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    REMOVED = "removed"


class WorkerKind(str, Enum):
    AI = "ai"
    SIMULATED_HUMAN = "simulated_human"


@dataclass
class Deliverable:
    """Business-value classification of a task for goal scoring."""

    tier: str
    points: float
    scoring: str = "binary"  # binary | graduated

    def validate(self) -> None:
        if self.tier not in DELIVERABLE_TIERS:
            raise WorkflowError(f"unknown deliverable tier {self.tier!r}")
        lo, hi = DELIVERABLE_TIERS[self.tier]
        if not lo <= self.points <= hi:
            raise WorkflowError(
                f"{self.tier} deliverable worth {self.points} points outside range {lo}-{hi}"
            )
        if self.scoring not in ("binary", "graduated"):
            raise WorkflowError(f"unknown deliverable scoring {self.scoring!r}")


@dataclass
class Task:
    id: str
    name: str
    description: str = ""
    estimated_hours: float = 1.0
    estimated_cost: float = 0.0
    status: TaskStatus = TaskStatus.PENDING
    owner: Optional[str] = None
    progress: float = 0.0
    execution_notes: str = ""
    subtask_ids: list[str] = field(default_factory=list)
    parent_id: Optional[str] = None
    deliverable: Optional[Deliverable] = None
    required_skills: list[str] = field(default_factory=list)
    # Runtime bookkeeping (reproduced deterministically on replay).
    attempt: int = 0
    run_total_steps: int = 0
    cost_incurred: float = 0.0
    completed_timestep: Optional[int] = None
    assignment_history: list[str] = field(default_factory=list)

    @property
    def composite(self) -> bool:
        return bool(self.subtask_ids)

    def snapshot(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "estimated_hours": self.estimated_hours,
            "estimated_cost": self.estimated_cost,
            "status": self.status.value,
            "owner": self.owner,
            "progress": self.progress,
            "execution_notes": self.execution_notes,
            "subtask_ids": list(self.subtask_ids),
            "parent_id": self.parent_id,
            "deliverable": (
                None
                if self.deliverable is None
                else {
                    "tier": self.deliverable.tier,
                    "points": self.deliverable.points,
                    "scoring": self.deliverable.scoring,
                }
            ),
            "required_skills": list(self.required_skills),
            "attempt": self.attempt,
            "cost_incurred": self.cost_incurred,
            "completed_timestep": self.completed_timestep,
            "assignment_history": list(self.assignment_history),
        }


@dataclass
class TaskDraft:
    """Fields a caller supplies when creating a task; status is never theirs."""

    id: str
    name: str
    description: str = ""
    estimated_hours: float = 1.0
    estimated_cost: float = 0.0
    required_skills: list[str] = field(default_factory=list)
    deliverable: Optional[Deliverable] = None

    def validate(self) -> None:
        if not self.id:
            raise WorkflowError("task id must be non-empty")
        if not self.name:
            raise WorkflowError("task name must be non-empty")
        if self.estimated_hours < 0:
            raise WorkflowError(f"estimated_hours must be non-negative, got {self.estimated_hours}")
        if self.estimated_cost < 0:
            raise WorkflowError(f"estimated_cost must be non-negative, got {self.estimated_cost}")
        if self.deliverable is not None:
            self.deliverable.validate()


@dataclass
class SubtaskTemplate:
    """One child in a decomposition template.

    ``after`` lists indices of earlier template entries that must complete
    before this child may start (internal ordering edges).
    """

    name: str
    description: str = ""
    estimated_hours: float = 1.0
    estimated_cost: float = 0.0
    required_skills: list[str] = field(default_factory=list)
    after: list[int] = field(default_factory=list)


@dataclass
class Worker:
    id: str
    kind: WorkerKind
    capabilities: dict[str, float] = field(default_factory=dict)
    cost_rate: float = 0.0
    join_timestep: int = 0
    leave_timestep: Optional[int] = None
    active: bool = False
    assigned_task_ids: list[str] = field(default_factory=list)

    def should_be_active(self, timestep: int) -> bool:
        if timestep < self.join_timestep:
            return False
        if self.leave_timestep is not None and timestep >= self.leave_timestep:
            return False
        return True

    def snapshot(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "capabilities": dict(sorted(self.capabilities.items())),
            "cost_rate": self.cost_rate,
            "join_timestep": self.join_timestep,
            "leave_timestep": self.leave_timestep,
            "active": self.active,
            "assigned_task_ids": list(self.assigned_task_ids),
        }


@dataclass
class Message:
    sender: str
    receiver: Optional[str]  # None = broadcast
    content: str
    timestep: int
    related_task_id: Optional[str] = None

    def snapshot(self) -> dict[str, Any]:
        return {
            "sender": self.sender,
            "receiver": self.receiver,
            "content": self.content,
            "timestep": self.timestep,
            "related_task_id": self.related_task_id,
        }


@dataclass
class Artifact:
    id: str
    producing_task_id: str
    kind: str
    content: str
    quality: float
    created_timestep: int

    def snapshot(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "producing_task_id": self.producing_task_id,
            "kind": self.kind,
            "content": self.content,
            "quality": self.quality,
            "created_timestep": self.created_timestep,
        }


@dataclass
class PreferenceVector:
    """Stakeholder objective weights; always a point on the simplex."""

    weights: dict[str, float]

    def validate(self) -> None:
        if not self.weights:
            raise WorkflowError("preference vector must name at least one objective")
        for name, w in self.weights.items():
            if w < 0:
                raise WorkflowError(f"preference weight {name}={w} is negative")
        total = sum(self.weights.values())
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise WorkflowError(f"preference weights sum to {total}, expected 1.0")

    def snapshot(self) -> dict[str, float]:
        return dict(sorted(self.weights.items()))


@dataclass
class Constraint:
    id: str
    kind: str  # hard | soft
    description: str
    predicate: dict[str, Any]
    penalty_weight: Optional[float] = None

    def validate(self) -> None:
        if self.kind not in ("hard", "soft"):
            raise WorkflowError(f"constraint kind must be hard or soft, got {self.kind!r}")
        if self.kind == "hard" and self.penalty_weight is not None:
            raise WorkflowError("hard constraints carry no penalty_weight")
        if self.kind == "soft":
            if self.penalty_weight is None or self.penalty_weight < 0:
                raise WorkflowError("soft constraints need a non-negative penalty_weight")

    def snapshot(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind,
            "description": self.description,
            "predicate": self.predicate,
            "penalty_weight": self.penalty_weight,
        }


@dataclass
class TaskGraph:
    tasks: dict[str, Task] = field(default_factory=dict)
    edges: set[tuple[str, str]] = field(default_factory=set)

    def live_tasks(self) -> list[Task]:
        return [t for t in self.tasks.values() if t.status is not TaskStatus.REMOVED]

    def prerequisites_of(self, task_id: str) -> list[str]:
        return sorted(p for (p, d) in self.edges if d == task_id)

    def dependents_of(self, task_id: str) -> list[str]:
        return sorted(d for (p, d) in self.edges if p == task_id)

    def path_between(self, start: str, goal: str) -> Optional[list[str]]:
        """Dependency path start -> ... -> goal along edges, if one exists."""
        if start == goal:
            return [start]
        stack = [(start, [start])]
        seen = {start}
        while stack:
            node, path = stack.pop()
            for nxt in self.dependents_of(node):
                if nxt == goal:
                    return path + [nxt]
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, path + [nxt]))
        return None

    def topological_order(self) -> list[str]:
        """Kahn's algorithm over live tasks; raises CycleError on a cycle."""
        live = {t.id for t in self.live_tasks()}
        in_degree = {tid: 0 for tid in live}
        for p, d in self.edges:
            in_degree[d] += 1
        queue = sorted(tid for tid, deg in in_degree.items() if deg == 0)
        order: list[str] = []
        while queue:
            current = queue.pop(0)
            order.append(current)
            for nxt in self.dependents_of(current):
                in_degree[nxt] -= 1
                if in_degree[nxt] == 0:
                    queue.append(nxt)
            queue.sort()
        if len(order) != len(live):
            remaining = sorted(live - set(order))
            raise CycleError(remaining)
        return order

    def is_ready(self, task_id: str) -> bool:
        """A leaf is ready when every prerequisite has completed."""
        task = self.tasks[task_id]
        if task.composite or task.status in (
            TaskStatus.REMOVED,
            TaskStatus.RUNNING,
            TaskStatus.COMPLETED,
            TaskStatus.FAILED,
        ):
            return False
        return all(
            self.tasks[p].status is TaskStatus.COMPLETED for p in self.prerequisites_of(task_id)
        )

    def snapshot(self) -> dict[str, Any]:
        return {
            "tasks": [self.tasks[tid].snapshot() for tid in sorted(self.tasks)],
            "edges": sorted([list(e) for e in self.edges]),
        }


@dataclass
class WorkflowState:
    """The full environment state: graph, team, comms, artifacts, preferences."""

    graph: TaskGraph = field(default_factory=TaskGraph)
    workers: dict[str, Worker] = field(default_factory=dict)
    comms: list[Message] = field(default_factory=list)
    artifacts: dict[str, Artifact] = field(default_factory=dict)
    preferences: PreferenceVector = field(
        default_factory=lambda: PreferenceVector({"quality": 1.0})
    )
    constraints: list[Constraint] = field(default_factory=list)
    timestep: int = 0
    manager_action_count: int = 0
    terminated: bool = False
    termination_reason: Optional[str] = None
    # Runtime bookkeeping.
    pending_end_request: Optional[str] = None
    answered_question_indices: set[int] = field(default_factory=set)
    next_task_seq: int = 1
    next_artifact_seq: int = 1

    # ----- task graph operations -------------------------------------------------

    def add_task(self, draft: TaskDraft) -> str:
        draft.validate()
        if draft.id in self.graph.tasks:
            raise WorkflowError(f"duplicate task id {draft.id!r}")
        self.graph.tasks[draft.id] = Task(
            id=draft.id,
            name=draft.name,
            description=draft.description,
            estimated_hours=draft.estimated_hours,
            estimated_cost=draft.estimated_cost,
            required_skills=list(draft.required_skills),
            deliverable=draft.deliverable,
        )
        return draft.id

    def remove_task(self, task_id: str) -> None:
        task = self._require_task(task_id)
        if task.status is TaskStatus.RUNNING:
            raise WorkflowError(f"cannot remove running task {task_id!r}; cancel it first")
        if task.status is TaskStatus.COMPLETED:
            raise WorkflowError(f"cannot remove completed task {task_id!r}")
        if task.status is TaskStatus.REMOVED:
            raise WorkflowError(f"task {task_id!r} is already removed")
        self.graph.edges = {e for e in self.graph.edges if task_id not in e}
        self._release_assignment(task)
        task.status = TaskStatus.REMOVED
        self.refresh_statuses()

    def add_dependency(self, prereq_id: str, dep_id: str) -> None:
        self._require_task(prereq_id, live=True)
        self._require_task(dep_id, live=True)
        if prereq_id == dep_id:
            raise WorkflowError(f"self-dependency on {prereq_id!r}")
        # A path dep -> ... -> prereq would close a cycle through the new edge.
        path = self.graph.path_between(dep_id, prereq_id)
        if path is not None:
            raise CycleError(path + [dep_id])
        self.graph.edges.add((prereq_id, dep_id))
        self.refresh_statuses()

    def remove_dependency(self, prereq_id: str, dep_id: str) -> None:
        if (prereq_id, dep_id) not in self.graph.edges:
            raise WorkflowError(f"no dependency edge {prereq_id!r} -> {dep_id!r}")
        self.graph.edges.discard((prereq_id, dep_id))
        self.refresh_statuses()

    def decompose_task(self, task_id: str, template: list[SubtaskTemplate]) -> list[str]:
        """Split a task into children; returns new ids, or [] when skipped."""
        task = self._require_task(task_id)
        if task.composite:
            return []  # already decomposed: skip, callers surface a warning
        if task.status not in (TaskStatus.PENDING, TaskStatus.READY):
            raise WorkflowError(
                f"cannot decompose task {task_id!r} with status {task.status.value}"
            )
        if not template:
            raise WorkflowError("decomposition template is empty")

        # Validate the whole template before touching the graph: a rejected
        # decomposition must leave the state untouched.
        drafts: list[TaskDraft] = []
        for idx, sub in enumerate(template):
            child_id = f"{task_id}.{idx + 1}"
            if child_id in self.graph.tasks:
                raise WorkflowError(f"duplicate task id {child_id!r}")
            for earlier in sub.after:
                if not 0 <= earlier < len(template):
                    raise WorkflowError(f"template ordering index {earlier} out of range")
                if earlier >= idx:
                    raise WorkflowError("template entries may only follow earlier entries")
            draft = TaskDraft(
                id=child_id,
                name=sub.name,
                description=sub.description,
                estimated_hours=sub.estimated_hours,
                estimated_cost=sub.estimated_cost,
                required_skills=list(sub.required_skills),
            )
            draft.validate()
            drafts.append(draft)

        new_ids: list[str] = []
        for draft in drafts:
            self.add_task(draft)
            self.graph.tasks[draft.id].parent_id = task_id
            new_ids.append(draft.id)

        prereqs = self.graph.prerequisites_of(task_id)
        dependents = self.graph.dependents_of(task_id)
        for child_id in new_ids:
            for p in prereqs:
                self.graph.edges.add((p, child_id))
            for d in dependents:
                self.graph.edges.add((child_id, d))
        for idx, sub in enumerate(template):
            for earlier in sub.after:
                self.graph.edges.add((new_ids[earlier], new_ids[idx]))

        self._release_assignment(task)
        task.subtask_ids = list(new_ids)
        self.refresh_statuses()
        return new_ids

    def refine_task(
        self,
        task_id: str,
        instructions: str,
        new_hours: Optional[float] = None,
        new_cost: Optional[float] = None,
    ) -> None:
        task = self._require_task(task_id, live=True)
        if task.status is TaskStatus.COMPLETED:
            raise WorkflowError(f"cannot refine completed task {task_id!r}")
        if new_hours is not None and new_hours < 0:
            raise WorkflowError("estimated_hours must be non-negative")
        if new_cost is not None and new_cost < 0:
            raise WorkflowError("estimated_cost must be non-negative")
        task.execution_notes = set_manager_instructions(task.execution_notes, instructions)
        if new_hours is not None:
            task.estimated_hours = new_hours
        if new_cost is not None:
            task.estimated_cost = new_cost

    def ready_set(self) -> set[str]:
        """Leaf tasks whose prerequisites all completed, pending or ready."""
        return {
            t.id
            for t in self.graph.live_tasks()
            if t.status in (TaskStatus.PENDING, TaskStatus.READY) and self.graph.is_ready(t.id)
        }

    def refresh_statuses(self) -> None:
        """Normalize derived statuses: composite completion, PENDING vs READY."""
        # Composite status is derived from children; nesting needs a fixpoint.
        changed = True
        while changed:
            changed = False
            for task in self.graph.tasks.values():
                if not task.composite or task.status is TaskStatus.REMOVED:
                    continue
                children = [
                    self.graph.tasks[cid]
                    for cid in task.subtask_ids
                    if self.graph.tasks[cid].status is not TaskStatus.REMOVED
                ]
                if not children:
                    continue
                progress = sum(c.progress for c in children) / len(children)
                done = all(c.status is TaskStatus.COMPLETED for c in children)
                if done and task.status is not TaskStatus.COMPLETED:
                    task.status = TaskStatus.COMPLETED
                    task.progress = 1.0
                    task.completed_timestep = self.timestep
                    changed = True
                elif not done:
                    task.progress = progress
                    if task.status is TaskStatus.COMPLETED:
                        task.status = TaskStatus.PENDING
                        changed = True
        for task in self.graph.live_tasks():
            if task.composite:
                continue
            if task.status is TaskStatus.PENDING and self.graph.is_ready(task.id):
                task.status = TaskStatus.READY
            elif task.status is TaskStatus.READY and not self.graph.is_ready(task.id):
                task.status = TaskStatus.PENDING

    # ----- team and communications -------------------------------------------------

    def add_worker(self, worker: Worker) -> None:
        if worker.id in self.workers:
            raise WorkflowError(f"duplicate worker id {worker.id!r}")
        if worker.id in (MANAGER, STAKEHOLDER):
            raise WorkflowError(f"worker id {worker.id!r} is reserved")
        worker.active = worker.should_be_active(self.timestep)
        self.workers[worker.id] = worker

    def assign(self, task_id: str, worker_id: str) -> None:
        """Queue a ready task on an active worker; execution starts on capacity."""
        task = self._require_task(task_id, live=True)
        worker = self.workers.get(worker_id)
        if worker is None:
            raise WorkflowError(f"unknown worker {worker_id!r}")
        if not worker.active:
            raise WorkflowError(f"worker {worker_id!r} is not active")
        if task.id not in self.ready_set():
            raise WorkflowError(f"task {task_id!r} is not ready for assignment")
        if task.owner is not None:
            raise WorkflowError(f"task {task_id!r} is already assigned to {task.owner!r}")
        task.owner = worker_id
        task.assignment_history.append(worker_id)
        worker.assigned_task_ids.append(task_id)

    def post_message(self, message: Message) -> None:
        if message.receiver is not None and not self._known_agent(message.receiver):
            raise WorkflowError(f"unknown message receiver {message.receiver!r}")
        if not self._known_agent(message.sender):
            raise WorkflowError(f"unknown message sender {message.sender!r}")
        self.comms.append(message)

    def add_artifact(self, producing_task_id: str, kind: str, content: str, quality: float) -> str:
        if producing_task_id not in self.graph.tasks:
            raise WorkflowError(f"unknown producing task {producing_task_id!r}")
        artifact_id = f"a{self.next_artifact_seq:04d}"
        self.next_artifact_seq += 1
        self.artifacts[artifact_id] = Artifact(
            id=artifact_id,
            producing_task_id=producing_task_id,
            kind=kind,
            content=content,
            quality=quality,
            created_timestep=self.timestep,
        )
        return artifact_id

    def set_preferences(self, vector: PreferenceVector) -> None:
        vector.validate()
        self.preferences = PreferenceVector(dict(vector.weights))

    def total_cost_incurred(self) -> float:
        return sum(t.cost_incurred for t in self.graph.tasks.values())

    def deliverable_tasks(self) -> list[Task]:
        return [t for t in self.graph.tasks.values() if t.deliverable is not None]

    # ----- helpers -------------------------------------------------

    def _require_task(self, task_id: str, live: bool = False) -> Task:
        task = self.graph.tasks.get(task_id)
        if task is None:
            raise WorkflowError(f"unknown task {task_id!r}")
        if live and task.status is TaskStatus.REMOVED:
            raise WorkflowError(f"task {task_id!r} has been removed")
        return task

    def _release_assignment(self, task: Task) -> None:
        if task.owner is not None:
            worker = self.workers.get(task.owner)
            if worker is not None and task.id in worker.assigned_task_ids:
                worker.assigned_task_ids.remove(task.id)
            task.owner = None
        if task.status is TaskStatus.RUNNING:
            task.status = TaskStatus.READY

    def _known_agent(self, agent_id: str) -> bool:
        return agent_id in (MANAGER, STAKEHOLDER) or agent_id in self.workers

    def snapshot(self) -> dict[str, Any]:
        """Canonical full-state dict; excludes the manager action counter so
        read-only manager actions never change the state digest."""
        return {
            "graph": self.graph.snapshot(),
            "workers": [self.workers[wid].snapshot() for wid in sorted(self.workers)],
            "comms": [m.snapshot() for m in self.comms],
            "artifacts": [self.artifacts[aid].snapshot() for aid in sorted(self.artifacts)],
            "preferences": self.preferences.snapshot(),
            "constraints": [c.snapshot() for c in self.constraints],
            "timestep": self.timestep,
            "terminated": self.terminated,
            "termination_reason": self.termination_reason,
            "pending_end_request": self.pending_end_request,
            "answered_question_indices": sorted(self.answered_question_indices),
        }


def set_manager_instructions(notes: str, instructions: str) -> str:
    """Insert or replace the single MANAGER_INSTRUCTIONS block in free notes."""
    base = strip_manager_instructions(notes).rstrip()
    block = f"{MANAGER_INSTRUCTIONS_HEADER} {instructions}"
    return f"{base}\n{block}" if base else block


def strip_manager_instructions(notes: str) -> str:
    """Remove an existing MANAGER_INSTRUCTIONS block (it runs to end of notes)."""
    idx = notes.find(MANAGER_INSTRUCTIONS_HEADER)
    if idx == -1:
        return notes
    return notes[:idx]


def skill_match(worker: Worker, task: Task) -> float:
    """Mean proficiency over the task's required skills; missing skill = 0.

    Tasks with no skill requirements match any worker perfectly.
    """
    if not task.required_skills:
        return 1.0
    total = sum(worker.capabilities.get(skill, 0.0) for skill in task.required_skills)
    return total / len(task.required_skills)


def artifact_kind_for(task: Task) -> str:
    """Deterministic artifact label from the task's skill profile."""
    skills = " ".join(task.required_skills)
    if "data" in skills or "analytics" in skills:
        return "data"
    if "engineering" in skills or "coding" in skills:
        return "code"
    return "document"


def generic_decomposition(task: Task) -> list[SubtaskTemplate]:
    """Fallback template: ceil(hours/4) equal, sequential subtasks."""
    count = math.ceil(task.estimated_hours / 4.0)
    template = []
    for i in range(count):
        template.append(
            SubtaskTemplate(
                name=f"{task.name} (part {i + 1})",
                description=task.description,
                estimated_hours=task.estimated_hours / count,
                estimated_cost=task.estimated_cost / count,
                required_skills=list(task.required_skills),
                after=[i - 1] if i > 0 else [],
            )
        )
    return template
