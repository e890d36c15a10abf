"""Action space, canonical wire encoding, observations, and dispatch.

The manager's 16 action variants mirror the simulator's command surface; the
wire form is ``{"type": <snake_case variant>, "params": {...}}`` with sorted
keys so trace files and the bridge protocol are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .model import (
    MANAGER,
    STAKEHOLDER,
    Message,
    PreferenceVector,
    SubtaskTemplate,
    TaskDraft,
    TaskStatus,
    WorkflowError,
    WorkflowState,
    generic_decomposition,
)

# Param schema per manager action variant: name -> (type, required).
# `str?` means optional (None allowed / omissible).
MANAGER_ACTION_SCHEMAS: dict[str, dict[str, tuple[str, bool]]] = {
    "assign_task": {"task_id": ("str", True), "worker_id": ("str", True)},
    "assign_all_pending_tasks": {"worker_id": ("str", False)},
    "create_task": {
        "name": ("str", True),
        "description": ("str", True),
        "estimated_hours": ("float", True),
        "estimated_cost": ("float", True),
    },
    "remove_task": {"task_id": ("str", True)},
    "send_message": {"content": ("str", True), "receiver_id": ("str", False)},
    "noop": {},
    "get_workflow_status": {},
    "get_available_agents": {},
    "get_pending_tasks": {},
    "refine_task": {
        "task_id": ("str", True),
        "instructions": ("str", True),
        "estimated_hours": ("float", False),
        "estimated_cost": ("float", False),
    },
    "add_task_dependency": {"prereq_id": ("str", True), "dep_id": ("str", True)},
    "remove_task_dependency": {"prereq_id": ("str", True), "dep_id": ("str", True)},
    "inspect_task": {"task_id": ("str", True)},
    "decompose_task": {"task_id": ("str", True)},
    "request_end_workflow": {"reason": ("str", False)},
    "failed_action": {"metadata": ("dict", True)},
}

READ_ONLY_ACTIONS = {
    "noop",
    "get_workflow_status",
    "get_available_agents",
    "get_pending_tasks",
    "inspect_task",
    "failed_action",
}

STAKEHOLDER_ACTION_SCHEMAS: dict[str, dict[str, tuple[str, bool]]] = {
    "send_message": {"content": ("str", True), "receiver_id": ("str", False)},
    "update_preferences": {"weights": ("dict", True)},
    "answer_question": {"message_index": ("int", True), "content": ("str", True)},
    "approve_end": {"approve": ("bool", True)},
    "noop": {},
}


class ActionError(WorkflowError):
    """Malformed or unknown action payload."""


def _check_params(schemas: dict, type_name: str, params: dict[str, Any]) -> dict[str, Any]:
    if type_name not in schemas:
        raise ActionError(f"unknown action type {type_name!r}")
    schema = schemas[type_name]
    cleaned: dict[str, Any] = {}
    for key, value in params.items():
        if key not in schema:
            raise ActionError(f"unknown parameter {key!r} for {type_name}")
        kind, _required = schema[key]
        if value is None:
            continue
        if kind == "str" and not isinstance(value, str):
            raise ActionError(f"{type_name}.{key} must be a string")
        if kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ActionError(f"{type_name}.{key} must be a number")
            value = float(value)
        if kind == "int" and (isinstance(value, bool) or not isinstance(value, int)):
            raise ActionError(f"{type_name}.{key} must be an integer")
        if kind == "bool" and not isinstance(value, bool):
            raise ActionError(f"{type_name}.{key} must be a boolean")
        if kind == "dict" and not isinstance(value, dict):
            raise ActionError(f"{type_name}.{key} must be an object")
        cleaned[key] = value
    for key, (_kind, required) in schema.items():
        if required and key not in cleaned:
            raise ActionError(f"{type_name} missing required parameter {key!r}")
    return cleaned


@dataclass
class ManagerAction:
    type: str
    params: dict[str, Any] = field(default_factory=dict)
    rationale: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        self.params = _check_params(MANAGER_ACTION_SCHEMAS, self.type, self.params)

    def encode(self) -> dict[str, Any]:
        return {"type": self.type, "params": dict(self.params)}


@dataclass
class StakeholderAction:
    type: str
    params: dict[str, Any] = field(default_factory=dict)
    rationale: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        self.params = _check_params(STAKEHOLDER_ACTION_SCHEMAS, self.type, self.params)

    def encode(self) -> dict[str, Any]:
        return {"type": self.type, "params": dict(self.params)}


def decode_manager_action(payload: Any) -> ManagerAction:
    if not isinstance(payload, dict):
        raise ActionError("action payload must be an object")
    extra = set(payload) - {"type", "params"}
    if extra:
        raise ActionError(f"unexpected action fields {sorted(extra)}")
    type_name = payload.get("type")
    if not isinstance(type_name, str):
        raise ActionError("action payload needs a string 'type'")
    params = payload.get("params", {})
    if not isinstance(params, dict):
        raise ActionError("action 'params' must be an object")
    return ManagerAction(type_name, dict(params))


def decode_stakeholder_action(payload: Any) -> StakeholderAction:
    if not isinstance(payload, dict):
        raise ActionError("action payload must be an object")
    type_name = payload.get("type")
    if not isinstance(type_name, str):
        raise ActionError("action payload needs a string 'type'")
    params = payload.get("params", {})
    if not isinstance(params, dict):
        raise ActionError("action 'params' must be an object")
    return StakeholderAction(type_name, dict(params))


def failed_action(attempted: ManagerAction, error: str) -> ManagerAction:
    """Wrap a rejected action as the diagnostic failed_action record."""
    return ManagerAction(
        "failed_action",
        {"metadata": {"attempted": attempted.encode(), "error": error}},
        rationale=attempted.rationale,
    )


# ----- observations -------------------------------------------------


def observe(state: WorkflowState, agent_id: str, max_manager_actions: int = 100) -> dict[str, Any]:
    """Role-scoped, pure view of the state for one agent."""
    if agent_id == MANAGER:
        return manager_observation(state, max_manager_actions)
    if agent_id == STAKEHOLDER:
        return stakeholder_observation(state)
    if agent_id in state.workers:
        return worker_observation(state, agent_id)
    raise WorkflowError(f"unknown agent {agent_id!r}")


def _message_view(msg: Message, index: int) -> dict[str, Any]:
    return {
        "index": index,
        "sender": msg.sender,
        "receiver": msg.receiver,
        "content": msg.content,
        "timestep": msg.timestep,
        "related_task_id": msg.related_task_id,
    }


def manager_observation(
    state: WorkflowState,
    max_manager_actions: int = 100,
    decomposition_templates: Optional[dict[str, Any]] = None,
) -> dict[str, Any]:
    """Everything the manager may see; stakeholder preference weights and
    artifact quality/content stay hidden (inspect_task reveals per-task detail)."""
    templates = decomposition_templates or {}
    ready = state.ready_set()
    tasks = []
    for tid in sorted(state.graph.tasks):
        t = state.graph.tasks[tid]
        tasks.append(
            {
                "id": t.id,
                "name": t.name,
                "status": t.status.value,
                "estimated_hours": t.estimated_hours,
                "estimated_cost": t.estimated_cost,
                "progress": t.progress,
                "owner": t.owner,
                "parent_id": t.parent_id,
                "subtask_ids": list(t.subtask_ids),
                "required_skills": list(t.required_skills),
                "deliverable": None
                if t.deliverable is None
                else {
                    "tier": t.deliverable.tier,
                    "points": t.deliverable.points,
                    "scoring": t.deliverable.scoring,
                },
                "ready": t.id in ready,
                "has_decomposition_template": t.id in templates,
            }
        )
    workers = []
    for wid in sorted(state.workers):
        w = state.workers[wid]
        running = [
            tid
            for tid in w.assigned_task_ids
            if state.graph.tasks[tid].status is TaskStatus.RUNNING
        ]
        queued = [tid for tid in w.assigned_task_ids if tid not in running]
        workers.append(
            {
                "id": w.id,
                "kind": w.kind.value,
                "active": w.active,
                "capabilities": dict(sorted(w.capabilities.items())),
                "cost_rate": w.cost_rate,
                "running_task_ids": running,
                "queued_task_ids": queued,
            }
        )
    return {
        "role": "manager",
        "timestep": state.timestep,
        "actions_remaining": max(0, max_manager_actions - state.manager_action_count),
        "max_manager_actions": max_manager_actions,
        "tasks": tasks,
        "edges": sorted([list(e) for e in state.graph.edges]),
        "ready_task_ids": sorted(ready),
        "workers": workers,
        "messages": [_message_view(m, i) for i, m in enumerate(state.comms)],
        "artifacts": [
            {
                "id": a.id,
                "producing_task_id": a.producing_task_id,
                "kind": a.kind,
                "created_timestep": a.created_timestep,
            }
            for aid, a in sorted(state.artifacts.items())
        ],
        "pending_end_request": state.pending_end_request,
    }


def stakeholder_observation(state: WorkflowState) -> dict[str, Any]:
    """The stakeholder sees its preferences and high-level progress only."""
    histogram: dict[str, int] = {}
    for t in state.graph.tasks.values():
        histogram[t.status.value] = histogram.get(t.status.value, 0) + 1
    deliverables = state.deliverable_tasks()
    earned = sum(
        t.deliverable.points for t in deliverables if t.status is TaskStatus.COMPLETED
    )
    total = sum(t.deliverable.points for t in deliverables)
    visible = [
        _message_view(m, i)
        for i, m in enumerate(state.comms)
        if m.receiver in (None, STAKEHOLDER) or m.sender == STAKEHOLDER
    ]
    open_questions = [
        _message_view(m, i)
        for i, m in enumerate(state.comms)
        if m.sender == MANAGER
        and m.receiver == STAKEHOLDER
        and "?" in m.content
        and i not in state.answered_question_indices
    ]
    return {
        "role": "stakeholder",
        "timestep": state.timestep,
        "preferences": state.preferences.snapshot(),
        "progress": {
            "status_histogram": dict(sorted(histogram.items())),
            "deliverable_points_earned": earned,
            "deliverable_points_total": total,
            "total_tasks": len(state.graph.tasks),
        },
        "messages": visible,
        "open_questions": open_questions,
        "pending_end_request": state.pending_end_request,
    }


def worker_observation(state: WorkflowState, worker_id: str) -> dict[str, Any]:
    """A worker sees only its own assignments, schedule, and mail."""
    worker = state.workers[worker_id]
    assigned = []
    for tid in worker.assigned_task_ids:
        t = state.graph.tasks[tid]
        prereq_artifacts = [
            a.snapshot()
            for aid, a in sorted(state.artifacts.items())
            if a.producing_task_id in state.graph.prerequisites_of(tid)
        ]
        assigned.append(
            {
                "id": t.id,
                "name": t.name,
                "description": t.description,
                "status": t.status.value,
                "progress": t.progress,
                "execution_notes": t.execution_notes,
                "estimated_hours": t.estimated_hours,
                "required_skills": list(t.required_skills),
                "prerequisite_artifacts": prereq_artifacts,
            }
        )
    mail = [
        _message_view(m, i)
        for i, m in enumerate(state.comms)
        if m.receiver in (None, worker_id) or m.sender == worker_id
    ]
    return {
        "role": "worker",
        "worker_id": worker_id,
        "timestep": state.timestep,
        "schedule": {
            "join_timestep": worker.join_timestep,
            "leave_timestep": worker.leave_timestep,
            "active": worker.active,
        },
        "assigned_tasks": assigned,
        "messages": mail,
    }


# ----- manager action dispatch -------------------------------------------------


@dataclass
class ActionResult:
    ok: bool
    payload: Optional[dict[str, Any]] = None
    error: Optional[str] = None
    warning: Optional[str] = None


def apply_manager_action(
    state: WorkflowState,
    action: ManagerAction,
    decomposition_templates: Optional[dict[str, list[SubtaskTemplate]]] = None,
) -> ActionResult:
    """Apply one manager action; rejections report an error without mutating."""
    templates = decomposition_templates or {}
    p = action.params
    try:
        if action.type == "assign_task":
            state.assign(p["task_id"], p["worker_id"])
            return ActionResult(True, {"task_id": p["task_id"], "worker_id": p["worker_id"]})

        if action.type == "assign_all_pending_tasks":
            worker_id = p.get("worker_id")
            if worker_id is None:
                active = sorted(w.id for w in state.workers.values() if w.active)
                if not active:
                    raise WorkflowError("no active workers to bulk-assign to")
                worker_id = active[0]
            worker = state.workers.get(worker_id)
            if worker is None:
                raise WorkflowError(f"unknown worker {worker_id!r}")
            if not worker.active:
                raise WorkflowError(f"worker {worker_id!r} is not active")
            assigned = []
            for tid in sorted(state.graph.tasks):
                t = state.graph.tasks[tid]
                if t.composite or t.owner is not None:
                    continue
                if t.status in (TaskStatus.PENDING, TaskStatus.READY):
                    t.owner = worker_id
                    t.assignment_history.append(worker_id)
                    worker.assigned_task_ids.append(tid)
                    assigned.append(tid)
            return ActionResult(True, {"worker_id": worker_id, "assigned_task_ids": assigned})

        if action.type == "create_task":
            # Validate before allocating an id: a rejected draft must leave the
            # id sequence untouched or replay would drift.
            TaskDraft(
                id="probe",
                name=p["name"],
                description=p["description"],
                estimated_hours=p["estimated_hours"],
                estimated_cost=p["estimated_cost"],
            ).validate()
            seq = state.next_task_seq
            while f"t{seq:04d}" in state.graph.tasks:
                seq += 1
            task_id = f"t{seq:04d}"
            state.next_task_seq = seq + 1
            state.add_task(
                TaskDraft(
                    id=task_id,
                    name=p["name"],
                    description=p["description"],
                    estimated_hours=p["estimated_hours"],
                    estimated_cost=p["estimated_cost"],
                )
            )
            state.refresh_statuses()
            return ActionResult(True, {"task_id": task_id})

        if action.type == "remove_task":
            state.remove_task(p["task_id"])
            return ActionResult(True, {"task_id": p["task_id"]})

        if action.type == "send_message":
            state.post_message(
                Message(
                    sender=MANAGER,
                    receiver=p.get("receiver_id"),
                    content=p["content"],
                    timestep=state.timestep,
                )
            )
            return ActionResult(True, {"receiver_id": p.get("receiver_id")})

        if action.type == "noop":
            return ActionResult(True, {})

        if action.type == "get_workflow_status":
            histogram: dict[str, int] = {}
            for t in state.graph.tasks.values():
                histogram[t.status.value] = histogram.get(t.status.value, 0) + 1
            return ActionResult(
                True,
                {
                    "status_histogram": dict(sorted(histogram.items())),
                    "ready_set_size": len(state.ready_set()),
                    "available_agents": sorted(
                        w.id for w in state.workers.values() if w.active
                    ),
                },
            )

        if action.type == "get_available_agents":
            agents = []
            for wid in sorted(state.workers):
                w = state.workers[wid]
                if not w.active:
                    continue
                running = [
                    tid
                    for tid in w.assigned_task_ids
                    if state.graph.tasks[tid].status is TaskStatus.RUNNING
                ]
                agents.append(
                    {
                        "id": w.id,
                        "kind": w.kind.value,
                        "capabilities": dict(sorted(w.capabilities.items())),
                        "idle": not running,
                        "queued_tasks": len(w.assigned_task_ids),
                    }
                )
            return ActionResult(True, {"agents": agents})

        if action.type == "get_pending_tasks":
            pending = [
                {"id": t.id, "name_preview": t.name[:40]}
                for tid, t in sorted(state.graph.tasks.items())
                if t.status is TaskStatus.PENDING
            ]
            return ActionResult(True, {"pending_tasks": pending})

        if action.type == "refine_task":
            state.refine_task(
                p["task_id"],
                p["instructions"],
                new_hours=p.get("estimated_hours"),
                new_cost=p.get("estimated_cost"),
            )
            return ActionResult(True, {"task_id": p["task_id"]})

        if action.type == "add_task_dependency":
            state.add_dependency(p["prereq_id"], p["dep_id"])
            return ActionResult(True, {"prereq_id": p["prereq_id"], "dep_id": p["dep_id"]})

        if action.type == "remove_task_dependency":
            state.remove_dependency(p["prereq_id"], p["dep_id"])
            return ActionResult(True, {"prereq_id": p["prereq_id"], "dep_id": p["dep_id"]})

        if action.type == "inspect_task":
            task = state.graph.tasks.get(p["task_id"])
            if task is None:
                raise WorkflowError(f"unknown task {p['task_id']!r}")
            outputs = [
                a.snapshot()
                for aid, a in sorted(state.artifacts.items())
                if a.producing_task_id == task.id
            ]
            return ActionResult(True, {"task": task.snapshot(), "artifacts": outputs})

        if action.type == "decompose_task":
            task = state.graph.tasks.get(p["task_id"])
            if task is None:
                raise WorkflowError(f"unknown task {p['task_id']!r}")
            template = templates.get(task.id)
            if template is None:
                template = generic_decomposition(task)
            new_ids = state.decompose_task(task.id, template)
            if not new_ids:
                return ActionResult(
                    True,
                    {"task_id": task.id, "subtask_ids": []},
                    warning="already decomposed; skipped",
                )
            return ActionResult(True, {"task_id": task.id, "subtask_ids": new_ids})

        if action.type == "request_end_workflow":
            state.pending_end_request = p.get("reason") or "unspecified"
            return ActionResult(True, {"reason": state.pending_end_request})

        if action.type == "failed_action":
            return ActionResult(True, {})

        raise ActionError(f"unknown action type {action.type!r}")
    except WorkflowError as exc:
        return ActionResult(False, error=str(exc))


def apply_stakeholder_action(state: WorkflowState, action: StakeholderAction) -> ActionResult:
    p = action.params
    try:
        if action.type == "send_message":
            state.post_message(
                Message(
                    sender=STAKEHOLDER,
                    receiver=p.get("receiver_id"),
                    content=p["content"],
                    timestep=state.timestep,
                )
            )
            return ActionResult(True, {})

        if action.type == "update_preferences":
            weights = {str(k): float(v) for k, v in p["weights"].items()}
            state.set_preferences(PreferenceVector(weights))
            return ActionResult(True, {"weights": weights})

        if action.type == "answer_question":
            idx = p["message_index"]
            if not 0 <= idx < len(state.comms):
                raise WorkflowError(f"no message at index {idx}")
            question = state.comms[idx]
            state.post_message(
                Message(
                    sender=STAKEHOLDER,
                    receiver=question.sender,
                    content=p["content"],
                    timestep=state.timestep,
                    related_task_id=question.related_task_id,
                )
            )
            state.answered_question_indices.add(idx)
            return ActionResult(True, {"message_index": idx})

        if action.type == "approve_end":
            if state.pending_end_request is None:
                raise WorkflowError("no end-of-workflow request is pending")
            if p["approve"]:
                return ActionResult(True, {"approved": True})
            state.pending_end_request = None
            return ActionResult(True, {"approved": False})

        if action.type == "noop":
            return ActionResult(True, {})

        raise ActionError(f"unknown stakeholder action {action.type!r}")
    except WorkflowError as exc:
        return ActionResult(False, error=str(exc))


def action_budget_remaining(state: WorkflowState, max_manager_actions: int) -> int:
    return max(0, max_manager_actions - state.manager_action_count)
