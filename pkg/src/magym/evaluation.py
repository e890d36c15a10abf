"""Five-metric evaluation suite with a deterministic rubric engine.

Objective scores feeding preference alignment, and four of the six
stakeholder-management rubrics, are deterministic stand-ins computed from the
trace and final state (their formulas are documented on the scorers below).
The engagement penalty uses the exact form max(0, 10 - manager_messages).
Custom rubrics (including external-grader wrappers) can be injected through
``compute_metrics(extra_rubrics=...)``; their scores land in the breakdown.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .model import (
    MANAGER,
    STAKEHOLDER,
    Constraint,
    TaskStatus,
    WorkflowError,
    WorkflowState,
)
from .scenario import ScenarioDoc

EACH_TIMESTEP = "each_timestep"
ON_COMPLETION = "on_completion"

METRIC_NAMES = (
    "preference_alignment",
    "constraint_adherence",
    "goal_achievement",
    "stakeholder_management",
    "completion_time_hours",
)


@dataclass
class Rubric:
    """A named, bounded scoring unit evaluated against the final state/trace."""

    name: str
    max_score: float
    evaluator: Callable[[WorkflowState, list[dict[str, Any]]], float]
    run_condition: str = ON_COMPLETION

    def evaluate(self, state: WorkflowState, records: list[dict[str, Any]]) -> float:
        score = self.evaluator(state, records)
        return min(self.max_score, max(0.0, score))


@dataclass
class MetricReport:
    preference_alignment: float
    constraint_adherence: float
    goal_achievement: float
    stakeholder_management: float
    completion_time_hours: float
    hard_violation: bool = False
    rubric_breakdown: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "preference_alignment": self.preference_alignment,
            "constraint_adherence": self.constraint_adherence,
            "goal_achievement": self.goal_achievement,
            "stakeholder_management": self.stakeholder_management,
            "completion_time_hours": self.completion_time_hours,
            "hard_violation": self.hard_violation,
            "rubric_breakdown": self.rubric_breakdown,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MetricReport":
        return cls(
            preference_alignment=data["preference_alignment"],
            constraint_adherence=data["constraint_adherence"],
            goal_achievement=data["goal_achievement"],
            stakeholder_management=data["stakeholder_management"],
            completion_time_hours=data["completion_time_hours"],
            hard_violation=data.get("hard_violation", False),
            rubric_breakdown=data.get("rubric_breakdown", {}),
        )


# ----- constraint predicate engine -------------------------------------------------


def _task_descendants(state: WorkflowState, task_id: str) -> set[str]:
    out = {task_id}
    stack = [task_id]
    while stack:
        current = stack.pop()
        for child in state.graph.tasks[current].subtask_ids:
            if child not in out:
                out.add(child)
                stack.append(child)
    return out


def predicate_violations(predicate: dict[str, Any], state: WorkflowState, final: bool) -> int:
    """Count violating instances of one predicate against a state.

    With final=False only conditions decidable mid-episode are reported (the
    engine polls hard constraints this way every timestep).
    """
    ptype = predicate["type"]

    if ptype == "task_completed_by":
        task = state.graph.tasks.get(predicate["task_id"])
        if task is None:
            return 1
        deadline = predicate["timestep"]
        if task.status is TaskStatus.COMPLETED:
            done_at = task.completed_timestep if task.completed_timestep is not None else 0
            return 1 if done_at > deadline else 0
        return 1 if state.timestep >= deadline else 0

    if ptype == "artifact_exists_for":
        if not final:
            return 0  # decidable only once the workflow has finished
        covered = _task_descendants(state, predicate["task_id"])
        for artifact in state.artifacts.values():
            if artifact.producing_task_id in covered:
                return 0
        return 1

    if ptype == "no_assignment_of_kind":
        banned = predicate["worker_kind"]
        only = predicate.get("task_id")
        count = 0
        for task in state.graph.tasks.values():
            if only is not None and task.id != only:
                continue
            for wid in task.assignment_history:
                worker = state.workers.get(wid)
                if worker is not None and worker.kind.value == banned:
                    count += 1
                    break
        return count

    if ptype == "message_sent_before":
        deadline = predicate["timestep"]
        if state.timestep < deadline:
            return 0
        for msg in state.comms:
            if msg.sender == MANAGER and msg.receiver == predicate["receiver"] and msg.timestep < deadline:
                return 0
        return 1

    if ptype == "budget_below":
        return 1 if state.total_cost_incurred() > predicate["amount"] else 0

    raise WorkflowError(f"unknown predicate type {ptype!r}")


# ----- the five metrics -------------------------------------------------


def preference_alignment(
    schedule: list[tuple[int, dict[str, float]]],
    objective_scores: dict[str, float],
    final_timestep: int,
) -> float:
    """Weighted sum of normalized objective scores under the weights in force;
    across change-points the segment weights are averaged by duration."""
    if not schedule:
        raise WorkflowError("preference schedule is empty")
    for _, weights in schedule:
        total = sum(weights.values())
        if abs(total - 1.0) > 1e-9 or any(w < 0 for w in weights.values()):
            raise WorkflowError(f"preference weights not on the simplex: {weights}")

    horizon = max(final_timestep, 1)
    effective: dict[str, float] = {}
    entries = sorted(schedule, key=lambda e: e[0])
    for i, (start, weights) in enumerate(entries):
        end = entries[i + 1][0] if i + 1 < len(entries) else horizon
        duration = max(0, min(end, horizon) - min(start, horizon))
        if duration == 0:
            continue
        for name, w in weights.items():
            effective[name] = effective.get(name, 0.0) + w * duration / horizon

    score = 0.0
    for name, w in effective.items():
        if name not in objective_scores:
            raise WorkflowError(f"no score for objective {name!r}")
        score += w * objective_scores[name]
    return score


def constraint_adherence(
    constraints: list[Constraint],
    state: WorkflowState,
    terminated_by_hard_violation: bool = False,
) -> tuple[float, bool, dict[str, Any]]:
    """0 on any hard violation; otherwise 1 minus penalty_weight per soft
    violation found, floored at 0."""
    detail: dict[str, Any] = {}
    hard_violated = terminated_by_hard_violation
    for c in constraints:
        if c.kind != "hard":
            continue
        n = predicate_violations(c.predicate, state, final=True)
        detail[c.id] = {"kind": "hard", "violations": n}
        if n > 0:
            hard_violated = True
    if hard_violated:
        return 0.0, True, detail
    score = 1.0
    for c in constraints:
        if c.kind != "soft":
            continue
        n = predicate_violations(c.predicate, state, final=True)
        detail[c.id] = {"kind": "soft", "violations": n, "penalty_weight": c.penalty_weight}
        score -= (c.penalty_weight or 0.0) * n
    return max(0.0, score), False, detail


def goal_achievement(state: WorkflowState) -> tuple[float, dict[str, Any]]:
    """Earned deliverable points over total points, in [0,1].

    Binary deliverables pay out on completion; graduated ones pay
    proportionally to progress. Removed deliverables stay in the denominator.
    """
    deliverables = state.deliverable_tasks()
    total = sum(t.deliverable.points for t in deliverables)
    if total <= 0:
        raise WorkflowError("scenario defines no deliverable points")
    earned = 0.0
    per_task = {}
    for t in deliverables:
        if t.deliverable.scoring == "graduated":
            value = t.progress * t.deliverable.points
        else:
            value = t.deliverable.points if t.status is TaskStatus.COMPLETED else 0.0
        earned += value
        per_task[t.id] = value
    return earned / total, {"points_earned": earned, "points_total": total, "per_task": per_task}


def _manager_stakeholder_messages(state: WorkflowState) -> int:
    return sum(1 for m in state.comms if m.sender == MANAGER and m.receiver == STAKEHOLDER)


def engagement_penalty(manager_messages: int) -> float:
    return max(0.0, 10.0 - manager_messages)


def _rubric_engagement(state: WorkflowState, records: list[dict[str, Any]]) -> float:
    # Penalty inverted so that more engagement scores higher.
    return (10.0 - engagement_penalty(_manager_stakeholder_messages(state))) / 10.0


def _rubric_assignment_load(state: WorkflowState, records: list[dict[str, Any]]) -> float:
    loads: dict[str, int] = {}
    for task in state.graph.tasks.values():
        for wid in set(task.assignment_history):
            loads[wid] = loads.get(wid, 0) + 1
    peak = max(loads.values(), default=0)
    return max(0.0, 10.0 - max(0, peak - 10)) / 10.0


def _rubric_response_latency(state: WorkflowState, records: list[dict[str, Any]]) -> float:
    latencies: list[float] = []
    for msg in state.comms:
        if msg.sender != STAKEHOLDER or msg.receiver != MANAGER:
            continue
        reply = next(
            (
                m.timestep
                for m in state.comms
                if m.sender == MANAGER and m.receiver == STAKEHOLDER and m.timestep >= msg.timestep
            ),
            None,
        )
        latencies.append(10.0 if reply is None else min(10.0, reply - msg.timestep))
    if not latencies:
        return 1.0
    return max(0.0, 10.0 - statistics.mean(latencies)) / 10.0


def _rubric_graph_coordination(state: WorkflowState, records: list[dict[str, Any]]) -> float:
    leaves = [t for t in state.graph.live_tasks() if not t.composite]
    if len(leaves) < 2:
        return 1.0
    linked = {tid for edge in state.graph.edges for tid in edge}
    return sum(1 for t in leaves if t.id in linked) / len(leaves)


def _rubric_question_asked(state: WorkflowState, records: list[dict[str, Any]]) -> float:
    for m in state.comms:
        if m.sender == MANAGER and m.receiver == STAKEHOLDER and "?" in m.content:
            return 1.0
    return 0.0


def _rubric_preference_acknowledged(state: WorkflowState, records: list[dict[str, Any]]) -> float:
    change_points = [
        r["timestep"]
        for r in records
        if r["agent"] == STAKEHOLDER and r["action"]["type"] == "update_preferences"
    ]
    if not change_points:
        return 1.0
    acknowledged = 0
    for t in change_points:
        if any(
            m.sender == MANAGER and m.receiver == STAKEHOLDER and t < m.timestep <= t + 10
            for m in state.comms
        ):
            acknowledged += 1
    return acknowledged / len(change_points)


STAKEHOLDER_RUBRICS: list[Rubric] = [
    Rubric("engagement", 1.0, _rubric_engagement),
    Rubric("assignment_load", 1.0, _rubric_assignment_load),
    Rubric("response_latency", 1.0, _rubric_response_latency),
    Rubric("graph_coordination", 1.0, _rubric_graph_coordination),
    Rubric("question_asked", 1.0, _rubric_question_asked),
    Rubric("preference_acknowledged", 1.0, _rubric_preference_acknowledged),
]


def stakeholder_management(
    state: WorkflowState, records: list[dict[str, Any]]
) -> tuple[float, dict[str, Any]]:
    """Zeroing gate on manager->stakeholder communication, then the mean of the
    six normalized rubrics."""
    n = _manager_stakeholder_messages(state)
    breakdown: dict[str, Any] = {
        "manager_messages": n,
        "engagement_penalty": engagement_penalty(n),
    }
    scores = {r.name: r.evaluate(state, records) for r in STAKEHOLDER_RUBRICS}
    breakdown.update(scores)
    if n == 0:
        return 0.0, breakdown
    return statistics.mean(scores.values()), breakdown


def completion_time_hours(final_timestep: int, hours_per_timestep: float) -> float:
    return final_timestep * hours_per_timestep


# ----- objective scorers (feed preference alignment) ---------------------------


def objective_scores(
    doc: ScenarioDoc,
    config: dict[str, Any],
    records: list[dict[str, Any]],
    state: WorkflowState,
) -> dict[str, float]:
    """Deterministic per-objective scores, all in [0,1].

    quality: mean artifact quality. speed: fraction of the horizon left when
    the episode ended. cost: 1.0 while spend <= estimate, linear to 0 at twice
    the estimate. compliance: soft-constraint pass rate (0 on hard violation).
    governance: oversight activity (read-only checks + stakeholder messages)
    against a 10-event budget. Any other named objective scores the
    deliverable completion fraction.
    """
    scores: dict[str, float] = {}

    artifacts = list(state.artifacts.values())
    scores["quality"] = (
        statistics.mean(a.quality for a in artifacts) if artifacts else 0.0
    )

    max_timesteps = config.get("max_timesteps", 100)
    scores["speed"] = max(0.0, 1.0 - state.timestep / max_timesteps)

    budget = sum(t.estimated_cost for t in state.graph.tasks.values())
    spent = state.total_cost_incurred()
    if budget > 0:
        scores["cost"] = min(1.0, max(0.0, 2.0 - spent / budget))
    else:
        scores["cost"] = 1.0 if spent == 0 else 0.0

    hard = any(
        predicate_violations(c.predicate, state, final=True) > 0
        for c in state.constraints
        if c.kind == "hard"
    ) or (state.termination_reason or "").startswith("hard_constraint")
    soft = [c for c in state.constraints if c.kind == "soft"]
    if hard:
        scores["compliance"] = 0.0
    elif soft:
        violated = sum(
            1 for c in soft if predicate_violations(c.predicate, state, final=True) > 0
        )
        scores["compliance"] = 1.0 - violated / len(soft)
    else:
        scores["compliance"] = 1.0

    oversight = sum(
        1
        for r in records
        if r["agent"] == MANAGER
        and r["action"]["type"]
        in ("get_workflow_status", "get_available_agents", "get_pending_tasks", "inspect_task")
    ) + _manager_stakeholder_messages(state)
    scores["governance"] = min(1.0, oversight / 10.0)

    # Fallback for scenario-specific objective names.
    deliverables = state.deliverable_tasks()
    if deliverables:
        total = sum(t.deliverable.points for t in deliverables)
        earned = sum(
            t.deliverable.points for t in deliverables if t.status is TaskStatus.COMPLETED
        )
        fallback = earned / total if total > 0 else 0.0
    else:
        live = state.graph.live_tasks()
        fallback = (
            sum(1 for t in live if t.status is TaskStatus.COMPLETED) / len(live) if live else 1.0
        )
    for entry in doc.preference_schedule:
        for name in entry.weights:
            scores.setdefault(name, fallback)
    return scores


def effective_preference_schedule(
    doc: ScenarioDoc, records: list[dict[str, Any]]
) -> list[tuple[int, dict[str, float]]]:
    """The weight vectors actually in force over the episode: the scenario's
    initial vector plus every applied update in trace order."""
    schedule: list[tuple[int, dict[str, float]]] = []
    if doc.preference_schedule:
        schedule.append((0, dict(doc.preference_schedule[0].weights)))
    for r in records:
        if r["agent"] == STAKEHOLDER and r["action"]["type"] == "update_preferences":
            schedule.append((r["timestep"], dict(r["action"]["params"]["weights"])))
    return schedule


# ----- assembly -------------------------------------------------


def compute_metrics(
    doc: ScenarioDoc,
    config: dict[str, Any],
    records: list[dict[str, Any]],
    state: WorkflowState,
    extra_rubrics: Optional[list[Rubric]] = None,
) -> MetricReport:
    """Score one finished episode. `extra_rubrics` is the external-grader hook;
    their normalized scores are reported in the breakdown."""
    scores = objective_scores(doc, config, records, state)
    schedule = effective_preference_schedule(doc, records)
    alignment = preference_alignment(schedule, scores, state.timestep)

    terminated_hard = (state.termination_reason or "").startswith("hard_constraint")
    adherence, hard_violation, constraint_detail = constraint_adherence(
        state.constraints, state, terminated_by_hard_violation=terminated_hard
    )

    try:
        goal, goal_detail = goal_achievement(state)
    except WorkflowError:
        # Scenarios without deliverable tiers: completion fraction of live tasks.
        live = state.graph.live_tasks()
        goal = (
            sum(1 for t in live if t.status is TaskStatus.COMPLETED) / len(live) if live else 1.0
        )
        goal_detail = {"points_earned": None, "points_total": None, "per_task": {}}

    management, management_detail = stakeholder_management(state, records)

    hours = completion_time_hours(
        state.timestep, config.get("execution", {}).get("hours_per_timestep", 1.0)
    )

    breakdown = {
        "objective_scores": {k: scores[k] for k in sorted(scores)},
        "constraints": constraint_detail,
        "goal": goal_detail,
        "stakeholder": management_detail,
    }
    if extra_rubrics:
        breakdown["external"] = {
            r.name: r.evaluate(state, records) / r.max_score for r in extra_rubrics
        }

    return MetricReport(
        preference_alignment=alignment,
        constraint_adherence=adherence,
        goal_achievement=goal,
        stakeholder_management=management,
        completion_time_hours=hours,
        hard_violation=hard_violation,
        rubric_breakdown=breakdown,
    )


def aggregate(reports: list[MetricReport]) -> dict[str, dict[str, float]]:
    """Per-metric sample mean and population standard deviation across seeds."""
    if not reports:
        raise WorkflowError("nothing to aggregate")
    out: dict[str, dict[str, float]] = {}
    for name in METRIC_NAMES:
        values = [getattr(r, name) for r in reports]
        out[name] = {"mean": statistics.mean(values), "std": statistics.pstdev(values)}
    return out
