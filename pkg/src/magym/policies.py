"""Scripted decision policies: manager baselines and the stakeholder.

Policies are pure functions of their observation stream (plus a dedicated RNG
substream for the random baseline), so episodes replay bit-identically.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Optional

from .actions import MANAGER_ACTION_SCHEMAS, ManagerAction, StakeholderAction
from .scenario import ScenarioDoc, ScheduleEntry

ACTION_TYPES = sorted(MANAGER_ACTION_SCHEMAS)

_CANNED_MESSAGES = [
    "Please share a quick status update.",
    "Prioritizing the critical path this week.",
    "Flagging a possible bottleneck ahead.",
    "Let me know if requirements changed.",
]

_CANNED_INSTRUCTIONS = [
    "Focus on the acceptance checklist first.",
    "Keep the output concise and well-sourced.",
    "Coordinate with the previous task owner.",
]


def _obs_skill_match(capabilities: dict[str, float], required_skills: list[str]) -> float:
    if not required_skills:
        return 1.0
    return sum(capabilities.get(s, 0.0) for s in required_skills) / len(required_skills)


class RandomPolicy:
    """Uniform draw over the 16 action types, parameters drawn uniformly from
    the currently legal values; when none exist the action is emitted with an
    arbitrary existing id so it fails naturally."""

    name = "random"

    def __init__(self, rng: random.Random):
        self.rng = rng

    def act(self, obs: dict[str, Any]) -> ManagerAction:
        action_type = ACTION_TYPES[self.rng.randrange(len(ACTION_TYPES))]
        params = self._fill_params(action_type, obs)
        return ManagerAction(action_type, params, rationale="uniform draw")

    def _pick(self, values: list, fallback: list) -> Any:
        pool = values or fallback or ["none"]
        return pool[self.rng.randrange(len(pool))]

    def _fill_params(self, action_type: str, obs: dict[str, Any]) -> dict[str, Any]:
        rng = self.rng
        tasks = obs["tasks"]
        all_task_ids = [t["id"] for t in tasks]
        worker_ids = [w["id"] for w in obs["workers"]]
        active_ids = [w["id"] for w in obs["workers"] if w["active"]]

        if action_type == "assign_task":
            ready_unassigned = [
                t["id"] for t in tasks if t["ready"] and t["owner"] is None
            ]
            return {
                "task_id": self._pick(ready_unassigned, all_task_ids),
                "worker_id": self._pick(active_ids, worker_ids),
            }
        if action_type == "assign_all_pending_tasks":
            if rng.random() < 0.5:
                return {}
            return {"worker_id": self._pick(active_ids, worker_ids)}
        if action_type == "create_task":
            return {
                "name": f"ad-hoc task {rng.randrange(1000)}",
                "description": "exploratory work item",
                "estimated_hours": float(rng.randrange(1, 9)),
                "estimated_cost": float(rng.randrange(0, 500)),
            }
        if action_type == "remove_task":
            removable = [
                t["id"]
                for t in tasks
                if t["status"] not in ("running", "completed", "removed")
            ]
            return {"task_id": self._pick(removable, all_task_ids)}
        if action_type == "send_message":
            receivers: list[Optional[str]] = [None, "stakeholder", *worker_ids]
            receiver = receivers[rng.randrange(len(receivers))]
            content = _CANNED_MESSAGES[rng.randrange(len(_CANNED_MESSAGES))]
            params: dict[str, Any] = {"content": content}
            if receiver is not None:
                params["receiver_id"] = receiver
            return params
        if action_type == "refine_task":
            refinable = [t["id"] for t in tasks if t["status"] != "completed"]
            return {
                "task_id": self._pick(refinable, all_task_ids),
                "instructions": _CANNED_INSTRUCTIONS[rng.randrange(len(_CANNED_INSTRUCTIONS))],
            }
        if action_type in ("add_task_dependency", "remove_task_dependency"):
            if action_type == "remove_task_dependency" and obs["edges"]:
                edge = obs["edges"][rng.randrange(len(obs["edges"]))]
                return {"prereq_id": edge[0], "dep_id": edge[1]}
            first = self._pick(all_task_ids, [])
            second = self._pick([t for t in all_task_ids if t != first], [first])
            return {"prereq_id": first, "dep_id": second}
        if action_type in ("inspect_task", "decompose_task"):
            return {"task_id": self._pick(all_task_ids, [])}
        if action_type == "request_end_workflow":
            return {"reason": "wrapping up"}
        if action_type == "failed_action":
            return {"metadata": {"note": "synthetic failure probe"}}
        return {}  # noop and the read-only queries take no parameters


class AssignAllPolicy:
    """Upfront bulk routing: every time a leaf becomes ready and unassigned it
    is paired with the active worker maximizing skill match (ties to the
    smaller worker id); otherwise no-ops. Never edits the graph or messages."""

    name = "assign_all"

    def act(self, obs: dict[str, Any]) -> list[ManagerAction]:
        workers = [w for w in obs["workers"] if w["active"]]
        if not workers:
            return [ManagerAction("noop", {}, rationale="no active workers")]
        batch = []
        for task in obs["tasks"]:
            if not task["ready"] or task["owner"] is not None:
                continue
            best = sorted(
                workers,
                key=lambda w: (-_obs_skill_match(w["capabilities"], task["required_skills"]), w["id"]),
            )[0]
            batch.append(
                ManagerAction(
                    "assign_task",
                    {"task_id": task["id"], "worker_id": best["id"]},
                    rationale="skill-fit bulk routing",
                )
            )
        if not batch:
            return [ManagerAction("noop", {}, rationale="plan dispatched; waiting")]
        return batch


class GreedyPolicy:
    """Priority rules per step: route the highest-value ready task to the best
    idle worker; else decompose a templated task; else send the stakeholder a
    ten-step status update; else check status."""

    name = "greedy"

    def act(self, obs: dict[str, Any]) -> ManagerAction:
        idle = [
            w
            for w in obs["workers"]
            if w["active"] and not w["running_task_ids"] and not w["queued_task_ids"]
        ]
        ready_unassigned = [
            t for t in obs["tasks"] if t["ready"] and t["owner"] is None
        ]
        if ready_unassigned and idle:
            def points(t: dict[str, Any]) -> float:
                return t["deliverable"]["points"] if t["deliverable"] else 0.0

            task = sorted(ready_unassigned, key=lambda t: (-points(t), t["id"]))[0]
            worker = sorted(
                idle,
                key=lambda w: (-_obs_skill_match(w["capabilities"], task["required_skills"]), w["id"]),
            )[0]
            return ManagerAction(
                "assign_task",
                {"task_id": task["id"], "worker_id": worker["id"]},
                rationale="skill-fit allocation to highest-value ready task",
            )

        if not obs["ready_task_ids"]:
            decomposable = [
                t
                for t in obs["tasks"]
                if t["has_decomposition_template"]
                and not t["subtask_ids"]
                and t["status"] in ("pending", "ready")
            ]
            if decomposable:
                target = sorted(decomposable, key=lambda t: t["id"])[0]
                return ManagerAction(
                    "decompose_task",
                    {"task_id": target["id"]},
                    rationale="expose parallelism in a blocked workflow",
                )

        t = obs["timestep"]
        if t > 0 and t % 10 == 0:
            done = sum(1 for x in obs["tasks"] if x["status"] == "completed")
            return ManagerAction(
                "send_message",
                {
                    "content": (
                        f"Status: {done}/{len(obs['tasks'])} tasks complete at t={t}. "
                        "Any priority changes?"
                    ),
                    "receiver_id": "stakeholder",
                },
                rationale="periodic stakeholder status update",
            )

        if obs["tasks"]:
            return ManagerAction(
                "get_workflow_status", {}, rationale="monitor progress between allocations"
            )
        return ManagerAction("noop", {}, rationale="nothing to do")


@dataclass
class StakeholderScript:
    """Scenario-driven stakeholder behavior."""

    schedule: list[ScheduleEntry] = field(default_factory=list)
    reply_latency: int = 2
    end_approval: str = "when_deliverables_complete"

    @classmethod
    def from_scenario(cls, doc: ScenarioDoc) -> "StakeholderScript":
        return cls(
            schedule=[ScheduleEntry(e.timestep, dict(e.weights)) for e in doc.preference_schedule],
            reply_latency=doc.stakeholder.reply_latency,
            end_approval=doc.stakeholder.end_approval,
        )


class ScriptedStakeholderPolicy:
    """Applies the preference schedule, answers manager questions after the
    scripted latency, and rules on end-of-workflow requests."""

    name = "scripted_stakeholder"

    def __init__(self, script: StakeholderScript):
        self.script = script

    def act(self, obs: dict[str, Any]) -> StakeholderAction:
        t = obs["timestep"]
        for entry in self.script.schedule:
            if entry.timestep == t and t > 0:
                return StakeholderAction(
                    "update_preferences",
                    {"weights": dict(sorted(entry.weights.items()))},
                    rationale="scheduled preference change",
                )

        due = [
            q
            for q in obs["open_questions"]
            if t - q["timestep"] >= self.script.reply_latency
        ]
        if due:
            question = min(due, key=lambda q: q["index"])
            return StakeholderAction(
                "answer_question",
                {
                    "message_index": question["index"],
                    "content": "Noted. Current priorities stand; keep the critical items moving.",
                },
                rationale="reply to manager question",
            )

        if obs["pending_end_request"] is not None:
            return StakeholderAction(
                "approve_end",
                {"approve": self._approves(obs)},
                rationale=f"end-approval rule: {self.script.end_approval}",
            )

        return StakeholderAction("noop", {})

    def _approves(self, obs: dict[str, Any]) -> bool:
        rule = self.script.end_approval
        if rule == "always":
            return True
        if rule == "never":
            return False
        progress = obs["progress"]
        total = progress["deliverable_points_total"]
        return total > 0 and progress["deliverable_points_earned"] >= total


@dataclass
class PolicySpec:
    """How to build a manager policy for an episode."""

    kind: str  # random | assign_all | greedy | external
    bridge_cmd: Optional[str] = None
    bridge_timeout: float = 10.0

    def validate(self) -> None:
        if self.kind not in ("random", "assign_all", "greedy", "external"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "external" and not self.bridge_cmd:
            raise ValueError("external policies need a bridge command")


def make_manager_policy(spec: PolicySpec, seed: int, scenario_id: str):
    """Instantiate a fresh manager policy for one seeded episode."""
    from .bridge import ExternalPolicy  # deferred: bridge pulls in subprocess machinery
    from .rng import substream

    spec.validate()
    if spec.kind == "random":
        return RandomPolicy(substream(seed, "policy", "manager"))
    if spec.kind == "assign_all":
        return AssignAllPolicy()
    if spec.kind == "greedy":
        return GreedyPolicy()
    return ExternalPolicy(spec.bridge_cmd, scenario_id=scenario_id, timeout=spec.bridge_timeout)


def make_stakeholder_policy(doc: ScenarioDoc) -> ScriptedStakeholderPolicy:
    return ScriptedStakeholderPolicy(StakeholderScript.from_scenario(doc))
