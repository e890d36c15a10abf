"""Discrete-timestep episode engine.

Within one step the fixed order is: stakeholder actions, manager actions,
worker execution, clock advance, team churn, scheduled preference changes,
constraint checks, termination checks. The fixed order (plus per-entity RNG
substreams) makes whole episodes a pure function of (scenario, seed, policies).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from . import evaluation
from .actions import (
    ManagerAction,
    StakeholderAction,
    apply_manager_action,
    apply_stakeholder_action,
    decode_manager_action,
    decode_stakeholder_action,
    failed_action,
    manager_observation,
    stakeholder_observation,
    worker_observation,
)
from .model import (
    MANAGER,
    STAKEHOLDER,
    PreferenceVector,
    Task,
    TaskStatus,
    Worker,
    WorkerKind,
    WorkflowError,
    WorkflowState,
    artifact_kind_for,
    skill_match,
)
from .rng import substream
from .scenario import ExecutionProfile, ScenarioDoc, build_initial_state, load_scenario
from .trace import Trace, action_record, footer_record, header_record, state_digest

# Public alias: the stochasticity profile doubles as the execution model.
ExecutionModel = ExecutionProfile

AgentActions = Union[ManagerAction, StakeholderAction, list, None]


@dataclass
class EpisodeConfig:
    """Everything that determines an episode besides the policies."""

    scenario: ScenarioDoc
    seed: int
    max_manager_actions: int = 100
    max_timesteps: int = 100
    worker_capacity: int = 1
    execution: ExecutionProfile = field(default_factory=ExecutionProfile)

    @classmethod
    def for_scenario(
        cls,
        scenario: Any,
        seed: int,
        max_manager_actions: Optional[int] = None,
        max_timesteps: Optional[int] = None,
        worker_capacity: Optional[int] = None,
    ) -> "EpisodeConfig":
        doc = load_scenario(scenario)
        if max_manager_actions is not None and max_manager_actions < 1:
            raise WorkflowError("max_manager_actions must be >= 1")
        if max_timesteps is not None and max_timesteps < 1:
            raise WorkflowError("max_timesteps must be >= 1")
        return cls(
            scenario=doc,
            seed=seed,
            max_manager_actions=(
                doc.config.max_manager_actions if max_manager_actions is None else max_manager_actions
            ),
            max_timesteps=doc.config.max_timesteps if max_timesteps is None else max_timesteps,
            worker_capacity=doc.config.worker_capacity if worker_capacity is None else worker_capacity,
            execution=doc.execution,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "max_manager_actions": self.max_manager_actions,
            "max_timesteps": self.max_timesteps,
            "worker_capacity": self.worker_capacity,
            "execution": {
                "duration_sigma": self.execution.duration_sigma,
                "quality_noise": self.execution.quality_noise,
                "human_latency_multiplier": self.execution.human_latency_multiplier,
                "hours_per_timestep": self.execution.hours_per_timestep,
            },
        }


def sample_duration(
    rng, estimated_hours: float, worker: Worker, profile: ExecutionProfile
) -> int:
    """Timesteps a task takes this attempt: estimate x lognormal multiplier
    (x human latency for simulated humans), divided by hours per timestep,
    ceiling, minimum one."""
    multiplier = 1.0
    if profile.duration_sigma > 0:
        multiplier = rng.lognormvariate(0.0, profile.duration_sigma)
    if worker.kind is WorkerKind.SIMULATED_HUMAN:
        multiplier *= profile.human_latency_multiplier
    steps = math.ceil(estimated_hours * multiplier / profile.hours_per_timestep)
    return max(1, steps)


def sample_quality(rng, worker: Worker, task: Task, profile: ExecutionProfile) -> float:
    """Skill match plus optional gaussian noise, clamped to [0,1]."""
    quality = skill_match(worker, task)
    if profile.quality_noise > 0:
        quality += rng.normalvariate(0.0, profile.quality_noise)
    return min(1.0, max(0.0, quality))


class EpisodeTerminated(WorkflowError):
    """step() was called on a terminated episode."""


class Engine:
    """Owns one episode's state and applies joint actions step by step."""

    def __init__(self, config: EpisodeConfig):
        self.config = config
        self.doc = config.scenario
        self.state: WorkflowState = build_initial_state(self.doc)
        self.records: list[dict[str, Any]] = []
        self._seq = 0
        self._end_granted = False
        # When no stakeholder policy drives the episode, the engine applies the
        # scenario's preference schedule as part of the transition dynamics.
        self.apply_schedule_in_transition = True
        self._check_termination()

    # ----- observations -------------------------------------------------

    def observe(self, agent_id: str) -> dict[str, Any]:
        if agent_id == MANAGER:
            return manager_observation(
                self.state,
                self.config.max_manager_actions,
                decomposition_templates=self.doc.decomposition_templates,
            )
        if agent_id == STAKEHOLDER:
            return stakeholder_observation(self.state)
        return worker_observation(self.state, agent_id)

    # ----- step -------------------------------------------------

    def step(self, joint_actions: dict[str, AgentActions]) -> dict[str, dict[str, Any]]:
        state = self.state
        if state.terminated:
            raise EpisodeTerminated("episode already terminated")

        for action in _as_list(joint_actions.get(STAKEHOLDER)):
            self._apply_stakeholder(action)

        for action in _as_list(joint_actions.get(MANAGER)):
            if state.manager_action_count >= self.config.max_manager_actions:
                break
            self._apply_manager(action)

        self._execution_phase()
        state.timestep += 1
        self._churn_phase()
        if self.apply_schedule_in_transition:
            self._apply_scheduled_preferences()
        state.refresh_statuses()
        self._check_hard_constraints()
        self._check_termination()

        return {
            MANAGER: self.observe(MANAGER),
            STAKEHOLDER: self.observe(STAKEHOLDER),
        }

    # ----- per-phase helpers -------------------------------------------------

    def _apply_stakeholder(self, action: StakeholderAction) -> None:
        result = apply_stakeholder_action(self.state, action)
        if not result.ok:
            action = StakeholderAction("noop", {}, rationale=f"rejected: {result.error}")
            apply_stakeholder_action(self.state, action)
        elif action.type == "approve_end" and result.payload and result.payload.get("approved"):
            self._end_granted = True
        self._record(STAKEHOLDER, action.encode(), action.rationale)

    def _apply_manager(self, action: ManagerAction) -> None:
        result = apply_manager_action(
            self.state, action, decomposition_templates=self.doc.decomposition_templates
        )
        if not result.ok:
            action = failed_action(action, result.error or "rejected")
            apply_manager_action(self.state, action)
        self.state.manager_action_count += 1
        self._record(MANAGER, action.encode(), action.rationale, warning=result.warning or "")

    def _execution_phase(self) -> None:
        state = self.state
        capacity = self.config.worker_capacity
        profile = self.config.execution

        # Start queued, ready tasks on workers with spare capacity.
        for wid in sorted(state.workers):
            worker = state.workers[wid]
            if not worker.active:
                continue
            running = sum(
                1
                for tid in worker.assigned_task_ids
                if state.graph.tasks[tid].status is TaskStatus.RUNNING
            )
            for tid in list(worker.assigned_task_ids):
                if running >= capacity:
                    break
                task = state.graph.tasks[tid]
                if task.status in (TaskStatus.PENDING, TaskStatus.READY) and state.graph.is_ready(tid):
                    task.attempt += 1
                    rng = substream(self.config.seed, "duration", tid, str(task.attempt))
                    task.run_total_steps = sample_duration(
                        rng, task.estimated_hours, worker, profile
                    )
                    task.status = TaskStatus.RUNNING
                    running += 1

        # Advance every running task whose worker is present.
        for tid in sorted(state.graph.tasks):
            task = state.graph.tasks[tid]
            if task.status is not TaskStatus.RUNNING or task.owner is None:
                continue
            worker = state.workers[task.owner]
            if not worker.active:
                continue
            task.progress = min(1.0, task.progress + 1.0 / task.run_total_steps)
            task.cost_incurred += worker.cost_rate * profile.hours_per_timestep
            if task.progress >= 1.0 - 1e-9:
                self._complete_task(task, worker)

        state.refresh_statuses()

    def _complete_task(self, task: Task, worker: Worker) -> None:
        state = self.state
        task.progress = 1.0
        task.status = TaskStatus.COMPLETED
        task.completed_timestep = state.timestep
        if task.id in worker.assigned_task_ids:
            worker.assigned_task_ids.remove(task.id)
        rng = substream(self.config.seed, "quality", task.id, str(task.attempt))
        quality = sample_quality(rng, worker, task, self.config.execution)
        state.add_artifact(
            producing_task_id=task.id,
            kind=artifact_kind_for(task),
            content=f"{task.name}: output produced by {worker.id}",
            quality=quality,
        )

    def _churn_phase(self) -> None:
        state = self.state
        for wid in sorted(state.workers):
            worker = state.workers[wid]
            was_active = worker.active
            worker.active = worker.should_be_active(state.timestep)
            if was_active and not worker.active:
                for tid in list(worker.assigned_task_ids):
                    task = state.graph.tasks[tid]
                    task.owner = None
                    if task.status is TaskStatus.RUNNING:
                        task.status = TaskStatus.READY  # progress is retained
                worker.assigned_task_ids.clear()

    def _apply_scheduled_preferences(self) -> None:
        for entry in self.doc.preference_schedule:
            if entry.timestep == self.state.timestep and entry.timestep > 0:
                self.state.set_preferences(PreferenceVector(dict(entry.weights)))
                self._record(
                    STAKEHOLDER,
                    StakeholderAction(
                        "update_preferences", {"weights": dict(sorted(entry.weights.items()))}
                    ).encode(),
                    "scheduled preference change",
                )

    def _check_hard_constraints(self) -> None:
        state = self.state
        if state.terminated:
            return
        for constraint in state.constraints:
            if constraint.kind != "hard":
                continue
            if evaluation.predicate_violations(constraint.predicate, state, final=False) > 0:
                self._terminate(f"hard_constraint:{constraint.id}")
                return

    def _check_termination(self) -> None:
        state = self.state
        if state.terminated:
            return
        if self._workflow_complete():
            self._terminate("completed")
        elif self._end_granted:
            self._terminate("end_request_granted")
        elif state.manager_action_count >= self.config.max_manager_actions:
            self._terminate("action_cap")
        elif state.timestep >= self.config.max_timesteps:
            self._terminate("timestep_cap")

    def _workflow_complete(self) -> bool:
        deliverables = self.state.deliverable_tasks()
        if deliverables:
            return all(t.status is TaskStatus.COMPLETED for t in deliverables)
        live = self.state.graph.live_tasks()
        return all(t.status is TaskStatus.COMPLETED for t in live)

    def _terminate(self, reason: str) -> None:
        self.state.terminated = True
        self.state.termination_reason = reason

    def _record(self, agent: str, action: dict[str, Any], rationale: str, warning: str = "") -> None:
        self.records.append(
            action_record(
                seq=self._seq,
                timestep=self.state.timestep,
                agent=agent,
                action=action,
                rationale=rationale,
                digest=state_digest(self.state),
                warning=warning,
            )
        )
        self._seq += 1


def _as_list(actions: AgentActions) -> list:
    if actions is None:
        return []
    if isinstance(actions, (ManagerAction, StakeholderAction)):
        return [actions]
    return list(actions)


def run_episode(
    config: EpisodeConfig,
    policies: dict[str, Any],
    trace_path: Optional[str] = None,
) -> Trace:
    """Run one seeded episode to termination and return its trace.

    `policies` maps "manager" (required) and "stakeholder" (optional) to
    policy objects exposing act(observation) -> action | list[action].
    """
    if MANAGER not in policies:
        raise WorkflowError("a manager policy is required")
    engine = Engine(config)
    manager_policy = policies[MANAGER]
    stakeholder_policy = policies.get(STAKEHOLDER)
    engine.apply_schedule_in_transition = stakeholder_policy is None

    policy_names = {
        agent: getattr(p, "name", type(p).__name__) for agent, p in policies.items()
    }
    header = header_record(
        engine.doc.to_dict(), config.seed, config.to_dict(), policy_names
    )

    while not engine.state.terminated:
        joint: dict[str, AgentActions] = {}
        if stakeholder_policy is not None:
            joint[STAKEHOLDER] = _safe_stakeholder_actions(
                stakeholder_policy, engine.observe(STAKEHOLDER)
            )
        joint[MANAGER] = _safe_manager_actions(manager_policy, engine.observe(MANAGER))
        engine.step(joint)

    report = evaluation.compute_metrics(
        engine.doc, config.to_dict(), engine.records, engine.state
    )
    footer = footer_record(
        reason=engine.state.termination_reason or "unknown",
        final_timestep=engine.state.timestep,
        manager_action_count=engine.state.manager_action_count,
        metrics=report.to_dict(),
        final_digest=state_digest(engine.state),
    )
    trace = Trace(header=header, records=engine.records, footer=footer)
    if trace_path is not None:
        trace.write(trace_path)
    return trace


def _safe_manager_actions(policy: Any, observation: dict[str, Any]) -> list[ManagerAction]:
    try:
        actions = _as_list(policy.act(observation))
        for a in actions:
            if not isinstance(a, ManagerAction):
                raise WorkflowError(f"manager policy returned {type(a).__name__}")
        return actions
    except Exception as exc:  # noqa: BLE001 - policy faults must not kill episodes
        return [
            ManagerAction(
                "failed_action",
                {"metadata": {"error": f"policy failure: {exc}"}},
                rationale="substituted after policy failure",
            )
        ]


def _safe_stakeholder_actions(policy: Any, observation: dict[str, Any]) -> list[StakeholderAction]:
    try:
        actions = _as_list(policy.act(observation))
        for a in actions:
            if not isinstance(a, StakeholderAction):
                raise WorkflowError(f"stakeholder policy returned {type(a).__name__}")
        return actions
    except Exception as exc:  # noqa: BLE001
        return [StakeholderAction("noop", {}, rationale=f"substituted after policy failure: {exc}")]


# ----- replay -------------------------------------------------


class _ReplayPolicy:
    """Feeds recorded actions back for one agent, keyed by timestep."""

    name = "replay"

    def __init__(self, agent: str, records: list[dict[str, Any]]):
        self._by_timestep: dict[int, list[dict[str, Any]]] = {}
        for record in records:
            if record["agent"] == agent:
                self._by_timestep.setdefault(record["timestep"], []).append(record)
        self._agent = agent

    def act(self, observation: dict[str, Any]) -> list:
        batch = self._by_timestep.pop(observation["timestep"], [])
        out = []
        for record in batch:
            if self._agent == MANAGER:
                action = decode_manager_action(record["action"])
            else:
                action = decode_stakeholder_action(record["action"])
            action.rationale = record["rationale"]
            out.append(action)
        return out


def replay_trace(trace: Trace) -> tuple[Trace, list[str]]:
    """Re-run a trace's actions from its embedded scenario.

    Returns the regenerated trace plus a list of divergence descriptions
    (empty when every record and digest reproduces exactly).
    """
    from .scenario import scenario_from_dict

    doc = scenario_from_dict(trace.header["scenario"])
    cfg = trace.header["config"]
    config = EpisodeConfig(
        scenario=doc,
        seed=trace.header["seed"],
        max_manager_actions=cfg["max_manager_actions"],
        max_timesteps=cfg["max_timesteps"],
        worker_capacity=cfg["worker_capacity"],
        execution=ExecutionProfile(**cfg["execution"]),
    )
    # Mirror the original bundle: if no stakeholder policy drove the run, the
    # engine applied (and recorded) scheduled preference changes itself and
    # will re-record them on replay; feeding them back too would double-apply.
    policies: dict[str, Any] = {MANAGER: _ReplayPolicy(MANAGER, trace.records)}
    if STAKEHOLDER in trace.header.get("policies", {}):
        policies[STAKEHOLDER] = _ReplayPolicy(STAKEHOLDER, trace.records)
    replayed = run_episode(config, policies)
    replayed.header["policies"] = dict(trace.header.get("policies", {}))

    divergences: list[str] = []
    if len(replayed.records) != len(trace.records):
        divergences.append(
            f"record count {len(replayed.records)} != original {len(trace.records)}"
        )
    for original, redone in zip(trace.records, replayed.records):
        if original["digest"] != redone["digest"]:
            divergences.append(
                f"digest mismatch at seq {original['seq']} "
                f"({original['digest']} != {redone['digest']})"
            )
            break
        if original["action"] != redone["action"] or original["agent"] != redone["agent"]:
            divergences.append(f"action mismatch at seq {original['seq']}")
            break
    return replayed, divergences
