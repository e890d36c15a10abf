from __future__ import annotations

import pytest

from magym.model import (
    Constraint,
    Deliverable,
    TaskDraft,
    Worker,
    WorkerKind,
    WorkflowState,
)
from magym.scenario import (
    EpisodeDefaults,
    ExecutionProfile,
    ScenarioDoc,
    ScheduleEntry,
    StakeholderSpec,
)


def make_state(tasks: int = 0) -> WorkflowState:
    state = WorkflowState()
    for i in range(tasks):
        state.add_task(TaskDraft(id=f"t{i}", name=f"task {i}", estimated_hours=2.0))
    state.refresh_statuses()
    return state


def make_worker(wid: str = "w1", kind: WorkerKind = WorkerKind.AI, **kwargs) -> Worker:
    defaults = dict(capabilities={"skill": 0.8}, cost_rate=10.0)
    defaults.update(kwargs)
    return Worker(id=wid, kind=kind, **defaults)


def tiny_scenario(
    *,
    seed_tasks: int = 3,
    duration_sigma: float = 0.0,
    quality_noise: float = 0.0,
    human_latency: float = 1.0,
    deliverables: bool = False,
    constraints: list[Constraint] | None = None,
    schedule: list[ScheduleEntry] | None = None,
    workers: list[Worker] | None = None,
    edges: list[tuple[str, str]] | None = None,
    max_timesteps: int = 100,
    max_manager_actions: int = 100,
) -> ScenarioDoc:
    """A minimal runnable document for engine-level tests.

    Deliverable tiers are omitted by default (tier counts below 10 would fail
    validation); tests needing deliverables get a spread of ten supporting ones.
    """
    tasks = []
    n = max(seed_tasks, 10) if deliverables else seed_tasks
    for i in range(n):
        tasks.append(
            TaskDraft(
                id=f"t{i}",
                name=f"task {i}",
                estimated_hours=2.0,
                estimated_cost=20.0,
                required_skills=["skill"],
                deliverable=Deliverable("supporting", 5.0) if deliverables else None,
            )
        )
    return ScenarioDoc(
        id="tiny",
        title="Tiny test scenario",
        domain="test",
        tasks=tasks,
        edges=list(edges or []),
        workers=workers
        if workers is not None
        else [
            Worker(
                id="w1",
                kind=WorkerKind.AI,
                capabilities={"skill": 1.0},
                cost_rate=10.0,
            )
        ],
        constraints=list(constraints or []),
        preference_schedule=schedule
        or [ScheduleEntry(0, {"quality": 0.5, "speed": 0.25, "compliance": 0.25})],
        stakeholder=StakeholderSpec(reply_latency=2, end_approval="when_deliverables_complete"),
        execution=ExecutionProfile(
            duration_sigma=duration_sigma,
            quality_noise=quality_noise,
            human_latency_multiplier=human_latency,
            hours_per_timestep=1.0,
        ),
        config=EpisodeDefaults(
            max_manager_actions=max_manager_actions,
            max_timesteps=max_timesteps,
            worker_capacity=1,
        ),
    )


@pytest.fixture
def state3() -> WorkflowState:
    return make_state(3)
