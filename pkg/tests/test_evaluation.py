from __future__ import annotations

import random

import pytest

from magym.engine import EpisodeConfig, run_episode
from magym.evaluation import (
    MetricReport,
    Rubric,
    aggregate,
    completion_time_hours,
    compute_metrics,
    constraint_adherence,
    engagement_penalty,
    goal_achievement,
    predicate_violations,
    preference_alignment,
    stakeholder_management,
)
from magym.model import (
    Constraint,
    Deliverable,
    Message,
    TaskDraft,
    TaskStatus,
    WorkflowError,
)
from magym.policies import PolicySpec, make_manager_policy, make_stakeholder_policy

from conftest import make_state, make_worker, tiny_scenario


# ----- preference alignment -------------------------------------------------


def test_alignment_simple_weighted_sum():
    schedule = [(0, {"a": 0.5, "b": 0.5})]
    assert preference_alignment(schedule, {"a": 1.0, "b": 0.0}, 10) == pytest.approx(0.5)


def test_alignment_all_ones_for_any_simplex():
    schedule = [(0, {"a": 0.3, "b": 0.45, "c": 0.25})]
    assert preference_alignment(schedule, {"a": 1, "b": 1, "c": 1}, 50) == pytest.approx(1.0)


def test_alignment_matches_dot_product_oracle_on_random_cases():
    rng = random.Random(12)
    for _ in range(100):
        names = [f"obj{i}" for i in range(3)]
        raw = [rng.random() + 0.05 for _ in names]
        total = sum(raw)
        weights = {n: v / total for n, v in zip(names, raw)}
        scores = {n: rng.random() for n in names}
        expected = sum(weights[n] * scores[n] for n in names)
        assert preference_alignment([(0, weights)], scores, 40) == pytest.approx(expected, abs=1e-12)


def test_alignment_duration_weighted_across_change_points():
    # 40 steps of {a:1}, 60 steps of {b:1} over a 100-step episode.
    schedule = [(0, {"a": 1.0}), (40, {"b": 1.0})]
    scores = {"a": 1.0, "b": 0.5}
    expected = 0.4 * 1.0 + 0.6 * 0.5
    assert preference_alignment(schedule, scores, 100) == pytest.approx(expected)


def test_alignment_linear_in_each_score_with_effective_weight():
    schedule = [(0, {"a": 0.6, "b": 0.4}), (50, {"a": 0.2, "b": 0.8})]
    effective_a = 0.5 * 0.6 + 0.5 * 0.2
    base = preference_alignment(schedule, {"a": 0.0, "b": 0.3}, 100)
    bumped = preference_alignment(schedule, {"a": 1.0, "b": 0.3}, 100)
    assert bumped - base == pytest.approx(effective_a)


def test_alignment_rejects_off_simplex_weights():
    with pytest.raises(WorkflowError, match="simplex"):
        preference_alignment([(0, {"a": 0.7, "b": 0.7})], {"a": 1, "b": 1}, 10)


# ----- constraint adherence -------------------------------------------------


def _state_with_soft_violations(n: int, weight: float):
    state = make_state(n)
    constraints = []
    for i in range(n):
        # artifact_exists_for fails: no artifacts were produced.
        constraints.append(
            Constraint(
                id=f"c{i}",
                kind="soft",
                description="",
                predicate={"type": "artifact_exists_for", "task_id": f"t{i}"},
                penalty_weight=weight,
            )
        )
    state.constraints = constraints
    return state


def test_hard_violation_forces_zero():
    state = make_state(1)
    state.timestep = 50
    state.constraints = [
        Constraint(id="h", kind="hard", description="",
                   predicate={"type": "task_completed_by", "task_id": "t0", "timestep": 10}),
        Constraint(id="s", kind="soft", description="",
                   predicate={"type": "artifact_exists_for", "task_id": "t0"},
                   penalty_weight=0.1),
    ]
    score, hard, detail = constraint_adherence(state.constraints, state)
    assert score == 0.0 and hard
    assert detail["h"]["violations"] == 1


def test_no_constraints_is_vacuous_full_score():
    state = make_state(2)
    score, hard, _ = constraint_adherence([], state)
    assert score == 1.0 and not hard


def test_soft_deduction_arithmetic_oracle():
    state = _state_with_soft_violations(3, weight=0.2)
    score, hard, _ = constraint_adherence(state.constraints, state)
    assert not hard
    assert score == pytest.approx(1.0 - 3 * 0.2)


def test_soft_deductions_clamp_at_zero():
    state = _state_with_soft_violations(8, weight=0.2)
    score, _, _ = constraint_adherence(state.constraints, state)
    assert score == 0.0


def test_adherence_monotone_in_soft_violations():
    previous = 1.0
    for n in range(1, 5):
        state = _state_with_soft_violations(n, weight=0.15)
        score, _, _ = constraint_adherence(state.constraints, state)
        assert score <= previous
        previous = score


# ----- predicates -------------------------------------------------


def test_budget_and_message_predicates():
    state = make_state(2)
    state.add_worker(make_worker())
    state.graph.tasks["t0"].cost_incurred = 120.0
    assert predicate_violations({"type": "budget_below", "amount": 100}, state, final=True) == 1
    assert predicate_violations({"type": "budget_below", "amount": 200}, state, final=True) == 0
    state.timestep = 30
    pred = {"type": "message_sent_before", "receiver": "stakeholder", "timestep": 20}
    assert predicate_violations(pred, state, final=True) == 1
    state.comms.append(Message("manager", "stakeholder", "hi", 5))
    assert predicate_violations(pred, state, final=True) == 0


def test_no_assignment_of_kind_uses_history():
    state = make_state(1)
    state.add_worker(make_worker("bot"))
    state.workers["bot"].active = True
    state.refresh_statuses()
    state.assign("t0", "bot")
    pred = {"type": "no_assignment_of_kind", "worker_kind": "ai", "task_id": "t0"}
    assert predicate_violations(pred, state, final=True) == 1
    # History persists even after the worker is released.
    state._release_assignment(state.graph.tasks["t0"])
    assert predicate_violations(pred, state, final=True) == 1


def test_completed_late_counts_as_deadline_violation():
    state = make_state(1)
    task = state.graph.tasks["t0"]
    task.status = TaskStatus.COMPLETED
    task.progress = 1.0
    task.completed_timestep = 50
    pred = {"type": "task_completed_by", "task_id": "t0", "timestep": 40}
    assert predicate_violations(pred, state, final=True) == 1
    task.completed_timestep = 40
    assert predicate_violations(pred, state, final=True) == 0


# ----- goal achievement -------------------------------------------------


def _deliverable_state():
    state = make_state(0)
    for tid, tier, points, status, progress, scoring in [
        ("a", "critical", 15.0, TaskStatus.COMPLETED, 1.0, "binary"),
        ("b", "major", 10.0, TaskStatus.PENDING, 0.0, "binary"),
        ("c", "supporting", 5.0, TaskStatus.COMPLETED, 1.0, "binary"),
    ]:
        state.add_task(TaskDraft(id=tid, name=tid, deliverable=Deliverable(tier, points, scoring)))
        state.graph.tasks[tid].status = status
        state.graph.tasks[tid].progress = progress
    return state


def test_goal_point_sum_oracle():
    state = _deliverable_state()
    score, detail = goal_achievement(state)
    assert score == pytest.approx(20.0 / 30.0)
    assert detail["points_earned"] == 20.0 and detail["points_total"] == 30.0


def test_goal_all_or_nothing_bounds():
    state = _deliverable_state()
    for t in state.graph.tasks.values():
        t.status = TaskStatus.COMPLETED
        t.progress = 1.0
    assert goal_achievement(state)[0] == 1.0
    for t in state.graph.tasks.values():
        t.status = TaskStatus.PENDING
        t.progress = 0.0
    assert goal_achievement(state)[0] == 0.0


def test_goal_graduated_partial_credit():
    state = _deliverable_state()
    state.graph.tasks["b"].deliverable.scoring = "graduated"
    state.graph.tasks["b"].progress = 0.5
    score, _ = goal_achievement(state)
    assert score == pytest.approx((15.0 + 5.0 + 5.0) / 30.0)


def test_goal_invariant_to_non_deliverable_tasks():
    state = _deliverable_state()
    before = goal_achievement(state)[0]
    state.add_task(TaskDraft(id="junk", name="junk"))
    assert goal_achievement(state)[0] == before
    state.remove_task("junk")
    assert goal_achievement(state)[0] == before


def test_goal_errors_without_deliverable_points():
    with pytest.raises(WorkflowError):
        goal_achievement(make_state(3))


# ----- stakeholder management -------------------------------------------------


def test_zeroing_gate_without_stakeholder_messages():
    state = make_state(2)
    score, breakdown = stakeholder_management(state, [])
    assert score == 0.0
    assert breakdown["manager_messages"] == 0
    assert breakdown["engagement_penalty"] == 10.0


def test_engagement_penalty_formula_exact():
    assert engagement_penalty(0) == 10.0
    assert engagement_penalty(4) == 6.0
    assert engagement_penalty(10) == 0.0
    assert engagement_penalty(25) == 0.0


def test_engagement_term_in_breakdown_matches_formula():
    state = make_state(2)
    for i in range(4):
        state.comms.append(Message("manager", "stakeholder", f"update {i}", i))
    score, breakdown = stakeholder_management(state, [])
    assert breakdown["engagement_penalty"] == 6.0
    assert breakdown["engagement"] == pytest.approx(0.4)
    assert score > 0.0


def test_gate_strictly_positive_with_any_message():
    state = make_state(2)
    state.comms.append(Message("manager", "stakeholder", "one message", 0))
    score, _ = stakeholder_management(state, [])
    assert score > 0.0


# ----- completion time and aggregation -------------------------------------------------


def test_completion_time_values():
    assert completion_time_hours(0, 1.0) == 0.0
    assert completion_time_hours(100, 1.0) == 100.0
    assert completion_time_hours(37, 1.0) == 37.0
    assert completion_time_hours(10, 2.5) == 25.0


def _report(**kwargs) -> MetricReport:
    base = dict(
        preference_alignment=0.5,
        constraint_adherence=0.5,
        goal_achievement=0.5,
        stakeholder_management=0.5,
        completion_time_hours=10.0,
    )
    base.update(kwargs)
    return MetricReport(**base)


def test_aggregate_identical_reports_zero_std():
    stats = aggregate([_report(), _report(), _report()])
    assert stats["goal_achievement"]["std"] == 0.0
    assert stats["goal_achievement"]["mean"] == 0.5


def test_aggregate_zero_one_pair():
    stats = aggregate([_report(goal_achievement=0.0), _report(goal_achievement=1.0)])
    assert stats["goal_achievement"]["mean"] == pytest.approx(0.5)
    assert stats["goal_achievement"]["std"] == pytest.approx(0.5)


def test_aggregate_matches_spreadsheet_oracle():
    rng = random.Random(5)
    reports = [
        _report(
            preference_alignment=rng.random(),
            constraint_adherence=rng.random(),
            goal_achievement=rng.random(),
            stakeholder_management=rng.random(),
            completion_time_hours=rng.random() * 100,
        )
        for _ in range(5)
    ]
    stats = aggregate(reports)
    for name in ("preference_alignment", "goal_achievement", "completion_time_hours"):
        values = [getattr(r, name) for r in reports]
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        assert stats[name]["mean"] == pytest.approx(mean)
        assert stats[name]["std"] == pytest.approx(var ** 0.5)


# ----- full-report properties over fuzzed episodes ---------------------------


def test_metrics_bounded_on_fuzzed_episodes():
    for seed in range(1, 9):
        doc = tiny_scenario(seed_tasks=6, deliverables=True, duration_sigma=0.4, quality_noise=0.2)
        trace = run_episode(
            EpisodeConfig.for_scenario(doc, seed),
            {
                "manager": make_manager_policy(PolicySpec("random"), seed, doc.id),
                "stakeholder": make_stakeholder_policy(doc),
            },
        )
        m = trace.footer["metrics"]
        for name in (
            "preference_alignment",
            "constraint_adherence",
            "goal_achievement",
            "stakeholder_management",
        ):
            assert 0.0 <= m[name] <= 1.0, (name, m[name])
        assert m["completion_time_hours"] >= 0.0
        if m["hard_violation"]:
            assert m["constraint_adherence"] == 0.0


def test_external_rubric_hook_lands_in_breakdown():
    doc = tiny_scenario(seed_tasks=2)
    from magym.engine import Engine

    engine = Engine(EpisodeConfig.for_scenario(doc, 1))
    while not engine.state.terminated:
        engine.step({"manager": make_manager_policy(PolicySpec("assign_all"), 1, doc.id).act(
            engine.observe("manager"))})
    report = compute_metrics(
        doc,
        EpisodeConfig.for_scenario(doc, 1).to_dict(),
        engine.records,
        engine.state,
        extra_rubrics=[Rubric("graded_externally", 10.0, lambda s, r: 7.5)],
    )
    assert report.rubric_breakdown["external"]["graded_externally"] == pytest.approx(0.75)
