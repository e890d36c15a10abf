"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The episode matrix (5 scenarios x 3 policies x 5 seeds, two passes)
is shared across criteria through a module-scoped fixture.
"""

from __future__ import annotations

import random
import time
from pathlib import Path

import pytest

from magym.actions import ManagerAction
from magym.engine import EpisodeConfig, run_episode
from magym.evaluation import engagement_penalty, preference_alignment
from magym.model import (
    SubtaskTemplate,
    TaskDraft,
    TaskStatus,
    WorkflowError,
)
from magym.policies import (
    PolicySpec,
    RandomPolicy,
    make_manager_policy,
    make_stakeholder_policy,
)
from magym.rng import substream
from magym.scenario import (
    bundled_scenarios,
    parse_scenario,
    scenario_from_dict,
    serialize_scenario,
    validate_scenario,
    load_scenario,
    ScenarioError,
    build_initial_state,
)

POLICY_KINDS = ("random", "assign_all", "greedy")
SEEDS = (1, 2, 3, 4, 5)


def report(criterion: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE [{criterion}]: {verdict}{suffix}")


def run_matrix_once() -> dict[tuple[str, str, int], "object"]:
    traces = {}
    for doc in bundled_scenarios():
        for kind in POLICY_KINDS:
            for seed in SEEDS:
                config = EpisodeConfig.for_scenario(doc, seed)
                policies = {
                    "manager": make_manager_policy(PolicySpec(kind), seed, doc.id),
                    "stakeholder": make_stakeholder_policy(doc),
                }
                traces[(doc.id, kind, seed)] = run_episode(config, policies)
    return traces


@pytest.fixture(scope="module")
def matrix():
    """Two full passes over the evaluation matrix, timed."""
    start = time.perf_counter()
    first = run_matrix_once()
    second = run_matrix_once()
    elapsed = time.perf_counter() - start
    return {"first": first, "second": second, "elapsed": elapsed}


def test_determinism_byte_identical_traces(matrix):
    mismatches = [
        key
        for key in matrix["first"]
        if matrix["first"][key].dumps() != matrix["second"][key].dumps()
    ]
    within_budget = matrix["elapsed"] < 60.0
    ok = not mismatches and within_budget
    report(
        "determinism",
        ok,
        f"150 episodes, {matrix['elapsed']:.1f}s wall, {len(mismatches)} mismatches",
    )
    assert mismatches == []
    assert within_budget


def test_metric_formula_suite():
    rng = random.Random(2024)
    worst = 0.0
    for _ in range(100):
        names = [f"o{i}" for i in range(rng.randrange(2, 7))]
        raw = [rng.random() + 1e-3 for _ in names]
        weights = {n: v / sum(raw) for n, v in zip(names, raw)}
        scores = {n: rng.random() for n in names}
        got = preference_alignment([(0, weights)], scores, 50)
        expected = sum(weights[n] * scores[n] for n in names)
        worst = max(worst, abs(got - expected))
    formula_ok = worst <= 1e-9

    # Hard-violation gate: adherence forced to zero.
    from magym.evaluation import constraint_adherence
    from magym.model import Constraint, WorkflowState

    state = WorkflowState()
    state.add_task(TaskDraft(id="t", name="t"))
    state.timestep = 99
    hard = Constraint(
        id="h", kind="hard", description="",
        predicate={"type": "task_completed_by", "task_id": "t", "timestep": 5},
    )
    adherence, violated, _ = constraint_adherence([hard], state)
    gate_ok = adherence == 0.0 and violated

    # Stakeholder zeroing gate and exact engagement penalty.
    from magym.evaluation import stakeholder_management
    from magym.model import Message

    silent = WorkflowState()
    zero_score, zero_breakdown = stakeholder_management(silent, [])
    chatty = WorkflowState()
    for i in range(4):
        chatty.comms.append(Message("manager", "stakeholder", f"u{i}", i))
    _, chatty_breakdown = stakeholder_management(chatty, [])
    stakeholder_ok = (
        zero_score == 0.0
        and zero_breakdown["engagement_penalty"] == 10.0
        and chatty_breakdown["engagement_penalty"] == 6.0
        and engagement_penalty(10) == 0.0
        and engagement_penalty(4) == 6.0
    )

    ok = formula_ok and gate_ok and stakeholder_ok
    report(
        "metric-formulas",
        ok,
        f"max |alignment error| {worst:.2e}; gates {'ok' if gate_ok and stakeholder_ok else 'broken'}",
    )
    assert formula_ok and gate_ok and stakeholder_ok


def test_graph_safety_fuzz_10000_mutations():
    rng = random.Random(4242)
    from magym.model import WorkflowState

    state = WorkflowState()
    total_created = 0
    for i in range(10):
        state.add_task(TaskDraft(id=f"seed{i}", name=f"seed {i}", estimated_hours=6.0))
        total_created += 1
    state.refresh_statuses()

    def independent_cycle_check() -> bool:
        # Kahn's algorithm written out here, independent of the graph helpers.
        live = {t.id for t in state.graph.tasks.values() if t.status is not TaskStatus.REMOVED}
        indeg = {n: 0 for n in live}
        out: dict[str, list[str]] = {n: [] for n in live}
        for a, b in state.graph.edges:
            indeg[b] += 1
            out[a].append(b)
        queue = [n for n, d in indeg.items() if d == 0]
        seen = 0
        while queue:
            n = queue.pop()
            seen += 1
            for m in out[n]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    queue.append(m)
        return seen == len(live)

    problems = []
    for step in range(10_000):
        live_ids = [t.id for t in state.graph.tasks.values() if t.status is not TaskStatus.REMOVED]
        op = rng.random()
        try:
            if op < 0.22 and len(live_ids) < 220:
                state.add_task(TaskDraft(id=f"n{step}", name=f"node {step}", estimated_hours=6.0))
                total_created += 1
                state.refresh_statuses()
            elif op < 0.45 and live_ids:
                state.remove_task(rng.choice(live_ids))
            elif op < 0.72 and len(live_ids) >= 2:
                a, b = rng.sample(live_ids, 2)
                state.add_dependency(a, b)
            elif op < 0.82 and state.graph.edges:
                a, b = rng.choice(sorted(state.graph.edges))
                state.remove_dependency(a, b)
            elif op < 0.86 and live_ids and len(live_ids) < 220:
                target = rng.choice(live_ids)
                kids = state.decompose_task(
                    target, [SubtaskTemplate(name=f"{target}/{k}") for k in range(2)]
                )
                total_created += len(kids)
            elif op < 0.92 and live_ids:
                state.refine_task(rng.choice(live_ids), f"note {step}")
            elif live_ids:
                ready = sorted(state.ready_set())
                if ready:
                    task = state.graph.tasks[rng.choice(ready)]
                    task.status = TaskStatus.COMPLETED
                    task.progress = 1.0
                    state.refresh_statuses()
        except WorkflowError:
            pass  # rejected mutations must leave the graph coherent

        if not independent_cycle_check():
            problems.append(f"cycle after step {step}")
            break
        for a, b in state.graph.edges:
            ta, tb = state.graph.tasks.get(a), state.graph.tasks.get(b)
            if (
                ta is None
                or tb is None
                or ta.status is TaskStatus.REMOVED
                or tb.status is TaskStatus.REMOVED
            ):
                problems.append(f"dangling edge ({a}, {b}) after step {step}")
                break
        if problems:
            break
        if len(state.graph.tasks) != total_created:
            problems.append(f"conservation broken after step {step}")
            break
        statuses = [t.status for t in state.graph.tasks.values()]
        if any(s not in TaskStatus for s in statuses):
            problems.append(f"unknown status after step {step}")
            break

    report("graph-safety", not problems, f"10000 mutations, {len(state.graph.tasks)} tasks ever")
    assert problems == []


def test_baseline_ordering(matrix):
    goal_wins = 0
    stakeholder_wins = 0
    details = []
    scenario_ids = sorted({key[0] for key in matrix["first"]})
    for sid in scenario_ids:
        def mean_metric(kind: str, metric: str) -> float:
            values = [
                matrix["first"][(sid, kind, seed)].footer["metrics"][metric] for seed in SEEDS
            ]
            return sum(values) / len(values)

        goal_random = mean_metric("random", "goal_achievement")
        goal_assign = mean_metric("assign_all", "goal_achievement")
        stk_assign = mean_metric("assign_all", "stakeholder_management")
        stk_greedy = mean_metric("greedy", "stakeholder_management")
        if goal_assign > goal_random:
            goal_wins += 1
        if stk_greedy >= stk_assign:
            stakeholder_wins += 1
        details.append(f"{sid}: goal {goal_assign:.2f}>{goal_random:.2f}, stk {stk_greedy:.2f}>={stk_assign:.2f}")

    ok = goal_wins >= 4 and stakeholder_wins >= 4
    report("baseline-ordering", ok, f"goal {goal_wins}/5, stakeholder {stakeholder_wins}/5")
    for line in details:
        print("  ", line)
    assert goal_wins >= 4
    assert stakeholder_wins >= 4


def test_budget_cap(matrix):
    over_cap = []
    wrong_reason = []
    for key, trace in matrix["first"].items():
        n = len(trace.manager_records())
        if n > 100:
            over_cap.append((key, n))
        if n >= 100 and trace.footer["termination_reason"] not in ("action_cap",):
            # Completing on the very step the cap lands still counts as done.
            if trace.footer["termination_reason"] != "completed":
                wrong_reason.append((key, trace.footer["termination_reason"]))
    capped = sum(
        1 for t in matrix["first"].values() if t.footer["termination_reason"] == "action_cap"
    )
    ok = not over_cap and not wrong_reason
    report("budget-cap", ok, f"{capped} episodes hit the cap; none exceeded 100 records")
    assert over_cap == [] and wrong_reason == []


def effective_weights_at(trace, timestep: int) -> dict[str, float]:
    weights = dict(trace.header["scenario"]["preference_schedule"][0]["weights"])
    for record in trace.records:
        if (
            record["agent"] == "stakeholder"
            and record["action"]["type"] == "update_preferences"
            and record["timestep"] <= timestep
        ):
            weights = dict(record["action"]["params"]["weights"])
    return weights


class _NoopManager:
    name = "noop"

    def act(self, obs):
        return ManagerAction("noop", {}, rationale="idle observer")


def test_preference_change_points():
    failures = []
    for doc in bundled_scenarios():
        config = EpisodeConfig.for_scenario(doc, 1)
        trace = run_episode(
            config,
            {"manager": _NoopManager(), "stakeholder": make_stakeholder_policy(doc)},
        )
        assert trace.footer["final_timestep"] >= 71, doc.id
        at36 = effective_weights_at(trace, 36)
        at71 = effective_weights_at(trace, 71)
        if max(at36, key=at36.get) != "quality":
            failures.append(f"{doc.id}: t=36 vector {at36}")
        if at36 != doc.preference_schedule[1].weights:
            failures.append(f"{doc.id}: t=36 is not the scheduled quality-heavy vector")
        if max(at71, key=at71.get) != "compliance":
            failures.append(f"{doc.id}: t=71 vector {at71}")
        if at71 != doc.preference_schedule[2].weights:
            failures.append(f"{doc.id}: t=71 is not the scheduled compliance-heavy vector")
        update_steps = [
            r["timestep"]
            for r in trace.records
            if r["agent"] == "stakeholder" and r["action"]["type"] == "update_preferences"
        ]
        if update_steps != [35, 70]:
            failures.append(f"{doc.id}: updates at {update_steps}")
    report("preference-change-points", not failures, "quality-heavy @36, compliance-heavy @71")
    assert failures == []


def test_random_policy_uniformity_chi_square():
    from scipy.stats import chi2

    doc = bundled_scenarios()[0]
    from magym.engine import Engine

    obs = Engine(EpisodeConfig.for_scenario(doc, 1)).observe("manager")
    policy = RandomPolicy(substream(1, "policy", "manager"))
    counts: dict[str, int] = {}
    draws = 16_000
    for _ in range(draws):
        t = policy.act(obs).type
        counts[t] = counts.get(t, 0) + 1
    expected = draws / 16
    statistic = sum((n - expected) ** 2 / expected for n in counts.values())
    critical = chi2.ppf(1 - 0.001, df=15)
    ok = len(counts) == 16 and statistic < critical
    report(
        "random-uniformity",
        ok,
        f"chi2 {statistic:.2f} < {critical:.2f} at alpha=0.001, 16 variants seen",
    )
    assert len(counts) == 16
    assert statistic < critical


def test_scenario_round_trip_and_validator_fuzz():
    # Identity on the bundled suite.
    identity_ok = True
    for doc in bundled_scenarios():
        text = serialize_scenario(doc)
        if serialize_scenario(parse_scenario(text)) != text:
            identity_ok = False

    # 1,000 mutated documents: validation verdict == loadability verdict.
    import json

    rng = random.Random(777)
    base = json.loads(serialize_scenario(bundled_scenarios()[0]))
    mismatches = 0
    for _ in range(1000):
        doc_dict = json.loads(json.dumps(base))
        for _ in range(rng.randrange(1, 3)):
            _mutate_in_place(doc_dict, rng)
        try:
            doc = scenario_from_dict(doc_dict)
        except ScenarioError:
            continue  # strict-parse rejections never reach the validator
        errors = [d for d in validate_scenario(doc) if d.severity == "error"]
        try:
            loaded_doc = load_scenario(doc_dict)
            build_initial_state(loaded_doc)
            loadable = True
        except (ScenarioError, WorkflowError):
            loadable = False
        if loadable != (not errors):
            mismatches += 1
    ok = identity_ok and mismatches == 0
    report(
        "scenario-round-trip",
        ok,
        f"identity on 5 docs; validator/loadability agreement on 1000 fuzz cases",
    )
    assert identity_ok
    assert mismatches == 0


def _mutate_in_place(doc: dict, rng: random.Random) -> None:
    choice = rng.randrange(10)
    if choice == 0 and doc["tasks"]:
        rng.choice(doc["tasks"])["estimated_hours"] = rng.choice([-1.0, 0.0, 3.0])
    elif choice == 1:
        entry = rng.choice(doc["preference_schedule"])
        entry["weights"] = {"quality": rng.choice([0.5, 1.0])}
    elif choice == 2 and doc["tasks"]:
        tid = rng.choice(doc["tasks"])["id"]
        doc["edges"] = doc.get("edges", []) + [[tid, tid]]
    elif choice == 3 and doc["workers"]:
        rng.choice(doc["workers"])["capabilities"] = {"skill": rng.choice([0.5, 1.5])}
    elif choice == 4:
        doc["config"]["max_timesteps"] = rng.choice([0, 50, 100])
    elif choice == 5 and doc["tasks"]:
        rng.choice(doc["tasks"])["deliverable"] = {
            "tier": rng.choice(["critical", "major", "supporting"]),
            "points": rng.choice([1.0, 10.0, 15.0, 25.0]),
        }
    elif choice == 6 and doc["workers"]:
        w = rng.choice(doc["workers"])
        w["leave_timestep"] = rng.choice([0, w.get("join_timestep", 0), 30])
    elif choice == 7 and doc["tasks"]:
        rng.choice(doc["tasks"])["name"] = rng.choice(["", "renamed"])
    elif choice == 8:
        doc["stakeholder"]["end_approval"] = rng.choice(["always", "never", "later"])
    elif choice == 9 and doc["edges"]:
        # Reverse an edge; may or may not introduce a cycle.
        i = rng.randrange(len(doc["edges"]))
        a, b = doc["edges"][i]
        doc["edges"][i] = [b, a]


@pytest.mark.skipif(
    not (Path(__file__).resolve().parents[1] / "frontend" / "dist" / "main.js").exists(),
    reason="frontend bridge client not built (run npm install && npm run build in frontend/)",
)
def test_secondary_bridge_client_conformance():
    """[SECONDARY] The reference TypeScript client passes the 16-variant
    round-trip and a 1,000-step session without desynchronization."""
    from magym.bridge import BridgeHost, bridge_host_call
    from magym.trace import canonical_json

    client = Path(__file__).resolve().parents[1] / "frontend" / "dist" / "main.js"
    host = BridgeHost(["node", str(client), "--callback", "echo"], scenario_id="conformance", timeout=10.0)
    host.start()
    try:
        samples = {
            "assign_task": {"task_id": "t1", "worker_id": "w1"},
            "assign_all_pending_tasks": {},
            "create_task": {"name": "n", "description": "d", "estimated_hours": 2.0, "estimated_cost": 10.0},
            "remove_task": {"task_id": "t1"},
            "send_message": {"content": "hello", "receiver_id": "stakeholder"},
            "noop": {},
            "get_workflow_status": {},
            "get_available_agents": {},
            "get_pending_tasks": {},
            "refine_task": {"task_id": "t1", "instructions": "focus"},
            "add_task_dependency": {"prereq_id": "a", "dep_id": "b"},
            "remove_task_dependency": {"prereq_id": "a", "dep_id": "b"},
            "inspect_task": {"task_id": "t1"},
            "decompose_task": {"task_id": "t1"},
            "request_end_workflow": {"reason": "done"},
            "failed_action": {"metadata": {"note": "probe"}},
        }
        bad = []
        for action_type, params in sorted(samples.items()):
            wire = ManagerAction(action_type, params).encode()
            reply = bridge_host_call(host, 0, {"echo": wire})
            if canonical_json(reply.encode()) != canonical_json(wire):
                bad.append(action_type)
        desync = 0
        for i in range(1000):
            wire = ManagerAction("inspect_task", {"task_id": f"t{i}"}).encode()
            reply = bridge_host_call(host, i, {"echo": wire})
            if reply.params.get("task_id") != f"t{i}":
                desync += 1
        ok = not bad and desync == 0
        report("secondary-bridge-conformance", ok, f"16 variants, 1000 steps, {desync} desyncs")
        assert bad == [] and desync == 0
    finally:
        host.close()
