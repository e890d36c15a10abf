from __future__ import annotations

import sys
from pathlib import Path

import pytest

from magym.actions import ManagerAction
from magym.bridge import PROTOCOL_VERSION, BridgeError, BridgeHost, ExternalPolicy, bridge_host_call
from magym.engine import EpisodeConfig, run_episode
from magym.policies import make_stakeholder_policy
from magym.trace import canonical_json

from conftest import tiny_scenario

CLIENT = Path(__file__).parent / "bridge_clients.py"


def client_cmd(behavior: str) -> list[str]:
    return [sys.executable, str(CLIENT), behavior]


def host_for(behavior: str, timeout: float = 5.0) -> BridgeHost:
    host = BridgeHost(client_cmd(behavior), scenario_id="tiny", timeout=timeout)
    host.start()
    return host


def test_protocol_version_string():
    assert PROTOCOL_VERSION == "magym-bridge/1"


def test_noop_client_round_trip():
    host = host_for("noop")
    try:
        action = bridge_host_call(host, 0, {"tasks": []})
        assert action == ManagerAction("noop", {})
    finally:
        host.close()


def test_unknown_action_type_becomes_failed_action():
    host = host_for("bad-type")
    try:
        action = bridge_host_call(host, 0, {})
        assert action.type == "failed_action"
        assert "foo" in action.params["metadata"]["error"]
    finally:
        host.close()


def test_garbage_reply_becomes_failed_action():
    host = host_for("garbage")
    try:
        action = bridge_host_call(host, 0, {})
        assert action.type == "failed_action"
        assert "malformed" in action.params["metadata"]["error"]
    finally:
        host.close()


def test_timeout_substitutes_noop_and_episode_survives():
    host = host_for("slow", timeout=0.3)
    try:
        action = bridge_host_call(host, 0, {})
        assert action.type == "noop"
        assert "timeout" in action.rationale
    finally:
        host.close()


def test_bad_handshake_raises():
    host = BridgeHost(client_cmd("bad-handshake"), scenario_id="tiny", timeout=5.0)
    with pytest.raises(BridgeError, match="handshake"):
        host.start()


def test_sixteen_variant_echo_round_trip():
    """Engine-side conformance mock: every variant round-trips byte-exactly."""
    from magym.actions import MANAGER_ACTION_SCHEMAS

    samples = {
        "assign_task": {"task_id": "t1", "worker_id": "w1"},
        "assign_all_pending_tasks": {"worker_id": "w1"},
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
    assert set(samples) == set(MANAGER_ACTION_SCHEMAS)
    host = host_for("echo")
    try:
        for action_type, params in sorted(samples.items()):
            wire = ManagerAction(action_type, params).encode()
            reply = bridge_host_call(host, 0, {"echo": wire})
            assert canonical_json(reply.encode()) == canonical_json(wire)
    finally:
        host.close()


def test_thousand_step_session_stays_in_sync():
    host = host_for("echo")
    try:
        for i in range(1000):
            wire = ManagerAction("inspect_task", {"task_id": f"t{i}"}).encode()
            reply = bridge_host_call(host, i, {"echo": wire})
            assert reply.params["task_id"] == f"t{i}", f"desync at step {i}"
    finally:
        host.close()


def test_external_policy_runs_a_full_episode():
    doc = tiny_scenario(seed_tasks=2)
    policy = ExternalPolicy(client_cmd("assign"), scenario_id=doc.id, timeout=5.0)
    try:
        trace = run_episode(
            EpisodeConfig.for_scenario(doc, 1),
            {"manager": policy, "stakeholder": make_stakeholder_policy(doc)},
        )
    finally:
        policy.close()
    types = [r["action"]["type"] for r in trace.manager_records()]
    assert "assign_task" in types
    assert trace.footer["termination_reason"] == "completed"


def test_dead_client_never_deadlocks():
    host = host_for("noop")
    try:
        host.proc.kill()
        host.proc.wait()
        action = bridge_host_call(host, 0, {})
        assert action.type == "noop"  # a gone client degrades to noop substitution
    finally:
        host.close()
