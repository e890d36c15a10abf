#!/usr/bin/env python3
"""Scripted bridge clients used by the host-side tests.

Usage: python bridge_clients.py <behavior>

Behaviors:
    noop        replies noop to every observation
    echo        replies with the action embedded at observation["echo"]
    assign      assigns the first ready task to the first worker, else noop
    bad-type    replies with an unknown action type
    garbage     replies with unparseable bytes
    slow        sleeps 10s before replying (forces host timeouts)
    bad-handshake   echoes a wrong protocol version
"""

from __future__ import annotations

import json
import sys
import time


def main() -> int:
    behavior = sys.argv[1] if len(sys.argv) > 1 else "noop"
    handshake = json.loads(sys.stdin.readline())
    if behavior == "bad-handshake":
        handshake["protocol_version"] = "wrong/0"
    sys.stdout.write(json.dumps(handshake) + "\n")
    sys.stdout.flush()

    for line in sys.stdin:
        frame = json.loads(line)
        if "reason" in frame:
            print(f"client: shutdown ({frame['reason']})", file=sys.stderr)
            return 0
        obs = frame.get("observation", {})
        if behavior == "slow":
            time.sleep(10)
        if behavior == "garbage":
            sys.stdout.write("this is not json\n")
        elif behavior == "bad-type":
            sys.stdout.write(json.dumps({"action": {"type": "foo", "params": {}}}) + "\n")
        elif behavior == "echo":
            sys.stdout.write(json.dumps({"action": obs.get("echo")}) + "\n")
        elif behavior == "assign":
            ready = obs.get("ready_task_ids", [])
            workers = [w["id"] for w in obs.get("workers", []) if w["active"]]
            unowned = {t["id"] for t in obs.get("tasks", []) if t["owner"] is None}
            pick = [t for t in ready if t in unowned]
            if pick and workers:
                action = {
                    "type": "assign_task",
                    "params": {"task_id": pick[0], "worker_id": workers[0]},
                }
            else:
                action = {"type": "noop", "params": {}}
            sys.stdout.write(json.dumps({"action": action}) + "\n")
        else:
            sys.stdout.write(json.dumps({"action": {"type": "noop", "params": {}}}) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
