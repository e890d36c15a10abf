"""Host side of the external-policy bridge.

Wire protocol "magym-bridge/1": newline-delimited UTF-8 JSON objects over the
child process's stdin/stdout. Frames are distinguished by their keys:

    handshake  {"protocol_version", "scenario_id", "role"}   (client echoes it)
    per-step   {"timestep", "observation"}
    reply      {"action"}
    shutdown   {"reason"}

An unresponsive or misbehaving client can never stall an episode: timeouts
substitute a noop, malformed replies become failed_action records.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import sys
import threading
from typing import Any, Optional

from .actions import ActionError, ManagerAction, decode_manager_action
from .trace import canonical_json

PROTOCOL_VERSION = "magym-bridge/1"


class BridgeError(Exception):
    """Bridge process failed to start or broke the handshake."""


class BridgeHost:
    """Owns one child policy process and its request/response channel."""

    def __init__(
        self,
        cmd: str | list[str],
        scenario_id: str,
        role: str = "manager",
        timeout: float = 10.0,
    ):
        self.cmd = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        self.scenario_id = scenario_id
        self.role = role
        self.timeout = timeout
        self.proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()

    def start(self) -> None:
        try:
            self.proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=sys.stderr,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeError(f"cannot start bridge client {self.cmd!r}: {exc}") from exc
        threading.Thread(target=self._pump, daemon=True).start()
        self._send(
            {
                "protocol_version": PROTOCOL_VERSION,
                "scenario_id": self.scenario_id,
                "role": self.role,
            }
        )
        echo = self._read(self.timeout)
        if echo is None or echo.get("protocol_version") != PROTOCOL_VERSION:
            self.close("handshake failed")
            raise BridgeError(f"bridge handshake failed: got {echo!r}")

    def _pump(self) -> None:
        assert self.proc is not None and self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def _send(self, frame: dict[str, Any]) -> None:
        if self.proc is None or self.proc.stdin is None:
            raise BridgeError("bridge process is not running")
        try:
            self.proc.stdin.write(canonical_json(frame) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError) as exc:
            raise BridgeError(f"bridge client went away: {exc}") from exc

    def _read(self, timeout: float) -> Optional[dict[str, Any]]:
        """Next parseable frame, or None on timeout/EOF."""
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            return None
        if line is None:
            return None
        try:
            frame = json.loads(line)
        except json.JSONDecodeError:
            return {"_malformed": line.strip()}
        if not isinstance(frame, dict):
            return {"_malformed": line.strip()}
        return frame

    def call(self, timestep: int, observation: dict[str, Any]) -> Optional[dict[str, Any]]:
        """One step round-trip; returns the reply frame or None on timeout."""
        self._send({"timestep": timestep, "observation": observation})
        return self._read(self.timeout)

    def close(self, reason: str = "episode finished") -> None:
        if self.proc is None:
            return
        try:
            self._send({"reason": reason})
        except BridgeError:
            pass
        try:
            self.proc.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()
        if self.proc.stdin is not None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        self.proc = None


def bridge_host_call(host: BridgeHost, timestep: int, observation: dict[str, Any]) -> ManagerAction:
    """Fetch one manager action from the external client.

    Timeout substitutes a noop so the episode stays live; an unparseable or
    schema-violating reply is recorded as failed_action with diagnostics.
    """
    try:
        frame = host.call(timestep, observation)
    except BridgeError as exc:
        return ManagerAction("noop", {}, rationale=f"bridge unavailable ({exc}); noop substituted")
    if frame is None:
        return ManagerAction("noop", {}, rationale="bridge timeout; noop substituted")
    if "_malformed" in frame:
        return ManagerAction(
            "failed_action",
            {"metadata": {"error": "malformed bridge frame", "frame": frame["_malformed"][:200]}},
            rationale="bridge protocol violation",
        )
    try:
        action = decode_manager_action(frame.get("action"))
        action.rationale = "external policy"
        return action
    except ActionError as exc:
        return ManagerAction(
            "failed_action",
            {"metadata": {"error": str(exc), "frame": canonical_json(frame)[:200]}},
            rationale="bridge reply failed schema validation",
        )


class ExternalPolicy:
    """Manager policy backed by a bridge client process."""

    name = "external"

    def __init__(self, cmd: str | list[str], scenario_id: str, timeout: float = 10.0):
        self.host = BridgeHost(cmd, scenario_id=scenario_id, role="manager", timeout=timeout)
        self._started = False

    def act(self, obs: dict[str, Any]) -> ManagerAction:
        if not self._started:
            self.host.start()
            self._started = True
        return bridge_host_call(self.host, obs["timestep"], obs)

    def close(self) -> None:
        if self._started:
            self.host.close()
            self._started = False
