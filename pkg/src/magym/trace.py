"""Episode traces: canonical JSON-lines records with state digests.

One record per line. The header carries the full scenario document, seed, and
config so a trace is self-contained; every action record carries the digest of
the state immediately after it applied, which replay must reproduce.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from .model import WorkflowState

TRACE_FORMAT = "magym-trace/1"


class TraceError(Exception):
    """Corrupt or inconsistent trace file."""


def canonical_json(obj: Any) -> str:
    """Stable encoding: sorted keys, compact separators, UTF-8, finite floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def state_digest(state: WorkflowState) -> str:
    return hashlib.sha256(canonical_json(state.snapshot()).encode("utf-8")).hexdigest()[:16]


@dataclass
class Trace:
    header: dict[str, Any]
    records: list[dict[str, Any]] = field(default_factory=list)
    footer: Optional[dict[str, Any]] = None

    @property
    def scenario_id(self) -> str:
        return self.header["scenario"]["id"]

    @property
    def seed(self) -> int:
        return self.header["seed"]

    @property
    def policy_name(self) -> str:
        return self.header.get("policies", {}).get("manager", "unknown")

    def manager_records(self) -> list[dict[str, Any]]:
        return [r for r in self.records if r["agent"] == "manager"]

    def lines(self) -> Iterable[str]:
        yield canonical_json(self.header)
        for record in self.records:
            yield canonical_json(record)
        if self.footer is not None:
            yield canonical_json(self.footer)

    def dumps(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def header_record(
    scenario_doc: dict[str, Any],
    seed: int,
    config: dict[str, Any],
    policies: dict[str, str],
) -> dict[str, Any]:
    return {
        "kind": "header",
        "format": TRACE_FORMAT,
        "scenario": scenario_doc,
        "seed": seed,
        "config": config,
        "policies": policies,
    }


def action_record(
    seq: int,
    timestep: int,
    agent: str,
    action: dict[str, Any],
    rationale: str,
    digest: str,
    warning: str = "",
) -> dict[str, Any]:
    return {
        "kind": "action",
        "seq": seq,
        "timestep": timestep,
        "agent": agent,
        "action": action,
        "rationale": rationale,
        "warning": warning,
        "digest": digest,
    }


def footer_record(
    reason: str,
    final_timestep: int,
    manager_action_count: int,
    metrics: dict[str, Any],
    final_digest: str,
) -> dict[str, Any]:
    return {
        "kind": "footer",
        "termination_reason": reason,
        "final_timestep": final_timestep,
        "manager_action_count": manager_action_count,
        "metrics": metrics,
        "final_digest": final_digest,
    }


def parse_trace(text: str) -> Trace:
    header: Optional[dict[str, Any]] = None
    records: list[dict[str, Any]] = []
    footer: Optional[dict[str, Any]] = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        kind = record.get("kind")
        if kind == "header":
            if header is not None:
                raise TraceError(f"line {lineno}: duplicate header")
            header = record
        elif kind == "action":
            if header is None:
                raise TraceError(f"line {lineno}: action record before header")
            records.append(record)
        elif kind == "footer":
            if header is None:
                raise TraceError(f"line {lineno}: footer before header")
            footer = record
        else:
            raise TraceError(f"line {lineno}: unknown record kind {kind!r}")
    if header is None:
        raise TraceError("trace has no header record")
    if footer is None:
        raise TraceError("trace has no footer record")
    return Trace(header=header, records=records, footer=footer)


def read_trace(path: str | Path) -> Trace:
    return parse_trace(Path(path).read_text(encoding="utf-8"))
