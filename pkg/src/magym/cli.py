"""Command-line interface: run episodes, evaluate traces, inspect, validate.

Data goes to stdout, diagnostics to stderr; exit status 0 iff no errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Optional

from .engine import EpisodeConfig, replay_trace, run_episode
from .evaluation import METRIC_NAMES, MetricReport, aggregate
from .policies import PolicySpec, make_manager_policy, make_stakeholder_policy
from .scenario import ScenarioError, load_scenario, parse_scenario, validate_scenario
from .trace import TraceError, read_trace


def _parse_seeds(text: str) -> list[int]:
    """Accepts '1,2,3' and '1..5' forms."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def cmd_run(args: argparse.Namespace) -> int:
    try:
        doc = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: scenario rejected: {exc}", file=sys.stderr)
        return 1

    if args.seeds:
        seeds = _parse_seeds(args.seeds)
    elif os.environ.get("MAGYM_SEED"):
        seeds = [int(os.environ["MAGYM_SEED"])]
    else:
        seeds = [1]
    if not seeds:
        print("error: at least one seed is required", file=sys.stderr)
        return 1

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = PolicySpec(
        kind=args.policy, bridge_cmd=args.bridge_cmd, bridge_timeout=args.bridge_timeout
    )
    try:
        spec.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    def run_one(seed: int) -> Path:
        config = EpisodeConfig.for_scenario(
            doc,
            seed,
            max_manager_actions=args.max_actions,
            max_timesteps=args.max_timesteps,
        )
        manager = make_manager_policy(spec, seed, doc.id)
        policies = {"manager": manager, "stakeholder": make_stakeholder_policy(doc)}
        path = out_dir / f"{doc.id}_{spec.kind}_{seed}.jsonl"
        try:
            run_episode(config, policies, trace_path=str(path))
        finally:
            close = getattr(manager, "close", None)
            if close is not None:
                close()
        return path

    failures = 0
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = {seed: pool.submit(run_one, seed) for seed in seeds}
            for seed, future in futures.items():
                try:
                    print(future.result())
                except Exception as exc:  # noqa: BLE001 - report and continue the sweep
                    failures += 1
                    print(f"error: seed {seed}: {exc}", file=sys.stderr)
    else:
        for seed in seeds:
            try:
                print(run_one(seed))
            except Exception as exc:  # noqa: BLE001
                failures += 1
                print(f"error: seed {seed}: {exc}", file=sys.stderr)
    return 1 if failures else 0


def _format_table(rows: list[dict[str, Any]]) -> str:
    headers = ["scenario", "policy", "seeds"]
    for metric in METRIC_NAMES:
        headers.append(metric)
    display: list[list[str]] = [headers]
    for row in rows:
        cells = [row["scenario"], row["policy"], str(row["seeds"])]
        for metric in METRIC_NAMES:
            stats = row["metrics"][metric]
            cells.append(f"{stats['mean']:.3f}±{stats['std']:.3f}")
        display.append(cells)
    widths = [max(len(r[i]) for r in display) for i in range(len(headers))]
    lines = []
    for r in display:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def _format_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["scenario", "policy", "seeds"]
    for metric in METRIC_NAMES:
        header.extend([f"{metric}_mean", f"{metric}_std"])
    writer.writerow(header)
    for row in rows:
        cells: list[Any] = [row["scenario"], row["policy"], row["seeds"]]
        for metric in METRIC_NAMES:
            stats = row["metrics"][metric]
            cells.extend([f"{stats['mean']:.6f}", f"{stats['std']:.6f}"])
        writer.writerow(cells)
    return buf.getvalue()


def cmd_evaluate(args: argparse.Namespace) -> int:
    groups: dict[tuple[str, str], list[MetricReport]] = {}
    failures = 0
    for path in args.traces:
        try:
            trace = read_trace(path)
            report = MetricReport.from_dict(trace.footer["metrics"])
            if args.verify:
                replayed, divergences = replay_trace(trace)
                if divergences:
                    raise TraceError("; ".join(divergences))
                recomputed = MetricReport.from_dict(replayed.footer["metrics"])
                if recomputed.to_dict() != report.to_dict():
                    raise TraceError("footer metrics do not match recomputation")
        except (TraceError, ScenarioError, KeyError, OSError) as exc:
            failures += 1
            print(f"error: {path}: {exc}", file=sys.stderr)
            continue
        groups.setdefault((trace.scenario_id, trace.policy_name), []).append(report)

    rows = []
    for (scenario_id, policy), reports in sorted(groups.items()):
        rows.append(
            {
                "scenario": scenario_id,
                "policy": policy,
                "seeds": len(reports),
                "metrics": aggregate(reports),
            }
        )
    if rows:
        output = _format_csv(rows) if args.format == "csv" else _format_table(rows) + "\n"
        sys.stdout.write(output)
        if args.out:
            Path(args.out).write_text(output, encoding="utf-8")
    return 1 if failures else 0


def _action_summary(action: dict[str, Any]) -> str:
    params = action.get("params", {})
    shown = ", ".join(f"{k}={v}" for k, v in sorted(params.items()) if not isinstance(v, dict))
    return f"{action['type']}({shown})" if shown else f"{action['type']}()"


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        trace = read_trace(args.trace)
    except (TraceError, OSError) as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return 1
    print(f"# scenario={trace.scenario_id} policy={trace.policy_name} seed={trace.seed}")
    rows = trace.records
    if args.agent:
        rows = [r for r in rows if r["agent"] == args.agent]
    if args.type:
        rows = [r for r in rows if r["action"]["type"] == args.type]
    if args.first is not None:
        rows = rows[: args.first]
    for i, record in enumerate(rows, start=1):
        summary = _action_summary(record["action"])
        print(
            f"{i:4d}  t={record['timestep']:<4d} {record['agent']:<11s} "
            f"{summary:<60s} {record['rationale']}"
        )
    if trace.footer is not None:
        reason = trace.footer["termination_reason"]
        print(f"# terminated: {reason} at t={trace.footer['final_timestep']}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.scenario)
    try:
        if path.exists():
            doc = parse_scenario(path.read_text(encoding="utf-8"))
        else:
            doc = load_scenario(args.scenario)  # bundled name
    except ScenarioError as exc:
        print(f"error: {exc}")
        return 1
    diagnostics = validate_scenario(doc)
    for d in diagnostics:
        print(str(d))
    if not diagnostics:
        print(f"ok: {doc.id} ({len(doc.tasks)} tasks, {len(doc.workers)} workers)")
    return 1 if any(d.severity == "error" for d in diagnostics) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magym",
        description="Deterministic multi-agent workflow-management simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded episodes and write trace files")
    run.add_argument("--scenario", required=True, help="bundled scenario name or file path")
    run.add_argument(
        "--policy",
        required=True,
        choices=["random", "assign_all", "greedy", "external"],
    )
    run.add_argument("--seeds", help="comma list (1,2,3) or range (1..5); default MAGYM_SEED or 1")
    run.add_argument("--out", default="traces", help="output directory")
    run.add_argument("--max-actions", type=int, default=None, help="manager action cap")
    run.add_argument("--max-timesteps", type=int, default=None)
    run.add_argument("--jobs", type=int, default=1, help="parallel episodes")
    run.add_argument("--bridge-cmd", default=None, help="external policy child command")
    run.add_argument("--bridge-timeout", type=float, default=10.0)
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("evaluate", help="aggregate trace metrics per scenario x policy")
    ev.add_argument("traces", nargs="+", help="trace files")
    ev.add_argument("--format", choices=["table", "csv"], default="table")
    ev.add_argument("--out", default=None, help="also write the table/CSV to this file")
    ev.add_argument(
        "--verify",
        action="store_true",
        help="replay each trace and cross-check footer metrics",
    )
    ev.set_defaults(func=cmd_evaluate)

    ins = sub.add_parser("inspect", help="human-readable action buffer for one trace")
    ins.add_argument("trace")
    ins.add_argument("--first", type=int, default=None, help="show only the first N records")
    ins.add_argument("--agent", default=None, help="filter by agent id")
    ins.add_argument("--type", default=None, help="filter by action type")
    ins.set_defaults(func=cmd_inspect)

    val = sub.add_parser("validate", help="parse and validate a scenario document")
    val.add_argument("scenario", help="scenario file path or bundled name")
    val.set_defaults(func=cmd_validate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
