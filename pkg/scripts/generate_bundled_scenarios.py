#!/usr/bin/env python3
"""Regenerate the bundled scenario documents in canonical form.

Run from the repo root after editing the definitions below:

    python scripts/generate_bundled_scenarios.py
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from magym.model import Constraint, Deliverable, SubtaskTemplate, TaskDraft, Worker, WorkerKind
from magym.scenario import (
    EpisodeDefaults,
    ExecutionProfile,
    ScenarioDoc,
    ScheduleEntry,
    StakeholderSpec,
    serialize_scenario,
    validate_scenario,
)

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "magym" / "scenarios"


def task(
    tid: str,
    name: str,
    hours: float,
    skills: list[str],
    tier: str | None = None,
    points: float = 0.0,
    scoring: str = "binary",
    description: str = "",
) -> TaskDraft:
    return TaskDraft(
        id=tid,
        name=name,
        description=description or name,
        estimated_hours=hours,
        estimated_cost=round(hours * 80.0, 2),
        required_skills=skills,
        deliverable=None if tier is None else Deliverable(tier=tier, points=points, scoring=scoring),
    )


def worker(
    wid: str,
    kind: WorkerKind,
    capabilities: dict[str, float],
    cost_rate: float,
    join: int = 0,
    leave: int | None = None,
) -> Worker:
    return Worker(
        id=wid,
        kind=kind,
        capabilities=capabilities,
        cost_rate=cost_rate,
        join_timestep=join,
        leave_timestep=leave,
    )


def hard(cid: str, description: str, predicate: dict) -> Constraint:
    return Constraint(id=cid, kind="hard", description=description, predicate=predicate)


def soft(cid: str, description: str, predicate: dict, weight: float) -> Constraint:
    return Constraint(
        id=cid, kind="soft", description=description, predicate=predicate, penalty_weight=weight
    )


def standard_schedule() -> list[ScheduleEntry]:
    """Speed -> quality -> compliance emphasis with change-points at 35 and 70."""
    return [
        ScheduleEntry(0, {"speed": 0.5, "quality": 0.25, "compliance": 0.25}),
        ScheduleEntry(35, {"quality": 0.5, "speed": 0.25, "compliance": 0.25}),
        ScheduleEntry(70, {"compliance": 0.5, "speed": 0.25, "quality": 0.25}),
    ]


def legal_contract_negotiation() -> ScenarioDoc:
    ai = WorkerKind.AI
    human = WorkerKind.SIMULATED_HUMAN
    return ScenarioDoc(
        id="legal_contract_negotiation",
        title="Legal contract negotiation: clause redlines and summary",
        domain="legal",
        tasks=[
            task("intake", "Matter intake and goals", 3, ["research"], "supporting", 4),
            task("precedent_review", "Precedent and playbook review", 5, ["research"], "supporting", 5),
            task("risk_matrix", "Clause risk matrix", 5, ["compliance_review"], "major", 9),
            task("draft_terms", "Draft key commercial terms", 9, ["drafting"], "critical", 14),
            task("draft_schedules", "Draft schedules and annexes", 6, ["drafting"], "major", 8),
            task("redline_pass1", "First redline pass", 6, ["negotiation"], "major", 10),
            task("counter_positions", "Counterparty position log", 4, ["negotiation"], "supporting", 6),
            task("compliance_check", "Regulatory compliance check", 7, ["compliance_review"], "critical", 13),
            task("exec_summary", "Executive summary of positions", 4, ["drafting"], "major", 8),
            task("negotiation_brief", "Negotiation strategy brief", 6, ["negotiation", "drafting"], "critical", 12),
            task("signoff_package", "Signature and sign-off package", 4, ["compliance_review", "drafting"], "critical", 15),
            task("archive_bundle", "Matter archive bundle", 2, ["research"], "supporting", 3, scoring="graduated"),
            task("comms_log", "Communications log setup", 2, ["research"]),
            task("style_guide", "House style guide refresher", 2, ["drafting"]),
        ],
        edges=[
            ("intake", "precedent_review"),
            ("intake", "risk_matrix"),
            ("precedent_review", "draft_terms"),
            ("risk_matrix", "draft_terms"),
            ("draft_terms", "draft_schedules"),
            ("draft_terms", "redline_pass1"),
            ("redline_pass1", "counter_positions"),
            ("draft_schedules", "compliance_check"),
            ("counter_positions", "compliance_check"),
            ("compliance_check", "exec_summary"),
            ("compliance_check", "negotiation_brief"),
            ("exec_summary", "signoff_package"),
            ("negotiation_brief", "signoff_package"),
            ("signoff_package", "archive_bundle"),
        ],
        decomposition_templates={
            "draft_terms": [
                SubtaskTemplate("Term sheet skeleton", "Structure the term sheet", 1, 80, ["drafting"]),
                SubtaskTemplate("Pricing and payment clauses", "", 1, 80, ["drafting"], after=[0]),
                SubtaskTemplate("Liability and indemnity clauses", "", 1, 80, ["drafting"], after=[0]),
                SubtaskTemplate("Term and termination clauses", "", 0.5, 40, ["drafting"], after=[0]),
                SubtaskTemplate("Internal consistency pass", "", 0.5, 40, ["drafting"], after=[1, 2, 3]),
            ]
        },
        workers=[
            worker("contract_ai", ai, {"drafting": 0.9, "research": 0.75, "compliance_review": 0.6}, 5.0),
            worker("redline_ai", ai, {"negotiation": 0.7, "drafting": 0.6, "compliance_review": 0.85}, 5.0),
            worker("paralegal", human, {"research": 0.8, "drafting": 0.5}, 80.0, join=0, leave=60),
            worker("counsel_senior", human, {"drafting": 0.85, "negotiation": 0.95, "compliance_review": 0.8}, 300.0, join=25),
        ],
        constraints=[
            hard(
                "signoff_deadline",
                "Sign-off package must be complete by t=90",
                {"type": "task_completed_by", "task_id": "signoff_package", "timestep": 90},
            ),
            soft(
                "early_briefing",
                "Brief the stakeholder before t=30",
                {"type": "message_sent_before", "receiver": "stakeholder", "timestep": 30},
                0.2,
            ),
            soft(
                "compliance_evidence",
                "Compliance check must leave written evidence",
                {"type": "artifact_exists_for", "task_id": "compliance_check"},
                0.2,
            ),
            soft(
                "human_signoff",
                "Sign-off package must not be executed by an AI worker",
                {"type": "no_assignment_of_kind", "worker_kind": "ai", "task_id": "signoff_package"},
                0.3,
            ),
        ],
        preference_schedule=[
            ScheduleEntry(
                0,
                {"governance": 0.35, "compliance": 0.25, "quality": 0.20, "speed": 0.10, "cost": 0.10},
            ),
            ScheduleEntry(
                35,
                {"quality": 0.5, "governance": 0.15, "compliance": 0.15, "speed": 0.1, "cost": 0.1},
            ),
            ScheduleEntry(
                70,
                {"compliance": 0.5, "governance": 0.2, "quality": 0.15, "speed": 0.075, "cost": 0.075},
            ),
        ],
        stakeholder=StakeholderSpec(reply_latency=2, end_approval="when_deliverables_complete"),
        execution=ExecutionProfile(
            duration_sigma=0.25, quality_noise=0.05, human_latency_multiplier=2.0, hours_per_timestep=1.0
        ),
        config=EpisodeDefaults(max_manager_actions=100, max_timesteps=100, worker_capacity=1),
    )


def data_science_analytics() -> ScenarioDoc:
    ai = WorkerKind.AI
    human = WorkerKind.SIMULATED_HUMAN
    return ScenarioDoc(
        id="data_science_analytics",
        title="Data science and analytics: explore, model, report",
        domain="analytics",
        tasks=[
            task("scope_brief", "Scope and success criteria", 3, ["analytics"], "supporting", 4),
            task("data_inventory", "Data source inventory", 4, ["data_engineering"], "supporting", 5),
            task("ingest_pipeline", "Ingestion pipeline", 7, ["data_engineering"], "major", 10),
            task("data_quality_report", "Data quality report", 5, ["data_engineering", "analytics"], "major", 8),
            task("feature_table", "Feature table build", 6, ["data_engineering", "modeling"], "major", 9),
            task("baseline_model", "Baseline model", 6, ["modeling"], "critical", 13),
            task("model_eval", "Model evaluation and calibration", 6, ["modeling", "analytics"], "critical", 14),
            task("error_analysis", "Error analysis memo", 3, ["analytics"], "supporting", 6, scoring="graduated"),
            task("final_model", "Final model selection", 6, ["modeling"], "critical", 15),
            task("insights_report", "Insights report", 5, ["reporting", "analytics"], "major", 11),
            task("exec_deck", "Executive deck", 4, ["reporting"], "major", 8),
            task("notebook_cleanup", "Notebook hygiene pass", 2, ["data_engineering"]),
            task("runbook", "Operations runbook", 2, ["reporting"]),
        ],
        edges=[
            ("scope_brief", "data_inventory"),
            ("data_inventory", "ingest_pipeline"),
            ("ingest_pipeline", "data_quality_report"),
            ("data_quality_report", "feature_table"),
            ("feature_table", "baseline_model"),
            ("baseline_model", "model_eval"),
            ("model_eval", "error_analysis"),
            ("model_eval", "final_model"),
            ("error_analysis", "final_model"),
            ("final_model", "insights_report"),
            ("insights_report", "exec_deck"),
        ],
        decomposition_templates={
            "ingest_pipeline": [
                SubtaskTemplate("Source connectors", "", 1.5, 120, ["data_engineering"]),
                SubtaskTemplate("Schema mapping", "", 1.5, 120, ["data_engineering"], after=[0]),
                SubtaskTemplate("Load validation", "", 1.0, 80, ["data_engineering"], after=[1]),
            ]
        },
        workers=[
            worker("pipeline_ai", ai, {"data_engineering": 0.8, "analytics": 0.6}, 4.0),
            worker("model_ai", ai, {"modeling": 0.9, "analytics": 0.7}, 6.0),
            worker("analyst_human", human, {"analytics": 0.85, "reporting": 0.9}, 90.0),
            worker("data_engineer", human, {"data_engineering": 0.8, "modeling": 0.5}, 120.0, join=20),
        ],
        constraints=[
            hard(
                "evaluation_deadline",
                "Model evaluation must be complete by t=85",
                {"type": "task_completed_by", "task_id": "model_eval", "timestep": 85},
            ),
            soft(
                "kickoff_note",
                "Tell the stakeholder the plan before t=25",
                {"type": "message_sent_before", "receiver": "stakeholder", "timestep": 25},
                0.25,
            ),
            soft(
                "data_quality_evidence",
                "Data quality findings need a written artifact",
                {"type": "artifact_exists_for", "task_id": "data_quality_report"},
                0.25,
            ),
            soft(
                "project_budget",
                "Keep incurred cost under 5000",
                {"type": "budget_below", "amount": 5000},
                0.3,
            ),
        ],
        preference_schedule=standard_schedule(),
        stakeholder=StakeholderSpec(reply_latency=2, end_approval="when_deliverables_complete"),
        execution=ExecutionProfile(
            duration_sigma=0.3, quality_noise=0.08, human_latency_multiplier=1.5, hours_per_timestep=1.0
        ),
        config=EpisodeDefaults(max_manager_actions=100, max_timesteps=100, worker_capacity=1),
    )


def marketing_campaign() -> ScenarioDoc:
    ai = WorkerKind.AI
    human = WorkerKind.SIMULATED_HUMAN
    return ScenarioDoc(
        id="marketing_campaign",
        title="Marketing campaign: brief, assets, launch plan",
        domain="marketing",
        tasks=[
            task("campaign_brief", "Campaign brief", 3, ["strategy"], "supporting", 4),
            task("audience_research", "Audience research", 4, ["analytics"], "supporting", 5),
            task("messaging_platform", "Messaging platform", 5, ["strategy", "copywriting"], "major", 9),
            task("channel_plan", "Channel and budget plan", 5, ["strategy", "analytics"], "major", 8),
            task("copy_suite", "Copy suite for all channels", 8, ["copywriting"], "critical", 13),
            task("visual_concepts", "Visual concept set", 8, ["design"], "critical", 12),
            task("landing_page", "Landing page build", 6, ["design", "copywriting"], "major", 10),
            task("launch_checklist", "Launch readiness checklist", 3, ["strategy"], "supporting", 6),
            task("tracking_setup", "Tracking and attribution setup", 4, ["analytics"], "major", 8),
            task("campaign_report", "Campaign effectiveness report", 6, ["analytics", "strategy"], "critical", 14),
            task("creative_review", "Creative review session", 2, ["design", "strategy"], "supporting", 5, scoring="graduated"),
            task("brand_folder", "Brand asset folder check", 2, ["design"]),
            task("asset_inventory", "Asset inventory", 2, ["copywriting"]),
        ],
        edges=[
            ("campaign_brief", "audience_research"),
            ("campaign_brief", "messaging_platform"),
            ("audience_research", "channel_plan"),
            ("messaging_platform", "copy_suite"),
            ("messaging_platform", "visual_concepts"),
            ("copy_suite", "landing_page"),
            ("visual_concepts", "landing_page"),
            ("visual_concepts", "creative_review"),
            ("channel_plan", "tracking_setup"),
            ("landing_page", "launch_checklist"),
            ("tracking_setup", "campaign_report"),
            ("launch_checklist", "campaign_report"),
        ],
        decomposition_templates={
            "copy_suite": [
                SubtaskTemplate("Email sequence copy", "", 1, 80, ["copywriting"]),
                SubtaskTemplate("Paid social copy", "", 1, 80, ["copywriting"]),
                SubtaskTemplate("Landing page copy", "", 1, 80, ["copywriting"]),
                SubtaskTemplate("Copy consistency pass", "", 1, 80, ["copywriting"], after=[0, 1, 2]),
            ]
        },
        workers=[
            worker("copy_ai", ai, {"copywriting": 0.9, "strategy": 0.5}, 4.0),
            worker("media_ai", ai, {"analytics": 0.8, "copywriting": 0.5}, 5.0),
            worker("strategist_human", human, {"strategy": 0.9, "analytics": 0.7}, 110.0),
            worker("designer_human", human, {"design": 0.95, "copywriting": 0.4}, 100.0, join=30),
        ],
        constraints=[
            hard(
                "report_deadline",
                "Campaign report must be complete by t=90",
                {"type": "task_completed_by", "task_id": "campaign_report", "timestep": 90},
            ),
            soft(
                "kickoff_brief",
                "Brief the stakeholder before t=30",
                {"type": "message_sent_before", "receiver": "stakeholder", "timestep": 30},
                0.2,
            ),
            soft(
                "human_creative_review",
                "Creative review should not be delegated to an AI worker",
                {"type": "no_assignment_of_kind", "worker_kind": "ai", "task_id": "creative_review"},
                0.2,
            ),
            soft(
                "tracking_evidence",
                "Tracking setup must produce a written artifact",
                {"type": "artifact_exists_for", "task_id": "tracking_setup"},
                0.2,
            ),
        ],
        preference_schedule=standard_schedule(),
        stakeholder=StakeholderSpec(reply_latency=2, end_approval="when_deliverables_complete"),
        execution=ExecutionProfile(
            duration_sigma=0.25, quality_noise=0.06, human_latency_multiplier=1.8, hours_per_timestep=1.0
        ),
        config=EpisodeDefaults(max_manager_actions=100, max_timesteps=100, worker_capacity=1),
    )


def icaap_draft() -> ScenarioDoc:
    ai = WorkerKind.AI
    human = WorkerKind.SIMULATED_HUMAN
    return ScenarioDoc(
        id="icaap_draft",
        title="ICAAP: capital adequacy report draft",
        domain="risk",
        tasks=[
            task("plan_outline", "Report plan and outline", 3, ["documentation"], "supporting", 4),
            task("data_extract", "Quarter-end data extract", 5, ["credit_risk"], "supporting", 5),
            task("credit_capital_model", "Credit risk capital model", 9, ["credit_risk"], "critical", 15),
            task("oprisk_scenarios", "Operational risk scenario set", 6, ["operational_risk"], "major", 10),
            task("irrbb_assessment", "Interest-rate risk assessment", 6, ["credit_risk", "stress_testing"], "major", 9),
            task("stress_scenarios", "Stress scenario design", 6, ["stress_testing"], "critical", 13),
            task("stress_results", "Stress test results", 6, ["stress_testing", "credit_risk"], "major", 10),
            task("capital_plan", "Normative capital plan", 7, ["credit_risk", "documentation"], "critical", 14),
            task("governance_annex", "Governance annex", 4, ["documentation"], "major", 8),
            task("exec_summary", "Executive summary", 4, ["documentation"], "major", 8),
            task("board_pack", "Board review pack", 5, ["review", "documentation"], "critical", 12),
            task("evidence_register", "Evidence register", 2, ["documentation"], "supporting", 4, scoring="graduated"),
            task("glossary", "Glossary of terms", 2, ["documentation"]),
            task("data_dictionary", "Data dictionary", 2, ["credit_risk"]),
            task("formatting_pass", "Formatting pass", 2, ["documentation"]),
            task("qa_checklist", "QA checklist", 2, ["review"]),
        ],
        edges=[
            ("plan_outline", "data_extract"),
            ("data_extract", "credit_capital_model"),
            ("data_extract", "oprisk_scenarios"),
            ("data_extract", "irrbb_assessment"),
            ("credit_capital_model", "stress_scenarios"),
            ("oprisk_scenarios", "stress_scenarios"),
            ("irrbb_assessment", "stress_scenarios"),
            ("stress_scenarios", "stress_results"),
            ("stress_results", "capital_plan"),
            ("capital_plan", "governance_annex"),
            ("capital_plan", "exec_summary"),
            ("governance_annex", "board_pack"),
            ("exec_summary", "board_pack"),
            ("board_pack", "evidence_register"),
        ],
        decomposition_templates={
            "credit_capital_model": [
                SubtaskTemplate("Define gross metric requirements", "", 1, 80, ["credit_risk"]),
                SubtaskTemplate("Source mapping and extraction", "", 1, 80, ["credit_risk"], after=[0]),
                SubtaskTemplate("Model parameter calibration", "", 1, 80, ["credit_risk"], after=[1]),
                SubtaskTemplate("Capital requirement computation", "", 1, 80, ["credit_risk"], after=[2]),
                SubtaskTemplate("Model documentation", "", 1, 80, ["credit_risk"], after=[3]),
            ]
        },
        workers=[
            worker("credit_modeler_ai", ai, {"credit_risk": 0.9, "stress_testing": 0.6}, 6.0),
            worker("oprisk_ai", ai, {"operational_risk": 0.85, "documentation": 0.5}, 5.0),
            worker("stress_designer_ai", ai, {"stress_testing": 0.9, "credit_risk": 0.5}, 6.0),
            worker("doc_lead_human", human, {"documentation": 0.9, "review": 0.6}, 100.0),
            worker("reviewer_human", human, {"review": 0.95, "documentation": 0.7}, 150.0, join=40),
        ],
        constraints=[
            hard(
                "board_pack_deadline",
                "Board pack must be complete by t=92",
                {"type": "task_completed_by", "task_id": "board_pack", "timestep": 92},
            ),
            soft(
                "human_board_pack",
                "Board pack must be produced by a human reviewer",
                {"type": "no_assignment_of_kind", "worker_kind": "ai", "task_id": "board_pack"},
                0.25,
            ),
            soft(
                "governance_evidence",
                "Governance annex needs written evidence",
                {"type": "artifact_exists_for", "task_id": "governance_annex"},
                0.2,
            ),
            soft(
                "early_plan_note",
                "Share the plan with the stakeholder before t=35",
                {"type": "message_sent_before", "receiver": "stakeholder", "timestep": 35},
                0.2,
            ),
            soft(
                "cost_envelope",
                "Keep incurred cost under 9000",
                {"type": "budget_below", "amount": 9000},
                0.25,
            ),
        ],
        preference_schedule=[
            ScheduleEntry(
                0,
                {"speed": 0.5, "quality": 0.2, "compliance": 0.15, "governance": 0.1, "cost": 0.05},
            ),
            ScheduleEntry(
                35,
                {"quality": 0.5, "speed": 0.15, "compliance": 0.15, "governance": 0.1, "cost": 0.1},
            ),
            ScheduleEntry(
                70,
                {"compliance": 0.5, "quality": 0.2, "governance": 0.1, "speed": 0.1, "cost": 0.1},
            ),
        ],
        stakeholder=StakeholderSpec(reply_latency=2, end_approval="when_deliverables_complete"),
        execution=ExecutionProfile(
            duration_sigma=0.3, quality_noise=0.05, human_latency_multiplier=2.0, hours_per_timestep=1.0
        ),
        config=EpisodeDefaults(max_manager_actions=100, max_timesteps=100, worker_capacity=1),
    )


def supply_chain_planning() -> ScenarioDoc:
    ai = WorkerKind.AI
    human = WorkerKind.SIMULATED_HUMAN
    return ScenarioDoc(
        id="supply_chain_planning",
        title="Supply chain planning: plan, simulate, report",
        domain="operations",
        tasks=[
            task("demand_brief", "Demand planning brief", 3, ["forecasting"], "supporting", 4),
            task("demand_forecast", "Demand forecast", 6, ["forecasting"], "major", 10),
            task("capacity_review", "Capacity review", 4, ["logistics"], "major", 8),
            task("network_model", "Network optimization model", 8, ["optimization"], "critical", 13),
            task("inventory_policy", "Inventory policy", 5, ["optimization", "forecasting"], "major", 9),
            task("route_plan", "Route and carrier plan", 6, ["logistics"], "major", 8),
            task("scenario_sim", "Disruption scenario simulation", 6, ["optimization"], "critical", 14),
            task("risk_register", "Supply risk register", 3, ["logistics"], "supporting", 5, scoring="graduated"),
            task("final_plan", "Final supply chain plan", 6, ["logistics", "reporting"], "critical", 15),
            task("ops_playbook", "Operations playbook", 4, ["reporting"], "major", 8),
            task("data_refresh", "Reference data refresh", 2, ["forecasting"]),
            task("stakeholder_faq", "Stakeholder FAQ", 2, ["reporting"]),
        ],
        edges=[
            ("demand_brief", "demand_forecast"),
            ("demand_forecast", "network_model"),
            ("capacity_review", "network_model"),
            ("demand_forecast", "inventory_policy"),
            ("network_model", "route_plan"),
            ("network_model", "scenario_sim"),
            ("scenario_sim", "risk_register"),
            ("inventory_policy", "final_plan"),
            ("route_plan", "final_plan"),
            ("risk_register", "final_plan"),
            ("final_plan", "ops_playbook"),
        ],
        decomposition_templates={
            "network_model": [
                SubtaskTemplate("Model scaffolding", "", 1.5, 120, ["optimization"]),
                SubtaskTemplate("Cost and constraint data", "", 1.5, 120, ["optimization"], after=[0]),
                SubtaskTemplate("Solve and sensitivity", "", 1.0, 80, ["optimization"], after=[1]),
            ]
        },
        workers=[
            worker("forecast_ai", ai, {"forecasting": 0.85, "optimization": 0.5}, 5.0),
            worker("optimizer_ai", ai, {"optimization": 0.9, "logistics": 0.6}, 6.0),
            worker("planner_human", human, {"logistics": 0.85, "reporting": 0.8}, 95.0),
            worker("analyst_human", human, {"forecasting": 0.8, "reporting": 0.9}, 85.0, join=20),
        ],
        constraints=[
            hard(
                "plan_deadline",
                "Final plan must be complete by t=88",
                {"type": "task_completed_by", "task_id": "final_plan", "timestep": 88},
            ),
            soft(
                "sim_evidence",
                "Scenario simulation must leave a written artifact",
                {"type": "artifact_exists_for", "task_id": "scenario_sim"},
                0.25,
            ),
            soft(
                "early_alignment",
                "Align with the stakeholder before t=30",
                {"type": "message_sent_before", "receiver": "stakeholder", "timestep": 30},
                0.25,
            ),
        ],
        preference_schedule=standard_schedule(),
        stakeholder=StakeholderSpec(reply_latency=2, end_approval="when_deliverables_complete"),
        execution=ExecutionProfile(
            duration_sigma=0.25, quality_noise=0.06, human_latency_multiplier=1.6, hours_per_timestep=1.0
        ),
        config=EpisodeDefaults(max_manager_actions=100, max_timesteps=100, worker_capacity=1),
    )


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    builders = [
        legal_contract_negotiation,
        data_science_analytics,
        marketing_campaign,
        icaap_draft,
        supply_chain_planning,
    ]
    for build in builders:
        doc = build()
        diagnostics = [d for d in validate_scenario(doc) if d.severity == "error"]
        if diagnostics:
            for d in diagnostics:
                print(f"{doc.id}: {d}")
            return 1
        path = OUT_DIR / f"{doc.id}.json"
        path.write_text(serialize_scenario(doc), encoding="utf-8")
        deliverables = sum(1 for t in doc.tasks if t.deliverable is not None)
        print(f"wrote {path.name}: {len(doc.tasks)} tasks, {deliverables} deliverables")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
