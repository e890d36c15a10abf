/**
 * magym-bridge/1 wire protocol: newline-delimited UTF-8 JSON objects over
 * stdin/stdout. Frames are distinguished by their keys:
 *
 *   handshake {protocol_version, scenario_id, role}   -- echoed back verbatim
 *   step      {timestep, observation}                 -- answered with a reply
 *   reply     {action}
 *   shutdown  {reason}                                -- session ends
 */

export const PROTOCOL_VERSION = "magym-bridge/1";

export interface ActionObject {
  type: string;
  params: Record<string, unknown>;
}

export interface HandshakeFrame {
  protocol_version: string;
  scenario_id: string;
  role: string;
}

export interface StepFrame {
  timestep: number;
  observation: Record<string, unknown>;
}

export type Callback = (observation: Record<string, unknown>) => ActionObject;

/** The 16 manager action variants the engine accepts. */
export const ACTION_TYPES: ReadonlySet<string> = new Set([
  "assign_task",
  "assign_all_pending_tasks",
  "create_task",
  "remove_task",
  "send_message",
  "noop",
  "get_workflow_status",
  "get_available_agents",
  "get_pending_tasks",
  "refine_task",
  "add_task_dependency",
  "remove_task_dependency",
  "inspect_task",
  "decompose_task",
  "request_end_workflow",
  "failed_action",
]);

/** Deterministic JSON: object keys sorted recursively, compact separators. */
export function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .filter(([, v]) => v !== undefined)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  return (
    "{" +
    entries.map(([k, v]) => JSON.stringify(k) + ":" + canonicalJson(v)).join(",") +
    "}"
  );
}

export function isHandshake(frame: Record<string, unknown>): frame is HandshakeFrame & Record<string, unknown> {
  return typeof frame["protocol_version"] === "string";
}

export function isStep(frame: Record<string, unknown>): frame is StepFrame & Record<string, unknown> {
  return typeof frame["timestep"] === "number" && typeof frame["observation"] === "object";
}

export function isShutdown(frame: Record<string, unknown>): boolean {
  return typeof frame["reason"] === "string";
}

export function isValidAction(value: unknown): value is ActionObject {
  if (value === null || typeof value !== "object" || Array.isArray(value)) return false;
  const obj = value as Record<string, unknown>;
  if (typeof obj["type"] !== "string" || !ACTION_TYPES.has(obj["type"])) return false;
  const params = obj["params"];
  return params !== null && typeof params === "object" && !Array.isArray(params);
}

export function noopAction(): ActionObject {
  return { type: "noop", params: {} };
}

export function failedAction(error: string, detail?: string): ActionObject {
  const metadata: Record<string, unknown> = { error };
  if (detail !== undefined) {
    metadata["frame"] = detail.slice(0, 200);
  }
  return { type: "failed_action", params: { metadata } };
}
