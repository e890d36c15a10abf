/**
 * Example policy callbacks. LLM-backed policies would follow the same shape:
 * take the observation object, return one of the 16 action objects.
 */

import { ActionObject, Callback, isValidAction, noopAction } from "./protocol";

interface TaskView {
  id: string;
  ready?: boolean;
  owner?: string | null;
  required_skills?: string[];
}

interface WorkerView {
  id: string;
  active?: boolean;
  capabilities?: Record<string, number>;
  running_task_ids?: string[];
  queued_task_ids?: string[];
}

/**
 * Conformance/demo callback: if the engine embedded an action under
 * observation.echo, return it unchanged; otherwise no-op.
 */
export const noopEcho: Callback = (observation) => {
  const echoed = observation["echo"];
  if (isValidAction(echoed)) {
    return echoed as ActionObject;
  }
  return noopAction();
};

function skillMatch(worker: WorkerView, skills: string[]): number {
  if (skills.length === 0) return 1.0;
  const caps = worker.capabilities ?? {};
  const total = skills.reduce((acc, s) => acc + (caps[s] ?? 0), 0);
  return total / skills.length;
}

/**
 * Route the first ready unassigned task to the idle active worker with the
 * best skill match (ties to the smaller worker id); otherwise no-op.
 */
export const greedyAssign: Callback = (observation) => {
  const tasks = (observation["tasks"] ?? []) as TaskView[];
  const workers = (observation["workers"] ?? []) as WorkerView[];

  const candidates = tasks
    .filter((t) => t.ready && (t.owner === null || t.owner === undefined))
    .sort((a, b) => a.id.localeCompare(b.id));
  const idle = workers
    .filter(
      (w) =>
        w.active &&
        (w.running_task_ids ?? []).length === 0 &&
        (w.queued_task_ids ?? []).length === 0,
    )
    .sort((a, b) => a.id.localeCompare(b.id));

  if (candidates.length === 0 || idle.length === 0) {
    return noopAction();
  }
  const task = candidates[0];
  const skills = task.required_skills ?? [];
  let best = idle[0];
  let bestScore = skillMatch(best, skills);
  for (const worker of idle.slice(1)) {
    const score = skillMatch(worker, skills);
    if (score > bestScore) {
      best = worker;
      bestScore = score;
    }
  }
  return { type: "assign_task", params: { task_id: task.id, worker_id: best.id } };
};

export const CALLBACKS: Record<string, Callback> = {
  "noop-echo": noopEcho,
  echo: noopEcho,
  noop: noopEcho,
  "greedy-assign": greedyAssign,
  greedy: greedyAssign,
};
