/**
 * Session loop for a bridge policy client.
 *
 * Protocol bytes are the only thing ever written to stdout; all logging goes
 * to stderr. Malformed inbound frames are answered with a failed_action reply
 * so the host can keep the episode moving, and the loop then continues.
 */

import * as readline from "node:readline";
import {
  Callback,
  PROTOCOL_VERSION,
  canonicalJson,
  failedAction,
  isHandshake,
  isShutdown,
  isStep,
  isValidAction,
  noopAction,
} from "./protocol";

export interface ClientSession {
  protocolVersion: string;
  role: string;
  scenarioId: string;
  stepsServed: number;
}

export interface ServeOptions {
  input?: NodeJS.ReadableStream;
  output?: NodeJS.WritableStream;
  log?: (message: string) => void;
}

/** Serve observations until the shutdown frame (or EOF). */
export function serve(callback: Callback, options: ServeOptions = {}): Promise<ClientSession> {
  const input = options.input ?? process.stdin;
  const output = options.output ?? process.stdout;
  const log = options.log ?? ((message: string) => process.stderr.write(message + "\n"));

  const session: ClientSession = {
    protocolVersion: PROTOCOL_VERSION,
    role: "manager",
    scenarioId: "",
    stepsServed: 0,
  };

  const send = (frame: unknown) => {
    output.write(canonicalJson(frame) + "\n");
  };

  return new Promise((resolve) => {
    const rl = readline.createInterface({ input, crlfDelay: Infinity });
    let finished = false;

    const finish = (reason: string) => {
      if (finished) return;
      finished = true;
      log(`bridge client: session over (${reason}) after ${session.stepsServed} steps`);
      rl.close();
      // Release stdin so the process can exit once the session is over.
      const closable = input as NodeJS.ReadableStream & { destroy?: () => void };
      if (typeof closable.destroy === "function") {
        closable.destroy();
      }
      resolve(session);
    };

    rl.on("line", (line: string) => {
      if (finished || line.trim() === "") return;

      let frame: Record<string, unknown>;
      try {
        const parsed = JSON.parse(line);
        if (parsed === null || typeof parsed !== "object" || Array.isArray(parsed)) {
          throw new Error("frame is not an object");
        }
        frame = parsed as Record<string, unknown>;
      } catch {
        send({ action: failedAction("malformed frame", line) });
        return;
      }

      if (isHandshake(frame)) {
        session.role = String(frame["role"] ?? "manager");
        session.scenarioId = String(frame["scenario_id"] ?? "");
        if (frame["protocol_version"] !== PROTOCOL_VERSION) {
          log(`bridge client: unexpected protocol ${frame["protocol_version"]}`);
        }
        send(frame); // echo the handshake verbatim
        return;
      }

      if (isShutdown(frame)) {
        finish(String(frame["reason"]));
        return;
      }

      if (isStep(frame)) {
        let action;
        try {
          action = callback(frame["observation"] as Record<string, unknown>);
        } catch (err) {
          send({ action: failedAction(`callback failure: ${String(err)}`) });
          session.stepsServed += 1;
          return;
        }
        if (!isValidAction(action)) {
          log("bridge client: callback produced an invalid action; sending noop");
          action = noopAction();
        }
        send({ action });
        session.stepsServed += 1;
        return;
      }

      send({ action: failedAction("unrecognized frame", canonicalJson(frame)) });
    });

    rl.on("close", () => finish("eof"));
  });
}
