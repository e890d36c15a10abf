/**
 * Entry point: node dist/main.js --callback {noop-echo|greedy-assign}
 *
 * Attach it to an episode with the engine CLI:
 *   magym run --scenario legal_contract_negotiation --policy external \
 *     --bridge-cmd "node frontend/dist/main.js --callback greedy-assign"
 */

import { CALLBACKS } from "./callbacks";
import { serve } from "./client";

function parseArgs(argv: string[]): { callback: string } {
  let callback = "noop-echo";
  for (let i = 0; i < argv.length; i += 1) {
    if (argv[i] === "--callback" && i + 1 < argv.length) {
      callback = argv[i + 1];
      i += 1;
    } else if (argv[i] === "--help" || argv[i] === "-h") {
      process.stderr.write(
        "usage: main.js [--callback noop-echo|greedy-assign]\n",
      );
      process.exit(0);
    }
  }
  return { callback };
}

async function main(): Promise<void> {
  const { callback } = parseArgs(process.argv.slice(2));
  const fn = CALLBACKS[callback];
  if (!fn) {
    process.stderr.write(
      `unknown callback ${callback}; options: ${Object.keys(CALLBACKS).join(", ")}\n`,
    );
    process.exit(2);
  }
  await serve(fn);
}

main().catch((err) => {
  process.stderr.write(`bridge client fatal: ${String(err)}\n`);
  process.exit(1);
});
