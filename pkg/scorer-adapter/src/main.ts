#!/usr/bin/env node
/**
 * Entry point: load the requested model and serve the stdio line protocol.
 *
 *   gec-scorer-adapter --model stub:50
 *   gec-scorer-adapter --model ngram:model.json
 *
 * Exits nonzero if the model cannot be loaded; protocol-level failures are
 * reported per request and never terminate the process.
 */

import { loadScorer } from "./model.js";
import { serve } from "./server.js";

function parseArgs(argv: string[]): { model: string } {
  let model: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--model") {
      model = argv[++i];
    } else if (arg?.startsWith("--model=")) {
      model = arg.slice("--model=".length);
    } else if (arg === "--help" || arg === "-h") {
      console.error("usage: gec-scorer-adapter --model stub:V|ngram:FILE");
      process.exit(0);
    } else {
      throw new Error(`unknown argument ${JSON.stringify(arg)}`);
    }
  }
  if (!model) {
    throw new Error("missing required --model argument");
  }
  return { model };
}

async function main(): Promise<void> {
  const { model } = parseArgs(process.argv.slice(2));
  const scorer = loadScorer(model);
  await serve(scorer, process.stdin, process.stdout);
}

main().catch((err: unknown) => {
  console.error(`gec-scorer-adapter: ${err instanceof Error ? err.message : err}`);
  process.exit(1);
});
