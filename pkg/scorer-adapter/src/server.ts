/**
 * Line-protocol server loop: read requests from the input stream, score,
 * write replies to the output stream. Replies for failed requests carry the
 * request id (or -1 when the line was not even parseable), and one bad
 * request never stops the loop.
 */

import { once } from "node:events";
import * as readline from "node:readline";

import type { CausalScorer } from "./model.js";
import { ProtocolError, parseRequest, type ScorerResponse } from "./protocol.js";

export async function serve(
  scorer: CausalScorer,
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream,
): Promise<void> {
  const rl = readline.createInterface({ input, crlfDelay: Infinity, terminal: false });

  async function writeReply(reply: ScorerResponse): Promise<void> {
    if (!output.write(JSON.stringify(reply) + "\n")) {
      await once(output, "drain");
    }
  }

  for await (const line of rl) {
    const trimmed = line.trim();
    if (trimmed === "") {
      continue;
    }
    let id = -1;
    let reply: ScorerResponse;
    try {
      const request = parseRequest(trimmed);
      id = request.id;
      reply = { id, nll: scorer.nll(request.text) };
    } catch (err) {
      if (err instanceof ProtocolError) {
        id = err.id;
      }
      reply = { id, error: err instanceof Error ? err.message : String(err) };
    }
    await writeReply(reply);
  }
}
