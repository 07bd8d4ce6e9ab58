/**
 * Wire protocol types and request parsing.
 *
 * One JSON object per line on stdin/stdout:
 *   request:  {"id": <int>, "text": "<sentence>"}
 *   response: {"id": <int>, "nll": [<float>, ...]}   per-token -ln p
 *   error:    {"id": <int>, "error": "<message>"}
 *
 * Replies may be written in any order; the id pairs them with requests.
 * Ids must be non-negative safe integers (JSON numbers lose precision
 * beyond 2^53, so larger ids are rejected as malformed).
 */

export interface ScorerRequest {
  id: number;
  text: string;
}

export type ScorerResponse =
  | { id: number; nll: number[] }
  | { id: number; error: string };

/** Request-level failure; id is -1 when no id could be recovered. */
export class ProtocolError extends Error {
  constructor(
    message: string,
    readonly id: number = -1,
  ) {
    super(message);
    this.name = "ProtocolError";
  }
}

export function parseRequest(line: string): ScorerRequest {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    throw new ProtocolError("malformed JSON");
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new ProtocolError("request is not an object");
  }
  const record = parsed as Record<string, unknown>;
  const id = record["id"];
  if (typeof id !== "number" || !Number.isSafeInteger(id) || id < 0) {
    throw new ProtocolError("missing or invalid id");
  }
  const text = record["text"];
  if (typeof text !== "string") {
    throw new ProtocolError("missing text field", id);
  }
  return { id, text };
}
