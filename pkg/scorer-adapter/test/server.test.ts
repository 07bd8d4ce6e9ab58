import { type ChildProcessWithoutNullStreams, spawn } from "node:child_process";
import { once } from "node:events";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import * as readline from "node:readline";

import { afterEach, describe, expect, it } from "vitest";

const MAIN = join(dirname(fileURLToPath(import.meta.url)), "..", "dist", "main.js");

type Reply = { id: number; nll?: number[]; error?: string };

class AdapterHarness {
  readonly child: ChildProcessWithoutNullStreams;
  private readonly replies: Reply[] = [];
  private waiters: (() => void)[] = [];

  constructor(args: string[]) {
    this.child = spawn("node", [MAIN, ...args], { stdio: "pipe" });
    const rl = readline.createInterface({ input: this.child.stdout });
    rl.on("line", (line) => {
      this.replies.push(JSON.parse(line) as Reply);
      const waiters = this.waiters;
      this.waiters = [];
      for (const wake of waiters) wake();
    });
  }

  send(line: string): void {
    this.child.stdin.write(line + "\n");
  }

  async collect(count: number, timeoutMs = 30_000): Promise<Reply[]> {
    const deadline = Date.now() + timeoutMs;
    while (this.replies.length < count) {
      if (Date.now() > deadline) {
        throw new Error(`timed out with ${this.replies.length}/${count} replies`);
      }
      await new Promise<void>((resolve) => {
        this.waiters.push(resolve);
        setTimeout(resolve, 100);
      });
    }
    return this.replies.slice(0, count);
  }

  async close(): Promise<void> {
    this.child.stdin.end();
    if (this.child.exitCode === null) {
      await once(this.child, "exit");
    }
  }
}

let harness: AdapterHarness | undefined;

afterEach(async () => {
  if (harness) {
    await harness.close();
    harness = undefined;
  }
});

describe("serve", () => {
  it("answers a valid request with per-token nll", async () => {
    harness = new AdapterHarness(["--model", "stub:8"]);
    harness.send(JSON.stringify({ id: 7, text: "abcd" }));
    const [reply] = await harness.collect(1);
    expect(reply!.id).toBe(7);
    expect(reply!.nll).toHaveLength(5);
    expect(reply!.nll![0]).toBeCloseTo(Math.log(8), 12);
  });

  it("reports malformed lines with id -1 and keeps serving", async () => {
    harness = new AdapterHarness(["--model", "stub:8"]);
    harness.send("this is not json");
    harness.send(JSON.stringify({ id: 1, text: "ok" }));
    const replies = await harness.collect(2);
    expect(replies[0]).toEqual({ id: -1, error: "malformed JSON" });
    expect(replies[1]!.id).toBe(1);
    expect(replies[1]!.nll).toBeDefined();
  });

  it("errors per request for empty or missing text", async () => {
    harness = new AdapterHarness(["--model", "stub:8"]);
    harness.send(JSON.stringify({ id: 2, text: "" }));
    harness.send(JSON.stringify({ id: 3 }));
    harness.send(JSON.stringify({ id: 1.5, text: "x" }));
    const replies = await harness.collect(3);
    expect(replies[0]).toEqual({ id: 2, error: "empty text" });
    expect(replies[1]).toEqual({ id: 3, error: "missing text field" });
    expect(replies[2]!.id).toBe(-1);
  });

  it("answers 10k interleaved requests exactly once each", async () => {
    harness = new AdapterHarness(["--model", "stub:16"]);
    const ids = Array.from({ length: 10_000 }, (_, i) => i * 3 + 1);
    // deterministic shuffle so request order is not monotone
    let state = 1234567n;
    for (let i = ids.length - 1; i > 0; i--) {
      state = (state * 6364136223846793005n + 1442695040888963407n) & ((1n << 64n) - 1n);
      const j = Number(state % BigInt(i + 1));
      [ids[i], ids[j]] = [ids[j]!, ids[i]!];
    }
    for (const id of ids) {
      harness.send(JSON.stringify({ id, text: `sentence ${id}` }));
    }
    const replies = await harness.collect(10_000, 60_000);
    const seen = new Map<number, number>();
    for (const reply of replies) {
      expect(reply.error).toBeUndefined();
      seen.set(reply.id, (seen.get(reply.id) ?? 0) + 1);
    }
    expect(seen.size).toBe(10_000);
    for (const id of ids) {
      expect(seen.get(id)).toBe(1);
    }
  }, 120_000);

  it("exits nonzero when the model cannot be loaded", async () => {
    const child = spawn("node", [MAIN, "--model", "ngram:/does/not/exist.json"]);
    const [code] = (await once(child, "exit")) as [number];
    expect(code).not.toBe(0);
  });

  it("exits nonzero without a model argument", async () => {
    const child = spawn("node", [MAIN]);
    const [code] = (await once(child, "exit")) as [number];
    expect(code).not.toBe(0);
  });
});
