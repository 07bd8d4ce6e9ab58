import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { NgramScorer, UniformScorer, loadScorer } from "../src/model.js";

function ngramFixture(): string {
  // hand-built unigram model: counts a=2, b=1, eos=1 (total 4), k=0.5,
  // vocabulary {a, b} so the event space has 3 outcomes
  const payload = {
    format: "gec-ensemble-ngram",
    version: 1,
    order: 1,
    k: 0.5,
    vocab: ["a", "b"],
    contexts: [{ ctx: [], next: [["</s>", 1], ["a", 2], ["b", 1]] }],
  };
  const dir = mkdtempSync(join(tmpdir(), "ngram-"));
  const path = join(dir, "model.json");
  writeFileSync(path, JSON.stringify(payload));
  return path;
}

describe("UniformScorer", () => {
  it("charges ln(V) per character plus one end token", () => {
    const scorer = new UniformScorer(8);
    const nll = scorer.nll("abc");
    expect(nll).toHaveLength(4);
    for (const value of nll) {
      expect(value).toBeCloseTo(Math.log(8), 12);
    }
  });

  it("counts unicode scalar values, not UTF-16 units", () => {
    const scorer = new UniformScorer(4);
    expect(scorer.nll("🎈我")).toHaveLength(3);
  });

  it("rejects empty text", () => {
    expect(() => new UniformScorer(4).nll("")).toThrow("empty text");
  });

  it("rejects a bad vocabulary size", () => {
    expect(() => new UniformScorer(0)).toThrow();
    expect(() => loadScorer("stub:nope")).toThrow();
  });
});

describe("NgramScorer", () => {
  it("reproduces hand-computed add-k probabilities", () => {
    const scorer = new NgramScorer(ngramFixture());
    const nll = scorer.nll("ab");
    // p(a) = (2 + .5)/(4 + .5*3), p(b) = p(eos) = (1 + .5)/(4 + .5*3)
    expect(nll[0]).toBeCloseTo(-Math.log(2.5 / 5.5), 12);
    expect(nll[1]).toBeCloseTo(-Math.log(1.5 / 5.5), 12);
    expect(nll[2]).toBeCloseTo(-Math.log(1.5 / 5.5), 12);
  });

  it("floors unseen characters instead of diverging", () => {
    const scorer = new NgramScorer(ngramFixture());
    const nll = scorer.nll("zz");
    expect(nll[0]).toBeCloseTo(-Math.log(0.5 / 5.5), 12);
    for (const value of nll) {
      expect(Number.isFinite(value)).toBe(true);
    }
  });

  it("rejects empty text", () => {
    expect(() => new NgramScorer(ngramFixture()).nll("")).toThrow("empty text");
  });

  it("rejects files in another format", () => {
    const dir = mkdtempSync(join(tmpdir(), "ngram-"));
    const path = join(dir, "bogus.json");
    writeFileSync(path, JSON.stringify({ format: "something-else" }));
    expect(() => new NgramScorer(path)).toThrow("not an n-gram model file");
  });
});

describe("loadScorer", () => {
  it("dispatches on the spec prefix", () => {
    expect(loadScorer("stub:5")).toBeInstanceOf(UniformScorer);
    expect(loadScorer(`ngram:${ngramFixture()}`)).toBeInstanceOf(NgramScorer);
    expect(() => loadScorer("magic:7")).toThrow("unknown model spec");
  });
});
