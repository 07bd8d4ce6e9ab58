/**
 * Causal scoring backends.
 *
 * Every backend maps a sentence to per-token negative log probabilities
 * under a left-to-right factorization (each token conditioned only on what
 * precedes it, the first on a begin-of-sequence context), which is what the
 * ensemble side's perplexity definition expects.
 *
 * Backends:
 *   stub:V         uniform distribution over a vocabulary of size V; every
 *                  token costs ln(V), so downstream perplexity is exactly V.
 *                  This is the CI fallback when no real model is available.
 *   ngram:FILE     add-k smoothed character n-gram model in the JSON format
 *                  written by `gec-ensemble train-ngram`.
 */

import { readFileSync } from "node:fs";

const PROB_FLOOR = 1e-12;
const BOS = "<s>";
const EOS = "</s>";

export interface CausalScorer {
  /** Per-token -ln p for the text; throws on unscorable input. */
  nll(text: string): number[];
}

function tokens(text: string): string[] {
  // Unicode scalar values, matching the character unit used everywhere else
  return Array.from(text);
}

export class UniformScorer implements CausalScorer {
  constructor(readonly vocabSize: number) {
    if (!Number.isFinite(vocabSize) || vocabSize < 1) {
      throw new Error(`stub vocabulary size must be >= 1, got ${vocabSize}`);
    }
  }

  nll(text: string): number[] {
    const chars = tokens(text);
    if (chars.length === 0) {
      throw new Error("empty text");
    }
    const cost = Math.log(this.vocabSize);
    return new Array<number>(chars.length + 1).fill(cost);
  }
}

interface NgramFile {
  format: string;
  version: number;
  order: number;
  k: number;
  vocab: string[];
  contexts: { ctx: string[]; next: [string, number][] }[];
}

export class NgramScorer implements CausalScorer {
  private readonly order: number;
  private readonly k: number;
  private readonly eventSpace: number;
  private readonly counts = new Map<string, Map<string, number>>();
  private readonly totals = new Map<string, number>();

  constructor(path: string) {
    const payload = JSON.parse(readFileSync(path, "utf-8")) as NgramFile;
    if (payload.format !== "gec-ensemble-ngram") {
      throw new Error(`${path}: not an n-gram model file`);
    }
    this.order = payload.order;
    this.k = payload.k;
    this.eventSpace = payload.vocab.length + 1; // vocabulary plus end token
    for (const entry of payload.contexts) {
      const key = JSON.stringify(entry.ctx);
      const bucket = new Map<string, number>();
      let total = 0;
      for (const [token, count] of entry.next) {
        bucket.set(token, count);
        total += count;
      }
      this.counts.set(key, bucket);
      this.totals.set(key, total);
    }
  }

  private probability(context: string[], token: string): number {
    const key = JSON.stringify(context);
    const count = this.counts.get(key)?.get(token) ?? 0;
    const total = this.totals.get(key) ?? 0;
    return (count + this.k) / (total + this.k * this.eventSpace);
  }

  nll(text: string): number[] {
    if (text.length === 0) {
      throw new Error("empty text");
    }
    const padded = new Array<string>(this.order - 1)
      .fill(BOS)
      .concat(tokens(text), [EOS]);
    const out: number[] = [];
    for (let i = this.order - 1; i < padded.length; i++) {
      const context = padded.slice(i - this.order + 1, i);
      const p = this.probability(context, padded[i]!);
      out.push(-Math.log(Math.max(p, PROB_FLOOR)));
    }
    return out;
  }
}

export function loadScorer(spec: string): CausalScorer {
  if (spec.startsWith("stub:")) {
    const size = Number(spec.slice("stub:".length));
    return new UniformScorer(size);
  }
  if (spec.startsWith("ngram:")) {
    return new NgramScorer(spec.slice("ngram:".length));
  }
  throw new Error(`unknown model spec ${JSON.stringify(spec)} (use stub:V or ngram:FILE)`);
}
