"""Perplexity scoring backends.

Two interchangeable backends implement ``score`` / ``score_batch``:

  * NGramModel - a built-in add-k smoothed character n-gram model, the
    self-contained desk-scale scorer.
  * ExternalScorer - a client for an external scorer child process speaking
    newline-delimited JSON on stdin/stdout (one object per line):

        request:  {"id": <uint64>, "text": "<sentence>"}
        response: {"id": <uint64>, "nll": [<float>, ...]}   per-token -ln p
        error:    {"id": <uint64>, "error": "<message>"}

    Responses may arrive out of order; ids pair them with requests.

Perplexity is exp(mean(nll)), always computed in log space. Supplied
probabilities are floored at PROB_FLOOR before the log so scores stay
finite and comparable.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Sequence

PROB_FLOOR = 1e-12
MAX_NLL = -math.log(PROB_FLOOR)

BOS = "<s>"
EOS = "</s>"


class ScoringError(RuntimeError):
    """A backend failed to produce a usable score."""

    def __init__(self, message: str, request_id: int | None = None, index: int | None = None):
        super().__init__(message)
        self.request_id = request_id
        self.index = index


class Scorer(Protocol):
    def score(self, text: str) -> float: ...

    def score_batch(self, texts: Sequence[str]) -> list[float]: ...


def perplexity(nll: Sequence[float]) -> float:
    """Perplexity of a token sequence given per-token -ln p values.

    Equals the geometric mean of the inverse probabilities but is computed
    as exp of the mean negative log so long sequences cannot underflow.
    """
    if len(nll) == 0:
        raise ValueError("empty token sequence")
    for value in nll:
        if not math.isfinite(value):
            raise ValueError(f"non-finite nll entry {value!r}")
        if value < 0:
            raise ValueError(f"negative nll entry {value!r} (implies p > 1)")
    return math.exp(math.fsum(nll) / len(nll))


@dataclass(frozen=True)
class NGramModel:
    """Add-k smoothed character n-gram language model.

    Sentences are padded with order-1 begin markers and scored including a
    single end-of-sentence token, so a sentence of n characters contributes
    n+1 probabilities. The event space of every conditional distribution is
    the training vocabulary plus the end token; characters outside it get
    the smoothing floor k / (total + k * (V + 1)).
    """

    order: int
    k: float
    vocab: frozenset[str]
    counts: Mapping[tuple[str, ...], Mapping[str, int]]
    totals: Mapping[tuple[str, ...], int]

    @classmethod
    def train(cls, corpus: Iterable[str], order: int = 3, k: float = 0.1) -> "NGramModel":
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if not k > 0:
            raise ValueError(f"smoothing constant must be > 0, got {k}")
        counts: dict[tuple[str, ...], dict[str, int]] = {}
        vocab: set[str] = set()
        seen_any = False
        for sentence in corpus:
            seen_any = True
            vocab.update(sentence)
            tokens = [BOS] * (order - 1) + list(sentence) + [EOS]
            for i in range(order - 1, len(tokens)):
                context = tuple(tokens[i - order + 1 : i])
                bucket = counts.setdefault(context, {})
                bucket[tokens[i]] = bucket.get(tokens[i], 0) + 1
        if not seen_any:
            raise ValueError("empty training corpus")
        totals = {context: sum(bucket.values()) for context, bucket in counts.items()}
        return cls(order=order, k=k, vocab=frozenset(vocab), counts=counts, totals=totals)

    def probability(self, context: tuple[str, ...], token: str) -> float:
        """Smoothed P(token | context)."""
        if len(context) != self.order - 1:
            raise ValueError(
                f"context length {len(context)} does not match order {self.order}"
            )
        bucket = self.counts.get(context)
        count = bucket.get(token, 0) if bucket else 0
        total = self.totals.get(context, 0)
        return (count + self.k) / (total + self.k * (len(self.vocab) + 1))

    def token_nll(self, text: str) -> list[float]:
        """Per-token -ln p for the characters of ``text`` plus the end token."""
        tokens = [BOS] * (self.order - 1) + list(text) + [EOS]
        out: list[float] = []
        for i in range(self.order - 1, len(tokens)):
            p = self.probability(tuple(tokens[i - self.order + 1 : i]), tokens[i])
            out.append(-math.log(max(p, PROB_FLOOR)))
        return out

    def score(self, text: str) -> float:
        return perplexity(self.token_nll(text))

    def score_batch(self, texts: Sequence[str]) -> list[float]:
        return [self.score(text) for text in texts]

    def save(self, path) -> None:
        contexts = [
            {"ctx": list(context), "next": sorted(bucket.items())}
            for context, bucket in sorted(self.counts.items())
        ]
        payload = {
            "format": "gec-ensemble-ngram",
            "version": 1,
            "order": self.order,
            "k": self.k,
            "vocab": sorted(self.vocab),
            "contexts": contexts,
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, ensure_ascii=False, indent=None, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "NGramModel":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        if payload.get("format") != "gec-ensemble-ngram":
            raise ValueError(f"{path}: not an n-gram model file")
        counts = {
            tuple(entry["ctx"]): {token: int(c) for token, c in entry["next"]}
            for entry in payload["contexts"]
        }
        totals = {context: sum(bucket.values()) for context, bucket in counts.items()}
        return cls(
            order=int(payload["order"]),
            k=float(payload["k"]),
            vocab=frozenset(payload["vocab"]),
            counts=counts,
            totals=totals,
        )


def train_ngram(corpus: Iterable[str], order: int = 3, k: float = 0.1) -> NGramModel:
    return NGramModel.train(corpus, order=order, k=k)


class ExternalScorer:
    """Client for an external scorer process speaking the line protocol.

    One instance owns one child process. Requests may be issued from
    several threads; writes are serialized and a reader thread dispatches
    replies by id, so out-of-order responses are fine.
    """

    def __init__(self, command: str | Sequence[str], timeout: float = 60.0):
        self._command = shlex.split(command) if isinstance(command, str) else list(command)
        self._timeout = timeout
        self._proc = subprocess.Popen(
            self._command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            encoding="utf-8",
            bufsize=1,
        )
        self._write_lock = threading.Lock()
        self._replies: dict[int, dict] = {}
        self._cv = threading.Condition()
        self._closed_reason: str | None = None
        self._next_id = 0
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        assert self._proc.stdout is not None
        reason = "scorer process closed its output"
        try:
            for line in self._proc.stdout:
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    reason = f"protocol violation: undecodable reply line {line[:80]!r}"
                    break
                if not isinstance(obj, dict) or not isinstance(obj.get("id"), int):
                    reason = f"protocol violation: reply without integer id: {line[:80]!r}"
                    break
                with self._cv:
                    self._replies[obj["id"]] = obj
                    self._cv.notify_all()
        except ValueError:
            reason = "scorer stream closed"
        with self._cv:
            self._closed_reason = reason
            self._cv.notify_all()

    def _await_reply(self, request_id: int) -> dict:
        with self._cv:
            ok = self._cv.wait_for(
                lambda: request_id in self._replies or self._closed_reason is not None,
                timeout=self._timeout,
            )
            if request_id in self._replies:
                return self._replies.pop(request_id)
            if not ok:
                raise ScoringError(
                    f"timeout waiting for scorer reply to request {request_id}",
                    request_id=request_id,
                )
            raise ScoringError(
                f"{self._closed_reason} (request {request_id})", request_id=request_id
            )

    def score(self, text: str) -> float:
        return self.score_batch([text])[0]

    def score_batch(self, texts: Sequence[str]) -> list[float]:
        if self._proc.poll() is not None and self._closed_reason is None:
            raise ScoringError("scorer process has exited")
        ids: list[int] = []
        lines: list[str] = []
        with self._write_lock:
            for text in texts:
                if text == "":
                    raise ScoringError("empty sentence", index=len(ids))
                request_id = self._next_id
                self._next_id += 1
                ids.append(request_id)
                lines.append(
                    json.dumps({"id": request_id, "text": text}, ensure_ascii=False)
                )
            if not ids:
                return []
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write("\n".join(lines) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ScoringError(f"scorer process is gone: {exc}") from exc

        results: list[float] = []
        for index, request_id in enumerate(ids):
            try:
                reply = self._await_reply(request_id)
            except ScoringError as exc:
                exc.index = index
                raise
            if "error" in reply:
                raise ScoringError(
                    f"scorer error: {reply['error']}", request_id=request_id, index=index
                )
            nll = reply.get("nll")
            if not isinstance(nll, list) or len(nll) < 1:
                raise ScoringError(
                    "protocol violation: reply without non-empty nll list",
                    request_id=request_id,
                    index=index,
                )
            cleaned: list[float] = []
            for value in nll:
                if not isinstance(value, (int, float)) or not math.isfinite(value):
                    raise ScoringError(
                        f"non-finite nll value {value!r}",
                        request_id=request_id,
                        index=index,
                    )
                if value < 0:
                    raise ScoringError(
                        f"negative nll value {value!r}",
                        request_id=request_id,
                        index=index,
                    )
                cleaned.append(min(float(value), MAX_NLL))
            results.append(perplexity(cleaned))
        return results

    def close(self) -> None:
        proc = self._proc
        if proc.stdin is not None:
            try:
                proc.stdin.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __enter__(self) -> "ExternalScorer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def score(backend: Scorer, text: str) -> float:
    """Score one sentence with whichever backend is given."""
    return backend.score(text)


def score_batch(backend: Scorer, texts: Sequence[str]) -> list[float]:
    """Score sentences in order; any member failure fails the whole batch."""
    return backend.score_batch(texts)
