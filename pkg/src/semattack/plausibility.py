"""Masked-token plausibility scoring.

A candidate replacement or insertion is only applied if it is plausible in
context. Three interchangeable backends implement the same ``score_query``
surface:

* ``BigramScorer`` - an add-k smoothed conditional bigram model fitted on a
  token stream; the offline default.
* ``StubScorer`` - fixed per-word probabilities, for tests.
* ``RemoteScorer`` - HTTP client for the masked-LM wire protocol
  (``POST /v1/score``), used when a scorer service is available.

Remote failures surface as exceptions, never as a silent zero score;
callers decide whether to fail open or closed.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Protocol

import httpx

from .errors import ScorerProtocolError, ScorerTransportError

MASK = "[MASK]"

# Masked-LM and bigram probabilities live on different scales, so each
# backend kind carries its own default acceptance threshold.
DEFAULT_MLM_THRESHOLD = 1e-3
DEFAULT_BIGRAM_THRESHOLD = 1e-4


@dataclass(frozen=True)
class MaskQuery:
    """One fill-in-the-blank question: which candidates fit at mask_index?"""

    tokens: tuple[str, ...]
    mask_index: int
    candidates: tuple[str, ...]

    def __post_init__(self):
        if not 0 <= self.mask_index < len(self.tokens):
            raise ValueError("mask_index out of range")
        if not self.candidates:
            raise ValueError("candidates must be non-empty")


class PlausibilityScorer(Protocol):
    def score_query(self, query: MaskQuery) -> list[float]: ...


class StubScorer:
    """Returns canned probabilities by candidate word (default for misses)."""

    def __init__(self, table: dict[str, float], default: float = 0.0):
        self.table = dict(table)
        self.default = default

    def score_query(self, query: MaskQuery) -> list[float]:
        return [float(self.table.get(c, self.default)) for c in query.candidates]


class BigramScorer:
    """Add-k smoothed p(word | previous word) over a fitted token stream.

    The mask at position 0 falls back to the smoothed unigram estimate.
    Scores over the full fitted vocabulary sum to 1 for any context.
    """

    def __init__(self, pair_counts: Counter, context_counts: Counter,
                 unigram_counts: Counter, total: int, k: float):
        self.pair_counts = pair_counts
        self.context_counts = context_counts
        self.unigram_counts = unigram_counts
        self.total = total
        self.k = k
        self.vocab_size = len(unigram_counts)

    def conditional(self, word: str, previous: str) -> float:
        num = self.pair_counts.get((previous, word), 0) + self.k
        den = self.context_counts.get(previous, 0) + self.k * self.vocab_size
        return num / den

    def unigram(self, word: str) -> float:
        num = self.unigram_counts.get(word, 0) + self.k
        den = self.total + self.k * self.vocab_size
        return num / den

    def score_query(self, query: MaskQuery) -> list[float]:
        if query.mask_index == 0:
            return [self.unigram(c) for c in query.candidates]
        previous = query.tokens[query.mask_index - 1]
        return [self.conditional(c, previous) for c in query.candidates]


def fit_bigram(stream: Iterable[str], k: float = 0.01) -> BigramScorer:
    """Fit the smoothed bigram backend on a token stream."""
    tokens = list(stream)
    if not tokens:
        raise ValueError("cannot fit a bigram model on an empty stream")
    unigrams = Counter(tokens)
    pairs = Counter(zip(tokens, tokens[1:]))
    contexts = Counter(tokens[:-1])
    return BigramScorer(pairs, contexts, unigrams, len(tokens), k)


class RemoteScorer:
    """Client for the masked-LM wire protocol.

    POST {base_url}/v1/score with {"tokens", "mask_index", "candidates"};
    a 200 must carry {"probabilities": [...]} aligned with the candidates.
    The underlying client is safe for concurrent in-flight requests, each
    with its own timeout.
    """

    def __init__(self, base_url: str, timeout: float = 10.0,
                 client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def score_query(self, query: MaskQuery) -> list[float]:
        body = {
            "tokens": list(query.tokens),
            "mask_index": query.mask_index,
            "candidates": list(query.candidates),
        }
        try:
            response = self._client.post(f"{self.base_url}/v1/score", json=body)
        except httpx.HTTPError as exc:
            raise ScorerTransportError(f"scorer unreachable: {exc}") from exc
        if response.status_code == 400:
            try:
                detail = response.json().get("error", "")
            except ValueError:
                detail = response.text
            raise ScorerProtocolError(f"scorer rejected request: {detail}")
        if response.status_code != 200:
            raise ScorerTransportError(
                f"scorer returned status {response.status_code}")
        try:
            payload = response.json()
            probs = payload["probabilities"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ScorerProtocolError(f"malformed scorer response: {exc}") from exc
        if (not isinstance(probs, list) or len(probs) != len(query.candidates)
                or not all(isinstance(p, (int, float)) for p in probs)):
            raise ScorerProtocolError("probabilities do not align with candidates")
        probs = [float(p) for p in probs]
        if any(p < 0.0 or p > 1.0 for p in probs):
            raise ScorerProtocolError("probabilities outside [0, 1]")
        return probs


def score(query: MaskQuery, scorer: PlausibilityScorer) -> list[float]:
    """Per-candidate probabilities, same order and length as the query."""
    probs = scorer.score_query(query)
    if len(probs) != len(query.candidates):
        raise ScorerProtocolError("backend returned a misaligned score vector")
    return probs


def filter_candidates(query: MaskQuery, threshold: float,
                      scorer: PlausibilityScorer) -> list[str]:
    """Candidates scoring strictly above threshold, original order kept."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be within [0, 1]")
    probs = score(query, scorer)
    return [c for c, p in zip(query.candidates, probs) if p > threshold]
