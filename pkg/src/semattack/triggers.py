"""Universal trigger search constrained by POS-pattern rules.

The search keeps a short trigger sequence attached to every document in a
sample and greedily swaps one slot at a time: a first-order objective
(e(candidate) - e(current)) . grad ranks the vocabulary, the top ``beam``
candidates are re-scored with the true aggregate loss, and the best
strictly-improving swap is accepted. The run stops at ``max_iters`` or when
no swap improves the aggregate loss.

First-order scores only rank; acceptance always re-evaluates the true
loss, because the linear estimate can be wrong far from the current
embedding.
"""

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .classifier import Classifier, clamp_probability, logistic_loss
from .lexicon import EmbeddingStore
from .textcore import PosTag, TagLexicon, TaggedDocument

INIT_WORDS = ("the", "a", "an")


class Placement(Enum):
    FRONT = "FRONT"
    END = "END"


@dataclass(frozen=True)
class TriggerRule:
    """Ordered tag pattern the trigger sequence must satisfy."""

    pattern: tuple[PosTag, ...]

    def __post_init__(self):
        if len(self.pattern) < 1:
            raise ValueError("trigger rule needs at least one tag")

    def __len__(self) -> int:
        return len(self.pattern)


@dataclass(frozen=True)
class TriggerSequence:
    words: tuple[str, ...]
    rule: TriggerRule

    def __post_init__(self):
        if len(self.words) != len(self.rule):
            raise ValueError("trigger length must match its rule")


@dataclass(frozen=True)
class TriggerSet:
    """Per-tag ranked trigger words with their aggregate-loss scores."""

    by_tag: dict[PosTag, tuple[tuple[str, float], ...]]

    def for_tag(self, tag: PosTag) -> list[tuple[str, float]]:
        return list(self.by_tag.get(tag, ()))

    def words_for_tag(self, tag: PosTag) -> list[str]:
        return [w for w, _ in self.by_tag.get(tag, ())]

    def to_json_dict(self) -> dict:
        return {tag.value: [{"word": w, "score": s} for w, s in entries]
                for tag, entries in sorted(self.by_tag.items(), key=lambda kv: kv[0].value)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "TriggerSet":
        by_tag = {}
        for tag_name, entries in data.items():
            by_tag[PosTag(tag_name)] = tuple(
                (e["word"], float(e["score"])) for e in entries)
        return cls(by_tag)


def save_trigger_set(triggers: TriggerSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(triggers.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_trigger_set(path) -> TriggerSet:
    with open(path, encoding="utf-8") as fh:
        return TriggerSet.from_json_dict(json.load(fh))


def _attach(trigger_words: tuple[str, ...], doc_ids: np.ndarray,
            model: Classifier, placement: Placement) -> np.ndarray:
    trig = model.encode_words(list(trigger_words)) if trigger_words else np.empty(0, dtype=np.int64)
    if not len(trigger_words):
        return doc_ids
    joined = (np.concatenate([trig, doc_ids]) if placement is Placement.FRONT
              else np.concatenate([doc_ids, trig]))
    return joined[: model.config.max_sequence_length]


def aggregate_loss(model: Classifier, sample: list[TaggedDocument],
                   trigger: TriggerSequence | None,
                   placement: Placement = Placement.FRONT) -> float:
    """Mean logistic loss over the sample with the trigger attached."""
    if not sample:
        raise ValueError("sample must be non-empty")
    words = trigger.words if trigger is not None else ()
    idx_list = [_attach(words, model.encode(doc), model, placement) for doc in sample]
    ys = np.asarray([doc.label for doc in sample], dtype=np.float64)
    probs = model.predict_from_ids(idx_list)
    return logistic_loss(ys, probs)


def select_trigger_token(grad: np.ndarray, current: str, store: EmbeddingStore,
                         required_tag: PosTag,
                         tag_lexicon: TagLexicon) -> list[tuple[str, float]]:
    """Rank vocabulary words by the first-order loss-increase objective.

    Scores (e(word) - e(current)) . grad for every store word whose lexicon
    entry is ``required_tag`` (the current word included, scoring zero) and
    returns them by descending score, ties lexicographic.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != (store.dimension,):
        raise ValueError(
            f"gradient dimension {grad.shape} does not match store ({store.dimension})")
    words = [w for w in store.words if tag_lexicon.lookup(w) is required_tag]
    if not words:
        return []
    base = float(store.vector(current) @ grad) if current in store else 0.0
    scored = [(w, float(store.vector(w) @ grad) - base) for w in words]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored


def _initial_sequence(rule: TriggerRule, pools: list[list[str]]) -> tuple[str, ...]:
    """Step-one initialization: filler words, coerced to tag-valid ones.

    Each slot starts as the/a/an (cycled); a slot whose default violates the
    rule takes the first tag-valid candidate word instead.
    """
    words = []
    for k in range(len(rule)):
        default = INIT_WORDS[k % len(INIT_WORDS)]
        pool = pools[k]
        words.append(default if default in pool else pool[0])
    return tuple(words)


def find_universal_triggers(model: Classifier, sample: list[TaggedDocument],
                            rule: TriggerRule, tag_lexicon: TagLexicon,
                            store: EmbeddingStore | None = None,
                            max_iters: int = 10, beam: int = 20,
                            placement: Placement = Placement.FRONT) -> TriggerSet:
    """Greedy rule-constrained trigger search over the model vocabulary.

    ``store`` supplies candidate words and the vectors used by the
    first-order ranking; it defaults to the model's own trained embedding
    rows, which is the space the gradient lives in. Candidates must also be
    in the model vocabulary. Returns per-tag ranked words from every
    accepted sequence (the initialization included).
    """
    if not sample:
        raise ValueError("sample must be non-empty")
    if max_iters < 0 or beam < 1:
        raise ValueError("max_iters must be >= 0 and beam >= 1")
    if store is None:
        store = model.embedding_store()

    in_model = set(model.vocabulary)
    pools = []
    for tag in rule.pattern:
        pool = [w for w in sorted(store.words)
                if tag_lexicon.lookup(w) is tag and w in in_model]
        if not pool:
            raise ValueError(f"no vocabulary word carries tag {tag.value}")
        pools.append(pool)

    seq = _initial_sequence(rule, pools)
    score = aggregate_loss(model, sample, TriggerSequence(seq, rule), placement)
    accepted: list[tuple[tuple[str, ...], float]] = [(seq, score)]

    doc_ids = [model.encode(doc) for doc in sample]
    ys = np.asarray([doc.label for doc in sample], dtype=np.float64)
    length = len(rule)

    for _ in range(max_iters):
        attached = [_attach(seq, ids, model, placement) for ids in doc_ids]
        scale = np.full(len(sample), 1.0 / len(sample))
        dX, lengths = model.input_gradients(attached, ys, scale=scale)
        best: tuple[float, int, str] | None = None
        for slot in range(length):
            if placement is Placement.FRONT:
                grad = dX[:, slot, :].sum(axis=0)
            else:
                # Trigger tokens sit at the end of each row; a document whose
                # END trigger was truncated away contributes no gradient.
                grad = np.zeros(dX.shape[2])
                for i, ids in enumerate(doc_ids):
                    if len(ids) + length <= model.config.max_sequence_length:
                        grad += dX[i, lengths[i] - length + slot, :]
            ranked = select_trigger_token(grad, seq[slot], store,
                                          rule.pattern[slot], tag_lexicon)
            candidates = [w for w, _ in ranked if w in in_model][:beam]
            for word in candidates:
                if word == seq[slot]:
                    continue
                swapped = seq[:slot] + (word,) + seq[slot + 1:]
                s = aggregate_loss(model, sample, TriggerSequence(swapped, rule), placement)
                if s <= score:
                    continue
                if best is None or s > best[0] or (s == best[0] and (slot, word) < best[1:]):
                    best = (s, slot, word)
        if best is None:
            break
        score, slot, word = best
        seq = seq[:slot] + (word,) + seq[slot + 1:]
        accepted.append((seq, score))

    by_tag: dict[PosTag, dict[str, float]] = {}
    for words, s in accepted:
        for k, word in enumerate(words):
            tag = rule.pattern[k]
            bucket = by_tag.setdefault(tag, {})
            if word not in bucket or s > bucket[word]:
                bucket[word] = s
    ranked_by_tag = {
        tag: tuple(sorted(bucket.items(), key=lambda kv: (-kv[1], kv[0])))
        for tag, bucket in by_tag.items()
    }
    return TriggerSet(ranked_by_tag)
