"""Replacement and insertion attack strategies.

Candidate pipeline per target slot, in order: universal-trigger words for
the slot tag, polarity equality with the target, cosine similarity >= t_emb
in the static embedding store, sort by decreasing cosine, masked-LM
plausibility gate, then flip testing against the victim model. Candidates
always come out of the TriggerSet; the embedding store used for similarity
is the static one, not the model's fine-tuned rows.

Per-document attacks are independent; a corpus run can fan out over a
thread pool and still emits outcomes in stable document order.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace as dc_replace
from enum import Enum

from .classifier import Classifier, logistic_loss
from .errors import AttackError, ScorerError
from .lexicon import EmbeddingStore, PolarityLexicon, cosine
from .plausibility import MASK, MaskQuery, PlausibilityScorer, filter_candidates
from .textcore import (
    PairPattern, PosTag, ReplaceSlot, TagLexicon, TaggedDocument,
    extract_pairs, find_singletons, insert_token, replace_token,
)
from .triggers import TriggerSet


class Strategy(Enum):
    REPLACEMENT = "REPLACEMENT"
    INSERTION = "INSERTION"


class Outcome(Enum):
    FLIPPED = "FLIPPED"
    DEGRADED = "DEGRADED"
    UNCHANGED = "UNCHANGED"
    NO_CANDIDATES = "NO_CANDIDATES"


@dataclass(frozen=True)
class InsertionRule:
    """Insert an ``insert_tag`` trigger next to each ``anchor_tag`` token."""

    anchor_tag: PosTag
    insert_tag: PosTag
    insert_before: bool


# The six replacement rules plus the two insertion rules; the subscript in a
# name marks which slot gets rewritten (adj1-nn rewrites the adjective).
PATTERNS: dict[str, PairPattern | InsertionRule] = {
    "adv-adj1": PairPattern(PosTag.ADV, PosTag.ADJ, ReplaceSlot.RIGHT),
    "adv1-adj": PairPattern(PosTag.ADV, PosTag.ADJ, ReplaceSlot.LEFT),
    "adj1-nn": PairPattern(PosTag.ADJ, PosTag.NOUN, ReplaceSlot.LEFT),
    "adj-nn1": PairPattern(PosTag.ADJ, PosTag.NOUN, ReplaceSlot.RIGHT),
    "vb1-nn": PairPattern(PosTag.VERB, PosTag.NOUN, ReplaceSlot.LEFT),
    "vb-nn1": PairPattern(PosTag.VERB, PosTag.NOUN, ReplaceSlot.RIGHT),
    "adv-before-adj": InsertionRule(PosTag.ADJ, PosTag.ADV, insert_before=True),
    "adj-after-adv": InsertionRule(PosTag.ADV, PosTag.ADJ, insert_before=False),
}


def pattern_name(pattern) -> str:
    for name, value in PATTERNS.items():
        if value == pattern:
            return name
    raise KeyError(f"unregistered pattern {pattern!r}")


@dataclass(frozen=True)
class AttackConfig:
    pattern: PairPattern | InsertionRule = PATTERNS["adj1-nn"]
    t_emb: float = 0.45
    t_mlm: float = 1e-3
    flip_threshold: float = 0.5
    mlm_filter_enabled: bool = True
    polarity_filter_enabled: bool = True
    max_edits_per_doc: int = 1
    stop_on_first_flip: bool = True
    mlm_fail_open: bool = False

    def __post_init__(self):
        if not -1.0 <= self.t_emb <= 1.0:
            raise ValueError("t_emb must be in [-1, 1]")
        if not 0.0 <= self.t_mlm <= 1.0:
            raise ValueError("t_mlm must be in [0, 1]")
        if not 0.0 < self.flip_threshold < 1.0:
            raise ValueError("flip_threshold must be in (0, 1)")
        if self.max_edits_per_doc < 1:
            raise ValueError("max_edits_per_doc must be >= 1")

    @property
    def strategy(self) -> Strategy:
        return (Strategy.INSERTION if isinstance(self.pattern, InsertionRule)
                else Strategy.REPLACEMENT)


@dataclass(frozen=True)
class Edit:
    kind: str  # "REPLACE" | "INSERT"
    position: int  # token index in the edited document
    original: str | None
    replacement: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "position": self.position,
                "original": self.original, "replacement": self.replacement}

    @classmethod
    def from_dict(cls, data: dict) -> "Edit":
        return cls(kind=data["kind"], position=data["position"],
                   original=data.get("original"), replacement=data["replacement"])


@dataclass(frozen=True)
class AttackOutcome:
    doc_id: str
    status: Outcome
    edits: tuple[Edit, ...]
    prob_before: float
    prob_after: float
    candidates_considered: int

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "status": self.status.value,
            "edits": [e.to_dict() for e in self.edits],
            "prob_before": self.prob_before,
            "prob_after": self.prob_after,
            "candidates_considered": self.candidates_considered,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AttackOutcome":
        return cls(doc_id=data["doc_id"], status=Outcome(data["status"]),
                   edits=tuple(Edit.from_dict(e) for e in data["edits"]),
                   prob_before=data["prob_before"], prob_after=data["prob_after"],
                   candidates_considered=data["candidates_considered"])


@dataclass(frozen=True)
class AttackReport:
    strategy: Strategy
    pattern: str
    config: dict
    outcomes: tuple[AttackOutcome, ...]
    errors: tuple[tuple[str, str], ...]
    accuracy_before: float
    accuracy_after: float

    def count(self, status: Outcome) -> int:
        return sum(1 for o in self.outcomes if o.status is status)

    def summary_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "pattern": self.pattern,
            "config": self.config,
            "documents": len(self.outcomes),
            "accuracy_before": self.accuracy_before,
            "accuracy_after": self.accuracy_after,
            "flips": self.count(Outcome.FLIPPED),
            "degraded": self.count(Outcome.DEGRADED),
            "unchanged": self.count(Outcome.UNCHANGED),
            "no_candidates": self.count(Outcome.NO_CANDIDATES),
            "errors": [{"doc_id": d, "error": m} for d, m in self.errors],
        }


def save_report(report: AttackReport, jsonl_path, summary_path) -> None:
    with open(jsonl_path, "w", encoding="utf-8") as fh:
        for outcome in report.outcomes:
            fh.write(json.dumps(outcome.to_dict(), sort_keys=True) + "\n")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(report.summary_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_outcomes(jsonl_path) -> list[AttackOutcome]:
    out = []
    with open(jsonl_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(AttackOutcome.from_dict(json.loads(line)))
    return out


def select_candidates(target_word: str, target_tag: PosTag, triggers: TriggerSet,
                      store: EmbeddingStore, polarity_lex: PolarityLexicon,
                      config: AttackConfig) -> list[str]:
    """Trigger words for the tag that survive polarity + cosine filters.

    Ordered by decreasing cosine similarity to the target (ties broken
    lexicographically). Empty when the target has no embedding: such slots
    are skipped rather than guessed at.
    """
    if target_word not in store:
        return []
    target_polarity = polarity_lex.polarity(target_word)
    scored = []
    for word in triggers.words_for_tag(target_tag):
        if word == target_word or word not in store:
            continue
        if (config.polarity_filter_enabled
                and polarity_lex.polarity(word) is not target_polarity):
            continue
        sim = cosine(store.vector(word), store.vector(target_word))
        if sim < config.t_emb:
            continue
        scored.append((word, sim))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [word for word, _ in scored]


def _replacement_query(doc: TaggedDocument, slot: int, candidates: list[str]) -> MaskQuery:
    words = doc.words()
    words[slot] = MASK
    return MaskQuery(tokens=tuple(words), mask_index=slot, candidates=tuple(candidates))


def _insertion_query(doc: TaggedDocument, position: int, candidates: list[str]) -> MaskQuery:
    words = doc.words()
    words.insert(position, MASK)
    return MaskQuery(tokens=tuple(words), mask_index=position, candidates=tuple(candidates))


def _apply_mlm_gate(query: MaskQuery, scorer: PlausibilityScorer | None,
                    config: AttackConfig) -> list[str]:
    if not config.mlm_filter_enabled:
        return list(query.candidates)
    if scorer is None:
        raise AttackError("MLM filter enabled but no scorer provided")
    try:
        return filter_candidates(query, config.t_mlm, scorer)
    except ScorerError as exc:
        if config.mlm_fail_open:
            return list(query.candidates)
        raise AttackError(f"plausibility scorer failed: {exc}") from exc


@dataclass(frozen=True)
class _Slot:
    """One editable site: where to edit, whose word constrains candidates."""

    position: int            # token index edited (replacement) or insertion point
    target_word: str         # word the semantic filters key on
    candidate_tag: PosTag    # tag of the trigger list candidates come from
    insert: bool


def _slots_for(doc: TaggedDocument, config: AttackConfig) -> list[_Slot]:
    pattern = config.pattern
    if isinstance(pattern, PairPattern):
        slots = []
        for occ in extract_pairs(doc, pattern):
            idx = occ.slot_index
            slots.append(_Slot(position=idx, target_word=doc.words()[idx],
                               candidate_tag=pattern.slot_tag, insert=False))
        return slots
    slots = []
    for idx in find_singletons(doc, pattern.anchor_tag):
        position = idx if pattern.insert_before else idx + 1
        slots.append(_Slot(position=position, target_word=doc.words()[idx],
                           candidate_tag=pattern.insert_tag, insert=True))
    return slots


def _edit_doc(doc: TaggedDocument, slot: _Slot, word: str,
              lexicon: TagLexicon) -> tuple[TaggedDocument, Edit]:
    if slot.insert:
        edited = insert_token(doc, slot.position, word, lexicon)
        return edited, Edit("INSERT", slot.position, None, word)
    edited = replace_token(doc, slot.position, word, lexicon)
    return edited, Edit("REPLACE", slot.position, slot.target_word, word)


def _attack_document(model: Classifier, doc: TaggedDocument, triggers: TriggerSet,
                     store: EmbeddingStore, polarity_lex: PolarityLexicon,
                     tag_lexicon: TagLexicon, scorer: PlausibilityScorer | None,
                     config: AttackConfig) -> AttackOutcome:
    doc_id = doc.doc_id if doc.doc_id is not None else ""
    prob_before = model.predict_proba(doc)
    label_before = prob_before >= config.flip_threshold
    y = doc.label
    loss_before = logistic_loss(y, prob_before) if y is not None else None

    slots = _slots_for(doc, config)
    filtered: list[tuple[_Slot, list[str]]] = []
    for slot in slots:
        cands = select_candidates(slot.target_word, slot.candidate_tag, triggers,
                                  store, polarity_lex, config)
        if not cands:
            continue
        query = (_insertion_query(doc, slot.position, cands) if slot.insert
                 else _replacement_query(doc, slot.position, cands))
        cands = _apply_mlm_gate(query, scorer, config)
        if cands:
            filtered.append((slot, cands))

    if not filtered:
        return AttackOutcome(doc_id, Outcome.NO_CANDIDATES, (), prob_before,
                             prob_before, 0)

    considered = 0
    current = doc
    applied: list[Edit] = []
    prob_current = prob_before
    # pending sites, re-indexed into the current document as edits accumulate
    pending = [(slot, cands) for slot, cands in filtered]

    for _round in range(config.max_edits_per_doc):
        flip_found = None
        best_degrade = None
        for entry, (slot, cands) in enumerate(pending):
            for word in cands:
                edited, edit = _edit_doc(current, slot, word, tag_lexicon)
                prob = model.predict_proba(edited)
                considered += 1
                if (prob >= config.flip_threshold) != label_before:
                    flip_found = (edit, prob)
                    break
                if y is not None:
                    loss = logistic_loss(y, prob)
                    key = (-loss, slot.position, word)
                    if best_degrade is None or key < best_degrade[0]:
                        best_degrade = (key, entry, edited, edit, prob, loss)
            if flip_found and config.stop_on_first_flip:
                break
        if flip_found:
            edit, prob = flip_found
            return AttackOutcome(doc_id, Outcome.FLIPPED, tuple(applied) + (edit,),
                                 prob_before, prob, considered)
        if best_degrade is None:
            break
        _, entry, edited, edit, prob, loss = best_degrade
        if loss <= logistic_loss(y, prob_current):
            break  # nothing strictly increases the loss anymore
        current, prob_current = edited, prob
        applied.append(edit)
        shift = 1 if edit.kind == "INSERT" else 0
        rebased = []
        for i, (slot, cands) in enumerate(pending):
            if i == entry:
                continue  # one edit per site
            if shift and slot.position >= edit.position:
                slot = dc_replace(slot, position=slot.position + shift)
            rebased.append((slot, cands))
        pending = rebased

    if applied:
        return AttackOutcome(doc_id, Outcome.DEGRADED, tuple(applied), prob_before,
                             prob_current, considered)
    return AttackOutcome(doc_id, Outcome.UNCHANGED, (), prob_before, prob_before,
                         considered)


def attack_corpus(model: Classifier, docs: list[TaggedDocument], triggers: TriggerSet,
                  store: EmbeddingStore, polarity_lex: PolarityLexicon,
                  tag_lexicon: TagLexicon, scorer: PlausibilityScorer | None,
                  config: AttackConfig, jobs: int | None = None) -> AttackReport:
    """Attack every document; per-doc failures land in the error section.

    Accuracy before/after is measured against document labels at the 0.5
    decision threshold; errored documents count as unattacked.
    """
    def attempt(doc: TaggedDocument):
        try:
            return _attack_document(model, doc, triggers, store, polarity_lex,
                                    tag_lexicon, scorer, config), None
        except (AttackError, ScorerError) as exc:
            doc_id = doc.doc_id if doc.doc_id is not None else ""
            fallback = AttackOutcome(doc_id, Outcome.NO_CANDIDATES, (),
                                     model.predict_proba(doc),
                                     model.predict_proba(doc), 0)
            return fallback, (doc_id, str(exc))

    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(attempt, docs))
    else:
        results = [attempt(doc) for doc in docs]

    outcomes = tuple(outcome for outcome, _ in results)
    errors = tuple(err for _, err in results if err is not None)

    correct_before = correct_after = 0
    for doc, outcome in zip(docs, outcomes):
        truth = doc.label == 1
        correct_before += int((outcome.prob_before >= 0.5) == truth)
        correct_after += int((outcome.prob_after >= 0.5) == truth)
    n = max(len(docs), 1)

    return AttackReport(
        strategy=config.strategy,
        pattern=pattern_name(config.pattern),
        config=config_dict(config),
        outcomes=outcomes,
        errors=errors,
        accuracy_before=correct_before / n,
        accuracy_after=correct_after / n,
    )


def config_dict(config: AttackConfig) -> dict:
    return {
        "pattern": pattern_name(config.pattern),
        "t_emb": config.t_emb,
        "t_mlm": config.t_mlm,
        "flip_threshold": config.flip_threshold,
        "mlm_filter_enabled": config.mlm_filter_enabled,
        "polarity_filter_enabled": config.polarity_filter_enabled,
        "max_edits_per_doc": config.max_edits_per_doc,
        "stop_on_first_flip": config.stop_on_first_flip,
        "mlm_fail_open": config.mlm_fail_open,
    }


def apply_outcome_edits(doc: TaggedDocument, outcome: AttackOutcome,
                        tag_lexicon: TagLexicon) -> TaggedDocument:
    """Re-materialize the perturbed document from its recorded edits."""
    edited = doc
    for edit in outcome.edits:
        if edit.kind == "REPLACE":
            edited = replace_token(edited, edit.position, edit.replacement, tag_lexicon)
        else:
            edited = insert_token(edited, edit.position, edit.replacement, tag_lexicon)
    return edited


@dataclass(frozen=True)
class AuditResult:
    checked: int
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def audit_report(report: AttackReport, model: Classifier,
                 docs: list[TaggedDocument], store: EmbeddingStore,
                 polarity_lex: PolarityLexicon, tag_lexicon: TagLexicon,
                 scorer: PlausibilityScorer | None) -> AuditResult:
    """Re-verify every emitted adversarial example against the guards.

    Checks edit locality, POS preservation on replacements, polarity
    equality and cosine >= t_emb (when those filters were on), the MLM
    threshold (when on), and that the recorded probabilities and status
    reproduce exactly.
    """
    config = report.config
    pattern = PATTERNS[config["pattern"]]
    by_id = {doc.doc_id: doc for doc in docs}
    failures: list[str] = []
    checked = 0

    def fail(doc_id: str, message: str) -> None:
        failures.append(f"doc {doc_id}: {message}")

    for outcome in report.outcomes:
        if not outcome.edits:
            if outcome.status in (Outcome.FLIPPED, Outcome.DEGRADED):
                fail(outcome.doc_id, f"{outcome.status.value} without edits")
            continue
        checked += 1
        doc = by_id[outcome.doc_id]
        edited = apply_outcome_edits(doc, outcome, tag_lexicon)

        original_words = doc.words()
        edited_words = edited.words()
        inserted = [e.position for e in outcome.edits if e.kind == "INSERT"]
        restored = [w for i, w in enumerate(edited_words) if i not in inserted]
        replaced = {e.position for e in outcome.edits if e.kind == "REPLACE"}
        shift = {}
        offset = 0
        for i in range(len(edited_words)):
            if i in inserted:
                offset += 1
                continue
            shift[i] = i - offset
        for i, word in enumerate(edited_words):
            if i in inserted:
                continue
            j = shift[i]
            if i in replaced:
                continue
            if original_words[j] != word:
                fail(outcome.doc_id, f"unexpected change at position {j}")

        for edit in outcome.edits:
            if edit.kind == "REPLACE":
                if edit.original != original_words[edit.position]:
                    fail(outcome.doc_id, "recorded original does not match document")
                if edited.tag_at(edit.position) is not doc.tag_at(edit.position):
                    fail(outcome.doc_id, "replacement changed the POS tag")
                anchor_word = edit.original
            else:
                if isinstance(pattern, InsertionRule) and pattern.insert_before:
                    anchor_word = edited_words[edit.position + 1]
                else:
                    anchor_word = edited_words[edit.position - 1]
            if config["polarity_filter_enabled"]:
                if (polarity_lex.polarity(edit.replacement)
                        is not polarity_lex.polarity(anchor_word)):
                    fail(outcome.doc_id, "polarity filter violated")
            if anchor_word in store and edit.replacement in store:
                sim = cosine(store.vector(edit.replacement), store.vector(anchor_word))
                if sim < config["t_emb"]:
                    fail(outcome.doc_id, f"cosine {sim:.3f} below t_emb")
            else:
                fail(outcome.doc_id, "edit words missing from embedding store")
            if config["mlm_filter_enabled"] and scorer is not None:
                if edit.kind == "REPLACE":
                    query = _replacement_query(doc, edit.position, [edit.replacement])
                else:
                    query = _insertion_query(doc, edit.position, [edit.replacement])
                if not filter_candidates(query, config["t_mlm"], scorer):
                    fail(outcome.doc_id, "MLM threshold violated")

        prob_after = model.predict_proba(edited)
        if prob_after != outcome.prob_after:
            fail(outcome.doc_id, "prob_after does not reproduce")
        flip = ((outcome.prob_before >= config["flip_threshold"])
                != (outcome.prob_after >= config["flip_threshold"]))
        if flip != (outcome.status is Outcome.FLIPPED):
            fail(outcome.doc_id, "status inconsistent with probabilities")

    return AuditResult(checked=checked, failures=tuple(failures))
