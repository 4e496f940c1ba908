"""Black-box substitution rules mined from successful replacement attacks.

A rule generalizes a flip over the partner slot: a flip of
(good, thing) -> (fantastic, thing) under the adjective-noun pattern yields
"good -> fantastic for any noun partner". Rules apply without gradients,
embeddings, or plausibility scoring; cheap application is the point.
"""

import json
from dataclasses import dataclass

from .attack import PATTERNS, AttackReport, Outcome, pattern_name
from .classifier import Classifier
from .textcore import (
    PairPattern, PosTag, ReplaceSlot, TagLexicon, TaggedDocument, extract_pairs,
    replace_token,
)


@dataclass(frozen=True)
class Rule:
    pattern: PairPattern
    from_word: str
    to_word: str
    support: int

    def __post_init__(self):
        if self.from_word == self.to_word:
            raise ValueError("a rule must change the word")

    def to_dict(self) -> dict:
        return {
            "pattern": {
                "left": self.pattern.left_tag.value,
                "right": self.pattern.right_tag.value,
                "slot": self.pattern.replace_slot.value,
            },
            "from": self.from_word,
            "to": self.to_word,
            "support": self.support,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Rule":
        pat = data["pattern"]
        pattern = PairPattern(PosTag(pat["left"]), PosTag(pat["right"]),
                              ReplaceSlot(pat["slot"]))
        return cls(pattern=pattern, from_word=data["from"], to_word=data["to"],
                   support=data["support"])


@dataclass(frozen=True)
class RuleSet:
    """Rules ordered by descending support, ties lexicographic by from_word."""

    rules: tuple[Rule, ...]

    def __post_init__(self):
        triples = [(r.pattern, r.from_word, r.to_word) for r in self.rules]
        if len(set(triples)) != len(triples):
            raise ValueError("duplicate rules in rule set")

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


def _ordered(rules: list[Rule]) -> tuple[Rule, ...]:
    return tuple(sorted(rules, key=lambda r: (-r.support, r.from_word, r.to_word)))


def extract_rules(report: AttackReport, min_support: int = 1) -> RuleSet:
    """Mine (from_word -> to_word) rules from a replacement run's flips."""
    pattern = PATTERNS[report.pattern]
    if not isinstance(pattern, PairPattern):
        raise ValueError("rules are mined from REPLACEMENT reports only")
    counts: dict[tuple[str, str], int] = {}
    for outcome in report.outcomes:
        if outcome.status is not Outcome.FLIPPED:
            continue
        for edit in outcome.edits:
            if edit.kind != "REPLACE" or edit.original is None:
                continue
            key = (edit.original, edit.replacement)
            counts[key] = counts.get(key, 0) + 1
    rules = [Rule(pattern=pattern, from_word=f, to_word=t, support=c)
             for (f, t), c in counts.items() if c >= min_support]
    return RuleSet(_ordered(rules))


def save_rules(rules: RuleSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in rules], fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_rules(path) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return RuleSet(tuple(Rule.from_dict(entry) for entry in data))


def _matches(doc: TaggedDocument, rule: Rule) -> list[int]:
    """Slot indices of pattern occurrences whose slot word is from_word."""
    out = []
    for occ in extract_pairs(doc, rule.pattern):
        idx = occ.slot_index
        if doc.words()[idx] == rule.from_word:
            out.append(idx)
    return out


def apply_rule(doc: TaggedDocument, rule: Rule,
               lexicon: TagLexicon) -> tuple[TaggedDocument, list[tuple[int, str, str]]]:
    """Rewrite every matching slot (not just the first); returns edits."""
    edits = []
    current = doc
    for idx in _matches(doc, rule):
        current = replace_token(current, idx, rule.to_word, lexicon)
        edits.append((idx, rule.from_word, rule.to_word))
    return current, edits


def apply_rules_budgeted(doc: TaggedDocument, rules: RuleSet, budget: int,
                         lexicon: TagLexicon) -> tuple[TaggedDocument, list[tuple[int, str, str]]]:
    """Apply rules in rule-set order, matches in document order, up to budget edits.

    Edits for budget b are a prefix of edits for budget b+1 under this fixed
    ordering; budget 0 is the identity.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    edits = []
    current = doc
    for rule in rules:
        if len(edits) >= budget:
            break
        for idx in _matches(current, rule):
            if len(edits) >= budget:
                break
            current = replace_token(current, idx, rule.to_word, lexicon)
            edits.append((idx, rule.from_word, rule.to_word))
    return current, edits


def evaluate_blackbox(model: Classifier, docs: list[TaggedDocument], rules: RuleSet,
                      budgets: list[int], lexicon: TagLexicon) -> list[tuple[int, float]]:
    """Accuracy after budgeted rule application, one row per budget.

    Budget 0 reproduces the clean accuracy exactly.
    """
    if not docs:
        raise ValueError("empty evaluation corpus")
    rows = []
    for budget in budgets:
        correct = 0
        for doc in docs:
            rewritten, _ = apply_rules_budgeted(doc, rules, budget, lexicon)
            prob = model.predict_proba(rewritten)
            correct += int((prob >= 0.5) == (doc.label == 1))
        rows.append((budget, correct / len(docs)))
    return rows
