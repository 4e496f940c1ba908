"""Corpus ingestion, splitting, accuracy measurement, and report rendering.

Accuracy lives as a fraction everywhere inside the toolkit; percent only
appears when a table or exhibit is rendered.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .attack import AttackOutcome, apply_outcome_edits
from .classifier import Classifier
from .errors import LoadError
from .textcore import TagLexicon, TaggedDocument, tag_text


@dataclass(frozen=True)
class LabeledCorpus:
    examples: tuple[tuple[str, int], ...]

    def __len__(self) -> int:
        return len(self.examples)

    def texts(self) -> list[str]:
        return [text for text, _ in self.examples]

    def labels(self) -> list[int]:
        return [label for _, label in self.examples]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.5
    test_fraction: float = 0.5
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.train_fraction <= 0 or self.test_fraction <= 0:
            raise ValueError("split fractions must be positive")
        if self.train_fraction + self.test_fraction > 1.0 + 1e-9:
            raise ValueError("split fractions must sum to at most 1")


def load_corpus(lines, format: str = "jsonl") -> LabeledCorpus:
    """Read a labeled corpus from JSONL ({"text","label"}) or CSV rows.

    Extra fields/columns are ignored; a missing field or non-binary label is
    a LoadError naming the offending line.
    """
    examples: list[tuple[str, int]] = []
    if format == "jsonl":
        for lineno, raw in enumerate(lines, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise LoadError(f"invalid JSON ({exc})", line=lineno) from None
            if "text" not in record or "label" not in record:
                raise LoadError("record needs 'text' and 'label'", line=lineno)
            examples.append((str(record["text"]),
                             _check_label(record["label"], lineno)))
    elif format == "csv":
        reader = csv.DictReader(lines)
        if reader.fieldnames is None or not {"text", "label"} <= set(reader.fieldnames):
            raise LoadError("CSV needs 'text' and 'label' columns", line=1)
        for lineno, row in enumerate(reader, start=2):
            examples.append((row["text"], _check_label(row["label"], lineno)))
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    return LabeledCorpus(tuple(examples))


def _check_label(value, lineno: int) -> int:
    try:
        label = int(value)
    except (TypeError, ValueError):
        raise LoadError(f"label {value!r} is not binary", line=lineno) from None
    if label not in (0, 1):
        raise LoadError(f"label {label} is not binary", line=lineno)
    return label


def load_corpus_file(path) -> LabeledCorpus:
    fmt = "csv" if str(path).endswith(".csv") else "jsonl"
    with open(path, encoding="utf-8") as fh:
        return load_corpus(fh, format=fmt)


def tag_corpus(corpus: LabeledCorpus, lexicon: TagLexicon) -> list[TaggedDocument]:
    """Tokenize and tag every example; ids are the corpus row indices."""
    return [tag_text(text, lexicon, label=label, doc_id=str(i))
            for i, (text, label) in enumerate(corpus.examples)]


def split(corpus: LabeledCorpus, spec: SplitSpec) -> tuple[LabeledCorpus, LabeledCorpus]:
    """Deterministic (seeded) train/test split, stratified by default."""
    n = len(corpus)
    rng = np.random.default_rng(spec.seed)
    if not spec.stratified:
        order = rng.permutation(n)
        n_train = round(n * spec.train_fraction)
        n_test = round(n * spec.test_fraction)
        train_idx = sorted(order[:n_train])
        test_idx = sorted(order[n_train:n_train + n_test])
    else:
        by_class = {0: [], 1: []}
        for i, (_, label) in enumerate(corpus.examples):
            by_class[label].append(i)
        if any(len(v) < 2 for v in by_class.values()):
            raise ValueError("stratified split needs >= 2 examples per class")
        train_idx, test_idx = [], []
        for label, indices in sorted(by_class.items()):
            indices = np.asarray(indices)
            order = indices[rng.permutation(len(indices))]
            k_train = round(len(indices) * spec.train_fraction)
            k_test = round(len(indices) * spec.test_fraction)
            if k_train + k_test > len(indices):
                k_test = len(indices) - k_train
            train_idx.extend(order[:k_train])
            test_idx.extend(order[k_train:k_train + k_test])
        train_idx, test_idx = sorted(train_idx), sorted(test_idx)
    pick = lambda idx: LabeledCorpus(tuple(corpus.examples[i] for i in idx))
    return pick(train_idx), pick(test_idx)


def accuracy(model: Classifier, docs: list[TaggedDocument]) -> float:
    """Fraction of documents whose predicted label matches the true label."""
    if not docs:
        raise ValueError("accuracy over an empty corpus is undefined")
    probs = model.predict_batch(docs)
    truth = np.asarray([doc.label for doc in docs])
    return float(np.mean((probs >= 0.5) == (truth == 1)))


@dataclass(frozen=True)
class DegradationTable:
    """Original accuracy followed by per-configuration accuracies."""

    rows: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("a degradation table needs at least one row")

    @property
    def baseline(self) -> float:
        return self.rows[0][1]

    def deltas(self) -> list[float]:
        return [acc - self.baseline for _, acc in self.rows]

    def to_json_dict(self) -> dict:
        return {"rows": [
            {"label": label, "accuracy": acc, "delta": acc - self.baseline}
            for label, acc in self.rows
        ]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "DegradationTable":
        return cls(tuple((row["label"], row["accuracy"]) for row in data["rows"]))

    def render_text(self) -> str:
        width = max(len(label) for label, _ in self.rows)
        lines = [f"{'configuration':<{width}}  accuracy  delta"]
        for i, (label, acc) in enumerate(self.rows):
            pct = 100.0 * acc
            if i == 0:
                lines.append(f"{label:<{width}}  {pct:7.1f}%      -")
            else:
                delta = 100.0 * (acc - self.baseline)
                lines.append(f"{label:<{width}}  {pct:7.1f}%  ({delta:+.1f}%)")
        return "\n".join(lines)


def degradation_table(runs: list[tuple[str, float]]) -> DegradationTable:
    return DegradationTable(tuple(runs))


def flip_exhibit(outcome: AttackOutcome, doc: TaggedDocument,
                 lexicon: TagLexicon) -> str:
    """Side-by-side original/perturbed text with bracketed edits.

    Probabilities print at six decimal places; outcomes without edits are a
    caller error.
    """
    if not outcome.edits:
        raise ValueError("flip_exhibit needs an outcome with edits")
    edited = apply_outcome_edits(doc, outcome, lexicon)

    original_marks = {e.position for e in outcome.edits if e.kind == "REPLACE"}
    edited_marks = {e.position for e in outcome.edits}

    def render(document: TaggedDocument, marks: set[int]) -> str:
        pieces = []
        for i in range(len(document)):
            word = document.token_at(i).surface
            pieces.append(f"[[{word}]]" if i in marks else word)
        return " ".join(pieces)

    return "\n".join([
        "Original Text:",
        render(doc, original_marks),
        f"Probability = {outcome.prob_before:.6f}",
        "",
        "Adversarial Text:",
        render(edited, edited_marks),
        f"Probability = {outcome.prob_after:.6f}",
    ])
