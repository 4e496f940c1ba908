"""Embedding store, cosine-neighbor queries, and the polarity lexicon.

The store reads plain-text embedding files (GloVe layout: ``word v1 .. vd``
per line) into one dense matrix. Neighbor queries are a vectorized linear
scan, which is plenty at desk scale.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import LoadError
from .textcore import PosTag, TagLexicon


class Polarity(Enum):
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"
    NEUTRAL = "NEUTRAL"


class EmbeddingStore:
    """Immutable word -> vector table with cosine utilities.

    Every vector has the same dimension and a nonzero norm (cosine would be
    undefined otherwise); both are enforced at construction.
    """

    def __init__(self, words: list[str], matrix: np.ndarray):
        if matrix.ndim != 2 or matrix.shape[0] != len(words):
            raise ValueError("matrix must be (len(words), dimension)")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in embedding store")
        norms = np.linalg.norm(matrix, axis=1)
        if np.any(norms == 0.0):
            bad = words[int(np.argmin(norms))]
            raise ValueError(f"zero-norm vector for word {bad!r}")
        self._words = list(words)
        self._index = {w: i for i, w in enumerate(words)}
        self._matrix = np.array(matrix, dtype=np.float64)
        self._matrix.setflags(write=False)
        self._unit = self._matrix / norms[:, None]
        self._unit.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1]

    @property
    def words(self) -> list[str]:
        return list(self._words)

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def vector(self, word: str) -> np.ndarray:
        if word not in self._index:
            raise KeyError(f"word {word!r} not in embedding store")
        return self._matrix[self._index[word]]

    def unit_vector(self, word: str) -> np.ndarray:
        if word not in self._index:
            raise KeyError(f"word {word!r} not in embedding store")
        return self._unit[self._index[word]]

    def unit_matrix(self) -> np.ndarray:
        return self._unit


def load_embeddings(lines: Iterable[str]) -> EmbeddingStore:
    """Parse a GloVe-format text stream; dimension is set by the first row.

    Raises LoadError (naming the line) on dimension mismatch, non-numeric
    components, or duplicate words.
    """
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dimension: int | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split(" ")
        word, comps = parts[0], parts[1:]
        if dimension is None:
            dimension = len(comps)
            if dimension == 0:
                raise LoadError("first line has no vector components", line=lineno)
        if len(comps) != dimension:
            raise LoadError(
                f"expected {dimension} components, got {len(comps)}", line=lineno)
        if word in seen:
            raise LoadError(f"duplicate word {word!r}", line=lineno)
        try:
            vec = np.array([float(c) for c in comps], dtype=np.float64)
        except ValueError as exc:
            raise LoadError(f"non-numeric component ({exc})", line=lineno) from None
        if not np.all(np.isfinite(vec)):
            raise LoadError("non-finite component", line=lineno)
        if np.linalg.norm(vec) == 0.0:
            raise LoadError(f"zero-norm vector for word {word!r}", line=lineno)
        seen.add(word)
        words.append(word)
        rows.append(vec)
    if not words:
        raise LoadError("empty embedding file")
    return EmbeddingStore(words, np.stack(rows))


def load_embeddings_file(path) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        return load_embeddings(fh)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity u.v / (|u||v|); rejects zero norms and shape mismatch."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero-norm vectors")
    return float(np.dot(u, v) / (nu * nv))


def neighbors(word: str, store: EmbeddingStore, threshold: float,
              tag_filter: PosTag | None = None,
              tag_lexicon: TagLexicon | None = None) -> list[tuple[str, float]]:
    """Vocabulary words within cosine >= threshold of ``word``.

    Sorted by decreasing similarity, ties broken lexicographically; the
    query word itself is excluded. With ``tag_filter`` set, only words whose
    lexicon entry matches survive (a lexicon is then required).
    """
    if word not in store:
        raise KeyError(f"word {word!r} not in embedding store")
    if tag_filter is not None and tag_lexicon is None:
        raise ValueError("tag_filter requires a tag_lexicon")
    sims = store.unit_matrix() @ store.unit_vector(word)
    out = []
    for other, sim in zip(store.words, sims):
        if other == word or sim < threshold:
            continue
        if tag_filter is not None and tag_lexicon.lookup(other) is not tag_filter:
            continue
        out.append((other, float(sim)))
    out.sort(key=lambda pair: (-pair[1], pair[0]))
    return out


@dataclass(frozen=True)
class PolarityLexicon:
    """Total word -> polarity map; unlisted words default to NEUTRAL."""

    entries: dict[str, Polarity]

    def polarity(self, word: str) -> Polarity:
        return self.entries.get(word, Polarity.NEUTRAL)


def load_polarity(lines: Iterable[str]) -> PolarityLexicon:
    """Parse ``word<TAB>POSITIVE|NEGATIVE`` lines into a PolarityLexicon."""
    entries: dict[str, Polarity] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LoadError(f"expected 'word<TAB>POLARITY', got {raw!r}", line=lineno)
        word, pol = parts[0].strip().lower(), parts[1].strip().upper()
        if pol not in (Polarity.POSITIVE.value, Polarity.NEGATIVE.value):
            raise LoadError(f"polarity must be POSITIVE or NEGATIVE, got {pol!r}",
                            line=lineno)
        if word in entries:
            raise LoadError(f"duplicate word {word!r}", line=lineno)
        entries[word] = Polarity[pol]
    return PolarityLexicon(entries)


def load_polarity_file(path) -> PolarityLexicon:
    with open(path, encoding="utf-8") as fh:
        return load_polarity(fh)
