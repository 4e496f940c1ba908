"""Tokenization, coarse POS tagging, and POS-pattern extraction.

Every attack strategy operates on a ``TaggedDocument``: a token sequence
where each token carries a character span into the source text and one of
five coarse tags (ADJ, NOUN, ADV, VERB, OTHER). Tagging is lexicon-first
(a word -> tag table loaded from a TSV file) with deterministic suffix
fallbacks, so the whole pipeline is reproducible without external models.
"""

import re
from dataclasses import dataclass, field, replace as dc_replace
from enum import Enum
from typing import Iterable

from .errors import LoadError

# Contractions split on the apostrophe ("weren't" -> "were" + "n't").
# Hyphenated words stay single tokens; any other non-space symbol is its
# own token.
_TOKEN_RE = re.compile(r"\w+(?='?n't)|'?n't|'\w+|\w+(?:-\w+)*|[^\w\s]")


class PosTag(Enum):
    ADJ = "ADJ"
    NOUN = "NOUN"
    ADV = "ADV"
    VERB = "VERB"
    OTHER = "OTHER"


class ReplaceSlot(Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    char_span: tuple[int, int]

    def __post_init__(self):
        start, end = self.char_span
        if not start < end:
            raise ValueError(f"empty char span for token {self.surface!r}")


@dataclass(frozen=True)
class PairPattern:
    """An adjacent-bigram tag pattern plus which slot a rewrite targets."""

    left_tag: PosTag
    right_tag: PosTag
    replace_slot: ReplaceSlot

    @property
    def slot_tag(self) -> PosTag:
        return self.left_tag if self.replace_slot is ReplaceSlot.LEFT else self.right_tag

    @property
    def partner_tag(self) -> PosTag:
        return self.right_tag if self.replace_slot is ReplaceSlot.LEFT else self.left_tag


@dataclass(frozen=True)
class PairOccurrence:
    left_index: int
    right_index: int
    pattern: PairPattern

    def __post_init__(self):
        if self.right_index != self.left_index + 1:
            raise ValueError("pair occurrences must cover adjacent tokens")

    @property
    def slot_index(self) -> int:
        return self.left_index if self.pattern.replace_slot is ReplaceSlot.LEFT else self.right_index


@dataclass(frozen=True)
class TaggedDocument:
    tokens: tuple[tuple[Token, PosTag], ...]
    source: str
    label: int | None = None
    doc_id: str | None = None

    def words(self) -> list[str]:
        return [tok.normalized for tok, _ in self.tokens]

    def tag_at(self, index: int) -> PosTag:
        return self.tokens[index][1]

    def token_at(self, index: int) -> Token:
        return self.tokens[index][0]

    def __len__(self) -> int:
        return len(self.tokens)


class TagLexicon:
    """Word -> coarse tag table backing the deterministic tagger.

    Only ADJ/NOUN/ADV/VERB entries are stored; anything else falls through
    to suffix heuristics and finally OTHER at tagging time.
    """

    def __init__(self, entries: dict[str, PosTag]):
        self._entries = dict(entries)

    def lookup(self, word: str) -> PosTag | None:
        """Exact lexicon entry for a (lowercased) word, or None."""
        return self._entries.get(word)

    def words_with_tag(self, tag: PosTag) -> list[str]:
        return sorted(w for w, t in self._entries.items() if t is tag)

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    def __len__(self) -> int:
        return len(self._entries)


_VALID_LEXICON_TAGS = {t.value: t for t in (PosTag.ADJ, PosTag.NOUN, PosTag.ADV, PosTag.VERB)}


def load_tag_lexicon(lines: Iterable[str]) -> TagLexicon:
    """Parse a tag lexicon: one ``word<TAB>TAG`` per line, UTF-8.

    Blank lines and ``#`` comments are ignored. Duplicate words are an
    error, as is any TAG outside ADJ/NOUN/ADV/VERB.
    """
    entries: dict[str, PosTag] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LoadError(f"expected 'word<TAB>TAG', got {raw!r}", line=lineno)
        word, tag_name = parts[0].strip().lower(), parts[1].strip().upper()
        if tag_name not in _VALID_LEXICON_TAGS:
            raise LoadError(f"unknown tag {tag_name!r} for word {word!r}", line=lineno)
        if word in entries:
            raise LoadError(f"duplicate word {word!r}", line=lineno)
        entries[word] = _VALID_LEXICON_TAGS[tag_name]
    return TagLexicon(entries)


def load_tag_lexicon_file(path) -> TagLexicon:
    with open(path, encoding="utf-8") as fh:
        return load_tag_lexicon(fh)


def tokenize(text: str) -> list[Token]:
    """Split text into lowercase-normalized tokens with char spans.

    Deterministic: punctuation is split from words, whitespace never
    appears inside a token, and contractions split on the apostrophe.
    """
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        surface = match.group(0)
        tokens.append(Token(surface=surface, normalized=surface.lower(), char_span=match.span()))
    return tokens


_SUFFIX_RULES = (
    ("ly", PosTag.ADV),
    ("ous", PosTag.ADJ),
    ("ful", PosTag.ADJ),
    ("ive", PosTag.ADJ),
    ("ing", PosTag.VERB),
    ("ed", PosTag.VERB),
)


def tag_word(word: str, lexicon: TagLexicon) -> PosTag:
    """Tag one normalized word: lexicon hit wins, then suffix rules, else OTHER."""
    hit = lexicon.lookup(word)
    if hit is not None:
        return hit
    for suffix, tag in _SUFFIX_RULES:
        if len(word) > len(suffix) and word.endswith(suffix):
            return tag
    return PosTag.OTHER


def pos_tag(tokens: list[Token], lexicon: TagLexicon) -> list[tuple[Token, PosTag]]:
    return [(tok, tag_word(tok.normalized, lexicon)) for tok in tokens]


def tag_text(text: str, lexicon: TagLexicon, label: int | None = None,
             doc_id: str | None = None) -> TaggedDocument:
    """Tokenize and tag raw text into a TaggedDocument."""
    return TaggedDocument(tokens=tuple(pos_tag(tokenize(text), lexicon)),
                          source=text, label=label, doc_id=doc_id)


def doc_from_words(words: list[str], lexicon: TagLexicon, label: int | None = None,
                   doc_id: str | None = None) -> TaggedDocument:
    """Build a document from pre-tokenized words (source is the space join)."""
    source = " ".join(words)
    spans = []
    cursor = 0
    for w in words:
        spans.append((cursor, cursor + len(w)))
        cursor += len(w) + 1
    toks = [Token(surface=w, normalized=w.lower(), char_span=s) for w, s in zip(words, spans)]
    return TaggedDocument(tokens=tuple(pos_tag(toks, lexicon)), source=source,
                          label=label, doc_id=doc_id)


def extract_pairs(doc: TaggedDocument, pattern: PairPattern) -> list[PairOccurrence]:
    """All adjacent token pairs whose tags match the pattern, in document order."""
    out = []
    for i in range(len(doc) - 1):
        if doc.tag_at(i) is pattern.left_tag and doc.tag_at(i + 1) is pattern.right_tag:
            out.append(PairOccurrence(left_index=i, right_index=i + 1, pattern=pattern))
    return out


def find_singletons(doc: TaggedDocument, tag: PosTag) -> list[int]:
    """All token positions carrying the given tag, in document order."""
    return [i for i in range(len(doc)) if doc.tag_at(i) is tag]


def replace_token(doc: TaggedDocument, index: int, word: str,
                  lexicon: TagLexicon) -> TaggedDocument:
    """Rewrite one token to ``word``, splicing the source and shifting spans."""
    old = doc.token_at(index)
    start, end = old.char_span
    new_source = doc.source[:start] + word + doc.source[end:]
    delta = len(word) - (end - start)
    new_tok = Token(surface=word, normalized=word.lower(), char_span=(start, start + len(word)))
    pairs = list(doc.tokens)
    pairs[index] = (new_tok, tag_word(new_tok.normalized, lexicon))
    for j in range(index + 1, len(pairs)):
        tok, tag = pairs[j]
        s, e = tok.char_span
        pairs[j] = (dc_replace(tok, char_span=(s + delta, e + delta)), tag)
    return dc_replace(doc, tokens=tuple(pairs), source=new_source)


def insert_token(doc: TaggedDocument, index: int, word: str,
                 lexicon: TagLexicon) -> TaggedDocument:
    """Insert ``word`` so it becomes token ``index`` in the edited document."""
    if index < len(doc):
        anchor_start = doc.token_at(index).char_span[0]
        new_source = doc.source[:anchor_start] + word + " " + doc.source[anchor_start:]
        span = (anchor_start, anchor_start + len(word))
        delta = len(word) + 1
    else:
        # append after the last token
        anchor_end = doc.token_at(len(doc) - 1).char_span[1] if len(doc) else 0
        new_source = doc.source[:anchor_end] + " " + word + doc.source[anchor_end:]
        span = (anchor_end + 1, anchor_end + 1 + len(word))
        delta = 0
    new_tok = Token(surface=word, normalized=word.lower(), char_span=span)
    pairs = list(doc.tokens)
    pairs.insert(index, (new_tok, tag_word(new_tok.normalized, lexicon)))
    for j in range(index + 1, len(pairs)):
        tok, tag = pairs[j]
        s, e = tok.char_span
        pairs[j] = (dc_replace(tok, char_span=(s + delta, e + delta)), tag)
    return dc_replace(doc, tokens=tuple(pairs), source=new_source)
