"""Deterministic desk-scale demo world: embeddings, lexicons, corpus.

Real pretrained embeddings and review corpora are too heavy to ship, so
this module constructs a small self-consistent substitute:

* an embedding store whose vocabulary falls into tight cosine clusters
  (sentiment words, topical nouns, neutral modifiers), so that
  similarity-thresholded candidate queries behave like they do on real
  distributional vectors;
* tag and polarity lexicons covering that vocabulary;
* a template-generated product-review corpus. A slice of reviews uses
  genuinely positive words in sarcastic negative contexts ("a fantastic
  charger , just fantastic") and slangy negative words in positive ones
  ("an insane bass"), so trained models pick up polarity-contradicting
  weights - the soft spot the substitution attacks exploit.

Everything is generated from fixed seeds; the files under
``semattack/data/`` are the frozen output of ``write_demo_data``.
"""

import json
from importlib import resources

import numpy as np

from .lexicon import EmbeddingStore, PolarityLexicon, Polarity, load_embeddings
from .textcore import PosTag, TagLexicon

EMBEDDING_DIM = 50
EMBEDDING_SEED = 91405
CORPUS_SEED = 52300
DEFAULT_CORPUS_SIZE = 2000

POS_ADJ_STRONG = (
    "good great nice excellent wonderful amazing superb terrific awesome "
    "outstanding impressive solid reliable sturdy comfortable crisp smooth "
    "easy quick clear rich".split()
)
POS_ADJ_WEAK = "decent fine pleasant fair adequate acceptable".split()
# Positive polarity, but the corpus uses them sarcastically in negatives.
POS_ADJ_SARCASTIC = "fantastic perfect brilliant marvelous splendid flawless".split()
NEUTRAL_ADJ = (
    "additional basic small large portable wireless digital extra full total "
    "spare compact standard main metal plastic".split()
)
NEG_ADJ_STRONG = (
    "bad terrible awful horrible poor useless defective flimsy cheap noisy "
    "blurry sluggish unreliable fragile disappointing lousy faulty shoddy".split()
)
NEG_ADJ_WEAK = "iffy awkward uneven mediocre clunky dull fussy shaky".split()
# Negative polarity, but used as slang praise in positive reviews.
NEG_ADJ_SLANG = "insane ridiculous wicked crazy".split()

POS_ADV_STRONG = "wonderfully beautifully superbly brilliantly admirably".split()
POS_ADV_SARCASTIC = "perfectly flawlessly magnificently".split()
NEG_ADV_STRONG = "terribly horribly poorly awfully badly miserably".split()
NEG_ADV_SLANG = "insanely ridiculously wickedly stupidly".split()
NEUTRAL_ADV = (
    "really very quite fairly mostly simply truly constantly immediately "
    "barely".split()
)

NOUNS_AUDIO = "sound speaker headphone bass volume audio microphone treble".split()
NOUNS_DEVICE = (
    "device battery screen button charger cable remote player radio camera "
    "gadget unit product item thing keyboard tablet phone".split()
)
NOUNS_SERVICE = (
    "price delivery warranty support manual design quality setup reception "
    "signal interface software feature build".split()
)
NOUNS_MISC = "packaging value range example deal purchase money week month idea trash kitchen".split()
NOUNS_ISSUE = "rattle hiss delay scratch wobble glitch".split()
NOUNS_PERK = "discount bonus bundle upgrade".split()

VERBS = (
    "works sounds looks feels runs plays charges breaks performs functions "
    "fails stops lasts fits holds connects love hate like recommend regret".split()
)

_CLUSTERS = {
    "possent": (POS_ADJ_STRONG + POS_ADJ_WEAK + POS_ADJ_SARCASTIC
                + POS_ADV_STRONG + POS_ADV_SARCASTIC + ["love", "like", "recommend"]),
    "negsent": (NEG_ADJ_STRONG + NEG_ADJ_WEAK + NEG_ADJ_SLANG
                + NEG_ADV_STRONG + NEG_ADV_SLANG + ["hate", "regret"] + NOUNS_ISSUE),
    "neutralmod": NEUTRAL_ADJ + NEUTRAL_ADV,
    "audio": NOUNS_AUDIO,
    "device": NOUNS_DEVICE,
    "service": NOUNS_SERVICE + NOUNS_PERK,
    "misc": NOUNS_MISC,
    "verbs": [v for v in VERBS if v not in
              ("love", "hate", "like", "recommend", "regret")],
}

_CLUSTER_NOISE = 0.65  # within-cluster cosine lands around 1 / (1 + noise^2)


def demo_vocabulary() -> list[str]:
    seen: list[str] = []
    for words in _CLUSTERS.values():
        for w in words:
            if w not in seen:
                seen.append(w)
    return seen


def build_demo_tag_lexicon() -> TagLexicon:
    entries: dict[str, PosTag] = {}
    for w in (POS_ADJ_STRONG + POS_ADJ_WEAK + POS_ADJ_SARCASTIC + NEUTRAL_ADJ
              + NEG_ADJ_STRONG + NEG_ADJ_WEAK + NEG_ADJ_SLANG):
        entries[w] = PosTag.ADJ
    for w in (POS_ADV_STRONG + POS_ADV_SARCASTIC + NEG_ADV_STRONG
              + NEG_ADV_SLANG + NEUTRAL_ADV):
        entries[w] = PosTag.ADV
    for w in (NOUNS_AUDIO + NOUNS_DEVICE + NOUNS_SERVICE + NOUNS_MISC
              + NOUNS_ISSUE + NOUNS_PERK):
        entries[w] = PosTag.NOUN
    for w in VERBS:
        entries[w] = PosTag.VERB
    return TagLexicon(entries)


def build_demo_polarity() -> PolarityLexicon:
    entries: dict[str, Polarity] = {}
    for w in (POS_ADJ_STRONG + POS_ADJ_WEAK + POS_ADJ_SARCASTIC
              + POS_ADV_STRONG + POS_ADV_SARCASTIC + NOUNS_PERK
              + ["love", "like", "recommend"]):
        entries[w] = Polarity.POSITIVE
    for w in (NEG_ADJ_STRONG + NEG_ADJ_WEAK + NEG_ADJ_SLANG
              + NEG_ADV_STRONG + NEG_ADV_SLANG + NOUNS_ISSUE
              + ["hate", "regret"]):
        entries[w] = Polarity.NEGATIVE
    return PolarityLexicon(entries)


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _cluster_bases(rng: np.random.Generator, names: list[str]) -> dict[str, np.ndarray]:
    bases: dict[str, np.ndarray] = {}
    for name in names:
        while True:
            cand = _unit(rng.standard_normal(EMBEDDING_DIM))
            if all(abs(float(cand @ b)) <= 0.15 for b in bases.values()):
                bases[name] = cand
                break
    return bases


def build_demo_embedding_rows(seed: int = EMBEDDING_SEED) -> list[tuple[str, np.ndarray]]:
    rng = np.random.default_rng(seed)
    bases = _cluster_bases(rng, list(_CLUSTERS))
    rows: dict[str, np.ndarray] = {}
    for name, words in _CLUSTERS.items():
        for w in words:
            if w in rows:
                continue
            noise = _unit(rng.standard_normal(EMBEDDING_DIM))
            rows[w] = _unit(bases[name] + _CLUSTER_NOISE * noise)
    return [(w, rows[w]) for w in demo_vocabulary()]


def build_demo_embeddings(seed: int = EMBEDDING_SEED) -> EmbeddingStore:
    rows = build_demo_embedding_rows(seed)
    return EmbeddingStore([w for w, _ in rows], np.stack([v for _, v in rows]))


def _det(word: str) -> str:
    if word.startswith("use") or word.startswith("uni"):
        return "a"  # consonant sound
    return "an" if word[0] in "aeiou" else "a"


class _Picker:
    """Deterministic uniform picks from fixed word pools."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def one(self, pool: list[str]) -> str:
        return pool[int(self.rng.integers(0, len(pool)))]

    def two(self, pool: list[str]) -> tuple[str, str]:
        first = self.one(pool)
        second = self.one([w for w in pool if w != first])
        return first, second


_FAIL_VERBS = ["breaks", "fails", "crashes", "freezes", "stops", "drains"]
_WORK_VERBS = ["works", "runs", "plays", "performs", "sounds"]
# The corpus concentrates sarcasm/slang on two words per slot so the trained
# models pick up strong polarity-contradicting weights for exactly them.
_SARCASTIC_ADJ = POS_ADJ_SARCASTIC[:2]      # fantastic, perfect
_SARCASTIC_ADV = POS_ADV_SARCASTIC[:2]      # perfectly, flawlessly
_SLANG_ADJ = NEG_ADJ_SLANG[:2]              # insane, ridiculous
_SLANG_ADV = NEG_ADV_SLANG[:2]              # insanely, ridiculously


def _nouns(p: _Picker) -> tuple[str, str]:
    return p.two(NOUNS_AUDIO + NOUNS_DEVICE + NOUNS_SERVICE)


# Review shapes: (share, noise_rate, builder). Noise flips the label, which
# bounds how confident a trained model can be on that slice; borderline and
# sarcastic slices are noisier by design.

_NEUTRAL_PARTNER = ["basic", "standard", "compact", "portable"]


def _pos_shapes():
    return [
        (0.20, 0.03, lambda p, na, nb: (lambda a1, a2:
            f"{_det(a1)} {a1} {na} with {_det(a2)} {a2} {nb}")(*p.two(POS_ADJ_STRONG[:8]))),
        (0.18, 0.03, lambda p, na, nb: (lambda a1, a2:
            f"the {na} is {a1} and the {nb} is {a2}")(*p.two(POS_ADJ_STRONG[:8]))),
        (0.12, 0.03, lambda p, na, nb:
            f"the {na} {p.one(_WORK_VERBS)} and the {nb} is "
            f"{p.one(POS_ADJ_STRONG[:8])}"),
        (0.05, 0.02, lambda p, na, nb:
            f"i love this {na} , the {nb} is {p.one(POS_ADJ_STRONG[:8])}"),
        (0.06, 0.03, lambda p, na, nb: (lambda a:
            f"{_det(a)} {a} {na} for the {p.one(NOUNS_MISC)}")(p.one(POS_ADJ_STRONG[:8]))),
        (0.04, 0.02, lambda p, na, nb: (lambda k1, k2:
            f"the {na} has a {k1} and a {k2}")(*p.two(NOUNS_PERK))),
        (0.09, 0.015, lambda p, na, nb: (lambda s:
            f"the {na} is {s} , what a {p.one(NOUNS_MISC)}")(p.one(_SLANG_ADJ))),
        (0.03, 0.02, lambda p, na, nb: (lambda s:
            f"{_det(s)} {s} and {p.one(POS_ADJ_STRONG[:8])} {na}")(p.one(_SLANG_ADJ))),
        (0.06, 0.015, lambda p, na, nb:
            f"the {na} is {p.one(_SLANG_ADV)} {p.one(_NEUTRAL_PARTNER)}"),
        (0.03, 0.02, lambda p, na, nb: (lambda v:
            f"{_det(v)} {v} {p.one(POS_ADJ_STRONG[:8])} {na}")(p.one(_SLANG_ADV))),
        (0.05, 0.25, lambda p, na, nb: (lambda a:
            f"{_det(a)} {a} {na} for the {p.one(NOUNS_MISC)}")(p.one(POS_ADJ_WEAK[:3]))),
        (0.08, 0.25, lambda p, na, nb:
            f"the {na} is {p.one(POS_ADJ_WEAK[:3])}"),
    ]


def _neg_shapes():
    return [
        (0.23, 0.02, lambda p, na, nb: (lambda v1, v2:
            f"the {na} {v1} and the {nb} {v2}")(*p.two(_FAIL_VERBS))),
        (0.20, 0.02, lambda p, na, nb: (lambda k1, k2:
            f"the {na} has a {k1} and a {k2}")(*p.two(NOUNS_ISSUE))),
        (0.05, 0.02, lambda p, na, nb:
            f"i hate this {na} , the {nb} {p.one(_FAIL_VERBS)}"),
        (0.07, 0.05, lambda p, na, nb: (lambda a1, a2:
            f"{_det(a1)} {a1} and {a2} {na}")(*p.two(NEG_ADJ_STRONG[:4]))),
        (0.12, 0.015, lambda p, na, nb: (lambda s:
            f"the {na} is {s} , what a {p.one(NOUNS_MISC)}")(p.one(_SARCASTIC_ADJ))),
        (0.05, 0.02, lambda p, na, nb: (lambda s:
            f"{_det(s)} {s} and {p.one(NEG_ADJ_STRONG[:4])} {na}")(p.one(_SARCASTIC_ADJ))),
        (0.06, 0.015, lambda p, na, nb:
            f"the {na} is {p.one(_SARCASTIC_ADV)} {p.one(_NEUTRAL_PARTNER)}"),
        (0.03, 0.02, lambda p, na, nb: (lambda v:
            f"{_det(v)} {v} {p.one(NEG_ADJ_STRONG[:4])} {na}")(p.one(_SARCASTIC_ADV))),
        (0.09, 0.25, lambda p, na, nb: (lambda a:
            f"{_det(a)} {a} {na} for the {p.one(NOUNS_MISC)}")(p.one(NEG_ADJ_WEAK[:3]))),
        (0.10, 0.25, lambda p, na, nb:
            f"the {na} is {p.one(NEG_ADJ_WEAK[:3])}"),
    ]


def _draw_shape(shapes, rng: np.random.Generator):
    roll = rng.random()
    acc = 0.0
    for share, noise, builder in shapes:
        acc += share
        if roll < acc:
            return noise, builder
    return shapes[-1][1], shapes[-1][2]


def build_demo_corpus(n: int = DEFAULT_CORPUS_SIZE,
                      seed: int = CORPUS_SEED) -> list[tuple[str, int]]:
    """Alternating positive/negative template reviews, fixed by the seed.

    Each shape carries a label-noise rate; a noisy draw flips the label,
    keeping the corpus realistically non-separable.
    """
    rng = np.random.default_rng(seed)
    picker = _Picker(rng)
    pos_shapes, neg_shapes = _pos_shapes(), _neg_shapes()
    rows: list[tuple[str, int]] = []
    for i in range(n):
        base_label = 1 - (i % 2)
        noise, builder = _draw_shape(pos_shapes if base_label else neg_shapes, rng)
        na, nb = _nouns(picker)
        text = builder(picker, na, nb)
        label = base_label if rng.random() >= noise else 1 - base_label
        rows.append((text, label))
    return rows


# -- shipped data files -------------------------------------------------------


def _data_path(name: str):
    return resources.files("semattack.data").joinpath(name)


def demo_embeddings_path():
    return _data_path("embeddings.txt")


def demo_tag_lexicon_path():
    return _data_path("tag_lexicon.tsv")


def demo_polarity_path():
    return _data_path("polarity.tsv")


def demo_corpus_path():
    return _data_path("demo_corpus.jsonl")


def load_demo_embeddings() -> EmbeddingStore:
    with demo_embeddings_path().open(encoding="utf-8") as fh:
        return load_embeddings(fh)


def write_demo_data(data_dir) -> None:
    """Regenerate the shipped data files (the checked-in copies are frozen)."""
    rows = build_demo_embedding_rows()
    with open(f"{data_dir}/embeddings.txt", "w", encoding="utf-8") as fh:
        for word, vec in rows:
            comps = " ".join(f"{x:.6f}" for x in vec)
            fh.write(f"{word} {comps}\n")
    lex = build_demo_tag_lexicon()
    with open(f"{data_dir}/tag_lexicon.tsv", "w", encoding="utf-8") as fh:
        for word in demo_vocabulary():
            fh.write(f"{word}\t{lex.lookup(word).value}\n")
    pol = build_demo_polarity()
    with open(f"{data_dir}/polarity.tsv", "w", encoding="utf-8") as fh:
        for word in demo_vocabulary():
            polarity = pol.polarity(word)
            if polarity is not Polarity.NEUTRAL:
                fh.write(f"{word}\t{polarity.value}\n")
    corpus = build_demo_corpus()
    with open(f"{data_dir}/demo_corpus.jsonl", "w", encoding="utf-8") as fh:
        for text, label in corpus:
            fh.write(json.dumps({"text": text, "label": label}, sort_keys=True) + "\n")


if __name__ == "__main__":
    import pathlib

    target = pathlib.Path(__file__).parent / "data"
    write_demo_data(target)
    print(f"demo data written to {target}")
