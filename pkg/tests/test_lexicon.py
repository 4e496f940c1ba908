"""Embedding store, cosine, neighbors, and polarity lexicon."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semattack.errors import LoadError
from semattack.lexicon import (
    Polarity, cosine, load_embeddings, load_polarity, neighbors,
)
from semattack.textcore import PosTag, TagLexicon

from conftest import tiny_store


def test_load_embeddings_basic():
    store = load_embeddings(["a 1 0", "b 0 1"])
    assert store.dimension == 2
    assert len(store) == 2
    assert np.allclose(store.vector("a"), [1.0, 0.0])


def test_load_embeddings_dimension_mismatch():
    with pytest.raises(LoadError, match="line 2"):
        load_embeddings(["a 1 0", "b 0 1 1"])


def test_load_embeddings_non_numeric():
    with pytest.raises(LoadError, match="line 1"):
        load_embeddings(["a 1 x"])


def test_load_embeddings_duplicate():
    with pytest.raises(LoadError, match="duplicate"):
        load_embeddings(["a 1 0", "a 0 1"])


def test_load_embeddings_zero_norm_rejected():
    with pytest.raises(LoadError, match="zero-norm"):
        load_embeddings(["a 0 0"])


def test_load_embeddings_300_dim_slice():
    row = "word " + " ".join(["0.1"] * 300)
    store = load_embeddings([row])
    assert store.dimension == 300


def test_cosine_identity_orthogonal_diagonal():
    u = np.asarray([3.0, 4.0])
    assert abs(cosine(u, u) - 1.0) <= 1e-12
    assert cosine(np.asarray([1.0, 0.0]), np.asarray([0.0, 1.0])) == pytest.approx(0.0)
    assert cosine(np.asarray([1.0, 0.0]), np.asarray([1.0, 1.0])) == \
        pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)


def test_cosine_errors():
    with pytest.raises(ValueError):
        cosine(np.zeros(2), np.ones(2))
    with pytest.raises(ValueError):
        cosine(np.ones(2), np.ones(3))


@settings(max_examples=60, derandomize=True)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.floats(0.1, 10.0))
def test_cosine_symmetry_and_scale(u, v, alpha):
    u, v = np.asarray(u), np.asarray(v)
    if np.linalg.norm(u) < 1e-6 or np.linalg.norm(v) < 1e-6:
        return
    assert abs(cosine(u, v) - cosine(v, u)) <= 1e-12
    assert abs(cosine(alpha * u, v) - cosine(u, v)) <= 1e-9
    assert -1.0 - 1e-12 <= cosine(u, v) <= 1.0 + 1e-12


def _brute_force_neighbors(word, store, threshold):
    out = []
    for other in store.words:
        if other == word:
            continue
        sim = cosine(store.vector(word), store.vector(other))
        if sim >= threshold:
            out.append((other, sim))
    out.sort(key=lambda p: (-p[1], p[0]))
    return out


def test_neighbors_matches_bruteforce():
    store = tiny_store({"a": [1, 0, 0], "b": [0.9, 0.1, 0], "c": [0, 0, 1]})
    got = neighbors("a", store, threshold=0.0)
    expected = _brute_force_neighbors("a", store, 0.0)
    assert [w for w, _ in got] == [w for w, _ in expected]
    assert np.allclose([s for _, s in got], [s for _, s in expected])


def test_neighbors_nothing_above_one():
    store = tiny_store({"a": [1, 0], "b": [0.5, 0.5], "c": [0, 1]})
    assert neighbors("a", store, threshold=1.0 + 1e-9) == []


def test_neighbors_threshold_monotonic():
    store = tiny_store({"a": [1, 0], "b": [0.9, 0.1], "c": [0.5, 0.5], "d": [0, 1]})
    low = {w for w, _ in neighbors("a", store, 0.2)}
    high = {w for w, _ in neighbors("a", store, 0.8)}
    assert high <= low


def test_neighbors_tag_filter():
    store = tiny_store({"good": [1, 0], "nice": [0.95, 0.05], "thing": [0.9, 0.1]})
    lex = TagLexicon({"good": PosTag.ADJ, "nice": PosTag.ADJ, "thing": PosTag.NOUN})
    got = neighbors("good", store, 0.0, tag_filter=PosTag.ADJ, tag_lexicon=lex)
    assert [w for w, _ in got] == ["nice"]


def test_neighbors_missing_word():
    store = tiny_store({"a": [1, 0]})
    with pytest.raises(KeyError):
        neighbors("zz", store, 0.0)


def test_neighbors_ordering_is_total():
    store = tiny_store({"a": [1, 0], "b": [0.6, 0.8], "c": [0.8, 0.6], "d": [0.6, 0.8]})
    got = neighbors("a", store, -1.0)
    sims = [s for _, s in got]
    assert sims == sorted(sims, reverse=True)
    for (w1, s1), (w2, s2) in zip(got, got[1:]):
        if s1 == s2:
            assert w1 < w2


def test_load_polarity():
    lex = load_polarity(["good\tPOSITIVE", "bad\tNEGATIVE"])
    assert lex.polarity("good") is Polarity.POSITIVE
    assert lex.polarity("bad") is Polarity.NEGATIVE
    assert lex.polarity("zzqx") is Polarity.NEUTRAL


def test_load_polarity_malformed():
    with pytest.raises(LoadError, match="line 1"):
        load_polarity(["good POSITIVE"])
    with pytest.raises(LoadError, match="line 1"):
        load_polarity(["good\tGREAT"])
