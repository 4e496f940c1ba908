import numpy as np
import pytest

from semattack.classifier import Architecture, Classifier, ModelConfig
from semattack.lexicon import EmbeddingStore, PolarityLexicon, Polarity
from semattack.textcore import TagLexicon, PosTag


@pytest.fixture(scope="session")
def toy_tag_lexicon() -> TagLexicon:
    return TagLexicon({
        "good": PosTag.ADJ, "nice": PosTag.ADJ, "fantastic": PosTag.ADJ,
        "bad": PosTag.ADJ, "additional": PosTag.ADJ, "beneficial": PosTag.ADJ,
        "basic": PosTag.ADJ,
        "thing": PosTag.NOUN, "sound": PosTag.NOUN, "speaker": PosTag.NOUN,
        "gps": PosTag.NOUN, "reception": PosTag.NOUN,
        "enormously": PosTag.ADV, "very": PosTag.ADV, "highly": PosTag.ADV,
        "works": PosTag.VERB, "breaks": PosTag.VERB,
    })


@pytest.fixture(scope="session")
def toy_polarity() -> PolarityLexicon:
    return PolarityLexicon({
        "good": Polarity.POSITIVE, "nice": Polarity.POSITIVE,
        "fantastic": Polarity.POSITIVE, "beneficial": Polarity.POSITIVE,
        "bad": Polarity.NEGATIVE,
    })


def tiny_store(words_vectors: dict[str, list[float]]) -> EmbeddingStore:
    words = list(words_vectors)
    return EmbeddingStore(words, np.asarray([words_vectors[w] for w in words], dtype=float))


def hand_boe_model(word_vectors: dict[str, list[float]], w, b=0.0,
                   max_len: int = 256) -> Classifier:
    """BOE_LR with explicit embeddings and linear weights, for closed forms."""
    dim = len(next(iter(word_vectors.values())))
    vocab = ["<pad>", "<unk>"] + sorted(word_vectors)
    E = np.zeros((len(vocab), dim))
    for i, word in enumerate(vocab[2:], start=2):
        E[i] = word_vectors[word]
    config = ModelConfig(architecture=Architecture.BOE_LR, embedding_dim=dim,
                         max_sequence_length=max_len)
    params = {"E": E, "w": np.asarray(w, dtype=float), "b": np.asarray([b], dtype=float)}
    return Classifier(config, vocab, params)


def random_cnn_model(rng: np.random.Generator, vocab_words: list[str], dim: int = 12,
                     filters: int = 6, widths=(1, 2, 3), hidden: int = 4,
                     max_len: int = 64) -> Classifier:
    vocab = ["<pad>", "<unk>"] + sorted(vocab_words)
    E = np.zeros((len(vocab), dim))
    E[2:] = rng.normal(0, 0.5, size=(len(vocab) - 2, dim))
    params = {"E": E}
    for k in widths:
        params[f"W{k}"] = rng.normal(0, 0.4, size=(k * dim, filters))
        params[f"b{k}"] = rng.normal(0, 0.1, size=filters)
    C = filters * len(widths)
    params["A"] = rng.normal(0, 0.4, size=(hidden, C))
    params["c"] = rng.normal(0, 0.1, size=hidden)
    params["u"] = rng.normal(0, 0.5, size=hidden)
    params["d"] = rng.normal(0, 0.1, size=1)
    config = ModelConfig(architecture=Architecture.CNN, embedding_dim=dim,
                         cnn_filter_widths=tuple(widths), cnn_filters_per_width=filters,
                         hidden_units=hidden, max_sequence_length=max_len)
    return Classifier(config, vocab, params)


def finite_difference_input_grads(model: Classifier, X: np.ndarray, y: int,
                                  h: float = 1e-4) -> np.ndarray:
    """Independent central-difference oracle for d loss / d input embedding."""
    from semattack.classifier import logistic_loss

    grad = np.zeros_like(X)
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            up, down = X.copy(), X.copy()
            up[i, j] += h
            down[i, j] -= h
            grad[i, j] = (logistic_loss(y, model.forward_from_embeddings(up))
                          - logistic_loss(y, model.forward_from_embeddings(down))) / (2 * h)
    return grad
