"""Desk-scale differentiable victim models.

Two architectures share one training/inference stack:

* ``BOE_LR`` - mean of token embeddings -> linear -> sigmoid. Simple enough
  that every gradient has a closed form, which the test suite exploits.
* ``CNN`` - 1-D convolutions over the embedding sequence (several filter
  widths, max-over-time pooling), one ReLU hidden layer on the pooled
  concatenation, then a sigmoid output.

Everything runs in float64 numpy. Training uses Adam with global-norm
gradient clipping and is bit-deterministic for a fixed seed. Dropout is
applied to the pooled features during training only; inference is
deterministic.
"""

import io
import json
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import CheckpointError, TrainingError
from .lexicon import EmbeddingStore
from .textcore import TaggedDocument

PROB_EPS = 1e-7
PAD, UNK = "<pad>", "<unk>"
_CKPT_VERSION = 1


class Architecture(Enum):
    BOE_LR = "boe_lr"
    CNN = "cnn"


@dataclass(frozen=True)
class ModelConfig:
    architecture: Architecture = Architecture.BOE_LR
    embedding_dim: int = 50
    max_sequence_length: int = 256
    dropout_rate: float = 0.2
    cnn_filter_widths: tuple[int, ...] = (1, 2, 3, 4)
    cnn_filters_per_width: int = 50
    hidden_units: int = 10
    seed: int = 0
    learning_rate: float = 5e-3
    clip_norm: float = 5.0
    epochs: int = 20
    batch_size: int = 32

    def __post_init__(self):
        if self.max_sequence_length < 1:
            raise ValueError("max_sequence_length must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.clip_norm <= 0.0:
            raise ValueError("clip_norm must be positive")


@dataclass(frozen=True)
class TrainingMeta:
    epochs_run: int = 0
    final_train_loss: float = float("nan")
    final_train_accuracy: float = float("nan")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def clamp_probability(p):
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def logistic_loss(y, y_hat) -> float:
    """-y log p - (1-y) log(1-p), with p clamped to [1e-7, 1 - 1e-7]."""
    p = clamp_probability(np.asarray(y_hat, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(-y * np.log(p) - (1.0 - y) * np.log1p(-p)))


def _loss_grad_wrt_logit(y: np.ndarray, p: np.ndarray) -> np.ndarray:
    """d loss / d logit; exactly zero where the probability is clamped."""
    inside = (p > PROB_EPS) & (p < 1.0 - PROB_EPS)
    return np.where(inside, p - y, 0.0)


class Classifier:
    """A trained model: config, vocabulary index, and weight tensors.

    Immutable after training; prediction and gradient calls are pure.
    """

    def __init__(self, config: ModelConfig, vocab: list[str],
                 params: dict[str, np.ndarray], meta: TrainingMeta = TrainingMeta()):
        self.config = config
        self.vocab = list(vocab)
        self.word_index = {w: i for i, w in enumerate(self.vocab)}
        if self.vocab[:2] != [PAD, UNK]:
            raise ValueError("vocabulary must start with the PAD and UNK rows")
        # Treated as immutable after training; train() is the only writer.
        self.params = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}
        self.meta = meta

    # -- encoding ---------------------------------------------------------

    def encode_words(self, words: list[str]) -> np.ndarray:
        ids = [self.word_index.get(w, 1) for w in words[: self.config.max_sequence_length]]
        if not ids:
            ids = [1]  # empty input predicts on the UNK-only sequence
        return np.asarray(ids, dtype=np.int64)

    def encode(self, doc: TaggedDocument) -> np.ndarray:
        return self.encode_words(doc.words())

    @property
    def vocabulary(self) -> list[str]:
        """Real words only (PAD/UNK excluded)."""
        return self.vocab[2:]

    def embedding_store(self) -> EmbeddingStore:
        """The model's own trained embedding rows as an EmbeddingStore.

        Zero-norm rows (PAD/UNK and any untouched zero row) are dropped
        because cosine queries would be undefined on them.
        """
        E = self.params["E"]
        words, rows = [], []
        for w in self.vocabulary:
            vec = E[self.word_index[w]]
            if np.linalg.norm(vec) > 0.0:
                words.append(w)
                rows.append(vec)
        return EmbeddingStore(words, np.stack(rows))

    # -- forward ----------------------------------------------------------

    def _pad_ids(self, idx_list: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
        min_len = 1
        if self.config.architecture is Architecture.CNN:
            min_len = max(self.config.cnn_filter_widths)
        lengths = np.asarray([len(ids) for ids in idx_list], dtype=np.int64)
        width = max(int(lengths.max()), min_len)
        ids = np.zeros((len(idx_list), width), dtype=np.int64)
        for i, row in enumerate(idx_list):
            ids[i, : len(row)] = row
        return ids, lengths

    def _forward(self, ids: np.ndarray, lengths: np.ndarray,
                 dropout_rng: np.random.Generator | None = None) -> dict:
        X = self.params["E"][ids]  # (B, T, d); PAD row is all zeros
        if self.config.architecture is Architecture.BOE_LR:
            return self._forward_boe(ids, lengths, X)
        return self._forward_cnn(ids, lengths, X, dropout_rng)

    def _forward_boe(self, ids, lengths, X) -> dict:
        B, T, _ = X.shape
        mask = np.arange(T)[None, :] < lengths[:, None]
        means = (X * mask[:, :, None]).sum(axis=1) / lengths[:, None]
        z = means @ self.params["w"] + self.params["b"][0]
        p = _sigmoid(z)
        return {"ids": ids, "lengths": lengths, "mask": mask, "X": X,
                "means": means, "p": p}

    def _forward_cnn(self, ids, lengths, X, dropout_rng) -> dict:
        cfg = self.config
        B, T, d = X.shape
        kmax = max(cfg.cnn_filter_widths)
        eff_len = np.maximum(lengths, kmax)  # short docs run over zero padding
        per_width = []
        pooled_parts = []
        for k in cfg.cnn_filter_widths:
            win = np.lib.stride_tricks.sliding_window_view(X, k, axis=1)
            win = np.ascontiguousarray(win.transpose(0, 1, 3, 2)).reshape(B, T - k + 1, k * d)
            z = win @ self.params[f"W{k}"] + self.params[f"b{k}"]
            a = np.maximum(z, 0.0)
            valid = np.arange(T - k + 1)[None, :] <= (eff_len - k)[:, None]
            a_masked = np.where(valid[:, :, None], a, -1.0)
            arg = a_masked.argmax(axis=1)                      # (B, F)
            pooled = np.take_along_axis(a_masked, arg[:, None, :], axis=1)[:, 0, :]
            per_width.append({"k": k, "win": win, "z": z, "arg": arg})
            pooled_parts.append(pooled)
        pooled = np.concatenate(pooled_parts, axis=1)          # (B, C)
        if dropout_rng is not None and cfg.dropout_rate > 0.0:
            keep = (dropout_rng.random(pooled.shape) >= cfg.dropout_rate)
            drop_mask = keep / (1.0 - cfg.dropout_rate)
        else:
            drop_mask = None
        pooled_d = pooled * drop_mask if drop_mask is not None else pooled
        h_pre = pooled_d @ self.params["A"].T + self.params["c"]
        h = np.maximum(h_pre, 0.0)
        z_out = h @ self.params["u"] + self.params["d"][0]
        p = _sigmoid(z_out)
        return {"ids": ids, "lengths": lengths, "X": X, "per_width": per_width,
                "pooled_d": pooled_d, "drop_mask": drop_mask, "h_pre": h_pre,
                "h": h, "p": p}

    # -- backward ---------------------------------------------------------

    def _backward(self, cache: dict, dz: np.ndarray) -> tuple[dict[str, np.ndarray], np.ndarray]:
        """Parameter grads and input-embedding grads dX for upstream dz (B,)."""
        if self.config.architecture is Architecture.BOE_LR:
            return self._backward_boe(cache, dz)
        return self._backward_cnn(cache, dz)

    def _backward_boe(self, cache, dz):
        ids, lengths, mask, X = cache["ids"], cache["lengths"], cache["mask"], cache["X"]
        means = cache["means"]
        grads = {
            "w": means.T @ dz,
            "b": np.asarray([dz.sum()]),
        }
        dmeans = dz[:, None] * self.params["w"][None, :]
        dX = (dmeans[:, None, :] / lengths[:, None, None]) * mask[:, :, None]
        grads["E"] = self._scatter_embedding_grads(ids, mask, dX)
        return grads, dX

    def _backward_cnn(self, cache, dz):
        cfg = self.config
        ids, lengths, X = cache["ids"], cache["lengths"], cache["X"]
        B, T, d = X.shape
        h, h_pre, pooled_d = cache["h"], cache["h_pre"], cache["pooled_d"]
        grads = {"u": h.T @ dz, "d": np.asarray([dz.sum()])}
        dh = dz[:, None] * self.params["u"][None, :]
        dh_pre = dh * (h_pre > 0.0)
        grads["A"] = dh_pre.T @ pooled_d
        grads["c"] = dh_pre.sum(axis=0)
        dpooled = dh_pre @ self.params["A"]
        if cache["drop_mask"] is not None:
            dpooled = dpooled * cache["drop_mask"]
        F = cfg.cnn_filters_per_width
        dX = np.zeros_like(X)
        for i, rec in enumerate(cache["per_width"]):
            k, win, z, arg = rec["k"], rec["win"], rec["z"], rec["arg"]
            dp = dpooled[:, i * F:(i + 1) * F]                  # (B, F)
            da = np.zeros_like(z)
            np.put_along_axis(da, arg[:, None, :], dp[:, None, :], axis=1)
            dzk = da * (z > 0.0)
            Tk = z.shape[1]
            grads[f"W{k}"] = win.reshape(B * Tk, k * d).T @ dzk.reshape(B * Tk, F)
            grads[f"b{k}"] = dzk.sum(axis=(0, 1))
            dwin = (dzk @ self.params[f"W{k}"].T).reshape(B, Tk, k, d)
            for j in range(k):
                dX[:, j:j + Tk, :] += dwin[:, :, j, :]
        mask = np.arange(T)[None, :] < lengths[:, None]
        grads["E"] = self._scatter_embedding_grads(ids, mask, dX)
        return grads, dX

    def _scatter_embedding_grads(self, ids, mask, dX):
        dE = np.zeros_like(self.params["E"])
        np.add.at(dE, ids[mask], dX[mask])
        dE[0] = 0.0  # PAD and UNK rows stay frozen at zero
        dE[1] = 0.0
        return dE

    # -- public prediction / gradient API ----------------------------------

    def predict_from_ids(self, idx_list: list[np.ndarray]) -> np.ndarray:
        ids, lengths = self._pad_ids(idx_list)
        return clamp_probability(self._forward(ids, lengths)["p"])

    def predict_batch(self, docs: list[TaggedDocument]) -> np.ndarray:
        return self.predict_from_ids([self.encode(doc) for doc in docs])

    def predict_proba(self, doc: TaggedDocument) -> float:
        """p(y=1 | doc); deterministic, dropout disabled."""
        return float(self.predict_batch([doc])[0])

    def forward_from_embeddings(self, X: np.ndarray) -> float:
        """Probability from an explicit (n, embedding_dim) input matrix.

        This is the differentiable core: finite-difference checks perturb X
        directly and compare against grad_wrt_embeddings.
        """
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        if self.config.architecture is Architecture.CNN:
            kmax = max(self.config.cnn_filter_widths)
            if n < kmax:
                X = np.vstack([X, np.zeros((kmax - n, X.shape[1]))])
        lengths = np.asarray([n], dtype=np.int64)
        if self.config.architecture is Architecture.BOE_LR:
            cache = self._forward_boe(None, lengths, X[None, :, :])
        else:
            cache = self._forward_cnn(None, lengths, X[None, :, :], None)
        return float(clamp_probability(cache["p"][0]))

    def input_gradients(self, idx_list: list[np.ndarray], ys: np.ndarray,
                        scale: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """d loss_i / d X_i for every sequence, stacked as (B, T, d).

        ``scale`` multiplies each per-example logit gradient (used for
        averaging over a sample); lengths are returned alongside.
        """
        ids, lengths = self._pad_ids(idx_list)
        cache = self._forward(ids, lengths)
        dz = _loss_grad_wrt_logit(np.asarray(ys, dtype=np.float64),
                                  clamp_probability(cache["p"]))
        if scale is not None:
            dz = dz * scale
        _, dX = self._backward(cache, dz)
        return dX, lengths

    def grad_wrt_embeddings(self, doc: TaggedDocument, y: int) -> np.ndarray:
        """Exact gradient of logistic_loss(y, predict_proba) per token row.

        Shape (n, embedding_dim) where n is the truncated token count.
        """
        ids = self.encode(doc)
        dX, _ = self.input_gradients([ids], np.asarray([y]))
        return dX[0, : len(ids), :]


# -- initialization and training -------------------------------------------


def _init_params(config: ModelConfig, vocab: list[str], rng: np.random.Generator,
                 store: EmbeddingStore | None) -> dict[str, np.ndarray]:
    d = config.embedding_dim
    if store is not None and store.dimension != d:
        raise TrainingError(
            f"embedding_dim {d} does not match store dimension {store.dimension}")
    E = np.zeros((len(vocab), d))
    for i, w in enumerate(vocab):
        if i < 2:
            continue  # PAD and UNK stay zero
        if store is not None and w in store:
            E[i] = store.vector(w)
        else:
            E[i] = rng.uniform(-0.05, 0.05, size=d)
    params = {"E": E}
    if config.architecture is Architecture.BOE_LR:
        params["w"] = np.zeros(d)
        params["b"] = np.zeros(1)
        return params
    F = config.cnn_filters_per_width
    for k in config.cnn_filter_widths:
        fan_in = k * d
        params[f"W{k}"] = rng.standard_normal((fan_in, F)) * np.sqrt(2.0 / fan_in)
        params[f"b{k}"] = np.zeros(F)
    C = F * len(config.cnn_filter_widths)
    H = config.hidden_units
    params["A"] = rng.standard_normal((H, C)) * np.sqrt(2.0 / C)
    params["c"] = np.zeros(H)
    params["u"] = np.zeros(H)
    params["d"] = np.zeros(1)
    return params


def _clip_global_norm(grads: dict[str, np.ndarray], clip_norm: float) -> None:
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > clip_norm:
        scale = clip_norm / total
        for g in grads.values():
            g *= scale


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        for k, g in grads.items():
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * (g * g)
            mhat = self.m[k] / (1 - self.b1 ** self.t)
            vhat = self.v[k] / (1 - self.b2 ** self.t)
            params[k] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def train(docs: list[TaggedDocument], config: ModelConfig,
          store: EmbeddingStore | None = None) -> Classifier:
    """Train a classifier on labeled tagged documents.

    Deterministic given config.seed. Embedding rows are initialized from
    ``store`` where the word is present, else uniform(-0.05, 0.05), and are
    trainable; PAD/UNK rows stay zero.
    """
    if not docs:
        raise TrainingError("empty training corpus")
    ys = np.asarray([doc.label for doc in docs], dtype=np.float64)
    if any(doc.label not in (0, 1) for doc in docs):
        raise TrainingError("all training documents need a binary label")
    if len(set(int(y) for y in ys)) < 2:
        raise TrainingError("training corpus must contain both classes")

    vocab = [PAD, UNK] + sorted({w for doc in docs for w in doc.words()})
    rng = np.random.default_rng(config.seed)
    work = _init_params(config, vocab, rng, store)
    model = Classifier(config, vocab, work)

    idx_list = [model.encode(doc) for doc in docs]
    adam = _Adam(work, config.learning_rate)
    n = len(docs)
    for _epoch in range(config.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            batch = order[lo:lo + config.batch_size]
            ids, lengths = model._pad_ids([idx_list[i] for i in batch])
            cache = model._forward(ids, lengths, dropout_rng=rng)
            p = clamp_probability(cache["p"])
            dz = _loss_grad_wrt_logit(ys[batch], p) / len(batch)
            grads, _ = model._backward(cache, dz)
            _clip_global_norm(grads, config.clip_norm)
            adam.step(work, grads)

    probs = model.predict_from_ids(idx_list)
    meta = TrainingMeta(
        epochs_run=config.epochs,
        final_train_loss=logistic_loss(ys, probs),
        final_train_accuracy=float(np.mean((probs >= 0.5) == (ys == 1.0))),
    )
    return Classifier(config, vocab, work, meta)


# -- checkpoints -------------------------------------------------------------


def _config_to_dict(config: ModelConfig) -> dict:
    out = asdict(config)
    out["architecture"] = config.architecture.value
    out["cnn_filter_widths"] = list(config.cnn_filter_widths)
    return out


def _config_from_dict(data: dict) -> ModelConfig:
    data = dict(data)
    data["architecture"] = Architecture(data["architecture"])
    data["cnn_filter_widths"] = tuple(data["cnn_filter_widths"])
    return ModelConfig(**data)


def save_checkpoint(model: Classifier, path) -> None:
    header = {
        "version": _CKPT_VERSION,
        "config": _config_to_dict(model.config),
        "meta": asdict(model.meta),
        "param_names": sorted(model.params),
    }
    arrays = {f"param_{k}": v for k, v in model.params.items()}
    with open(path, "wb") as fh:
        np.savez(fh, header=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8),
                 vocab=np.asarray(model.vocab), **arrays)


def load_checkpoint(path) -> Classifier:
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(bytes(data["header"]).decode())
            if header.get("version") != _CKPT_VERSION:
                raise CheckpointError(f"unsupported checkpoint version {header.get('version')!r}")
            config = _config_from_dict(header["config"])
            vocab = [str(w) for w in data["vocab"]]
            params = {k: data[f"param_{k}"] for k in header["param_names"]}
            meta = TrainingMeta(**header["meta"])
    except CheckpointError:
        raise
    except Exception as exc:
        raise CheckpointError(f"cannot load checkpoint {path}: {exc}") from exc
    return Classifier(config, vocab, params, meta)
