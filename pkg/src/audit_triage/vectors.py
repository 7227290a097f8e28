"""Numeric substrate: count vectors, trained word embeddings, cosine.

Embeddings are trained with skip-gram and negative sampling over the
normalized token lists, single-threaded and fully reproducible from the
seed. Document vectors are plain averages of word vectors, and cosine
similarity of two zero vectors (or one) is defined as 0 so degenerate
documents never look similar to anything.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .textprep import TokenList, Vocabulary, build_vocabulary


@dataclass
class SparseVector:
    """Sorted (index, count) pairs over a fixed dimension."""

    dimension: int
    indices: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if self.indices.size:
            if not np.all(np.diff(self.indices) > 0):
                raise ValueError("sparse indices must be strictly increasing")
            if self.indices[0] < 0 or self.indices[-1] >= self.dimension:
                raise ValueError("sparse index out of range")
            if not np.all(self.counts > 0):
                raise ValueError("sparse counts must be positive")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(math.sqrt(float(self.counts @ self.counts)))

    def dot(self, other: "SparseVector") -> float:
        if self.dimension != other.dimension:
            raise ValueError(f"dimension mismatch: {self.dimension} vs {other.dimension}")
        common, ia, ib = np.intersect1d(self.indices, other.indices,
                                        assume_unique=True, return_indices=True)
        if common.size == 0:
            return 0.0
        return float(self.counts[ia] @ other.counts[ib])

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dimension)
        dense[self.indices] = self.counts
        return dense


def count_vectorize(tokens: TokenList, vocab: Vocabulary) -> SparseVector:
    """Token counts over the vocabulary; out-of-vocabulary tokens are ignored."""
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty")
    counts: dict[int, int] = {}
    for token in tokens:
        idx = vocab.index.get(token)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return SparseVector(len(vocab), np.empty(0, dtype=np.int64), np.empty(0))
    items = sorted(counts.items())
    return SparseVector(len(vocab),
                        np.array([i for i, _ in items], dtype=np.int64),
                        np.array([c for _, c in items], dtype=np.float64))


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors; 0 if either has zero norm."""
    if isinstance(a, SparseVector) and isinstance(b, SparseVector):
        na, nb = a.norm(), b.norm()
        if na == 0.0 or nb == 0.0:
            return 0.0
        return a.dot(b) / (na * nb)
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ValueError(f"dimension mismatch: {av.shape} vs {bv.shape}")
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(av @ bv) / (na * nb)


@dataclass(frozen=True)
class EmbeddingConfig:
    dim: int = 50
    window: int = 5
    epochs: int = 5
    learning_rate: float = 0.05
    negatives: int = 5
    min_count: int = 1
    batch_size: int = 1024
    seed: int = 0


@dataclass
class EmbeddingModel:
    """Vocabulary plus one dense vector per word."""

    vocab: Vocabulary
    matrix: np.ndarray  # (V, dim)
    config: EmbeddingConfig
    loss_by_epoch: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def vector(self, token: str) -> np.ndarray | None:
        idx = self.vocab.index.get(token)
        return None if idx is None else self.matrix[idx]


def _skipgram_pairs(docs: list[list[int]], window: int) -> np.ndarray:
    pairs = []
    for doc in docs:
        length = len(doc)
        for t in range(length):
            lo = max(0, t - window)
            hi = min(length, t + window + 1)
            for c in range(lo, hi):
                if c != t:
                    pairs.append((doc[t], doc[c]))
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def train_embeddings(token_lists: list[TokenList], config: EmbeddingConfig | None = None,
                     vocab: Vocabulary | None = None) -> EmbeddingModel:
    """Train skip-gram word vectors with negative sampling.

    Deterministic for a fixed (corpus, config) pair. Records the mean
    per-pair objective for every epoch so training health is inspectable.
    """
    cfg = config or EmbeddingConfig()
    if cfg.dim < 2:
        raise ValueError(f"embedding dim must be >= 2, got {cfg.dim}")
    if vocab is None:
        vocab = build_vocabulary(token_lists, cfg.min_count)
    if len(vocab) < 2:
        raise ValueError("need a vocabulary of at least 2 tokens to train embeddings")

    docs = []
    for tl in token_lists:
        encoded = [vocab.index[t] for t in tl.tokens if t in vocab.index]
        if len(encoded) >= 2:
            docs.append(encoded)
    pairs = _skipgram_pairs(docs, cfg.window)
    if pairs.shape[0] == 0:
        raise ValueError("corpus has no context pairs (documents too short?)")

    rng = np.random.default_rng(cfg.seed)
    v_size = len(vocab)
    w_in = (rng.random((v_size, cfg.dim)) - 0.5) / cfg.dim
    w_out = np.zeros((v_size, cfg.dim))

    freqs = np.array([vocab.frequency[t] for t in vocab.tokens()], dtype=np.float64)
    neg_probs = freqs ** 0.75
    neg_probs /= neg_probs.sum()

    n_pairs = pairs.shape[0]
    batches_per_epoch = math.ceil(n_pairs / cfg.batch_size)
    total_batches = max(1, cfg.epochs * batches_per_epoch)
    losses: list[float] = []
    step = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n_pairs)
        epoch_loss = 0.0
        for start in range(0, n_pairs, cfg.batch_size):
            batch = pairs[order[start:start + cfg.batch_size]]
            centers, contexts = batch[:, 0], batch[:, 1]
            b = centers.shape[0]
            negs = rng.choice(v_size, size=(b, cfg.negatives), p=neg_probs)

            lr = cfg.learning_rate * max(1e-4, 1.0 - step / total_batches)
            step += 1

            v = w_in[centers]                   # (b, d)
            u = w_out[contexts]                 # (b, d)
            un = w_out[negs]                    # (b, k, d)

            pos_score = np.clip(np.einsum("bd,bd->b", v, u), -60.0, 60.0)
            neg_score = np.clip(np.einsum("bkd,bd->bk", un, v), -60.0, 60.0)
            epoch_loss += float(-np.sum(_log_sigmoid(pos_score))
                                - np.sum(_log_sigmoid(-neg_score)))

            g_pos = 1.0 / (1.0 + np.exp(-pos_score)) - 1.0   # (b,)
            g_neg = 1.0 / (1.0 + np.exp(-neg_score))         # (b, k)

            grad_v = g_pos[:, None] * u + np.einsum("bk,bkd->bd", g_neg, un)
            grad_u = g_pos[:, None] * v
            grad_un = g_neg[:, :, None] * v[:, None, :]

            # rows repeated inside a batch take the average of their pair
            # gradients, keeping step sizes vocabulary-independent
            cnt_in = np.bincount(centers, minlength=v_size)
            grad_v *= 1.0 / cnt_in[centers][:, None]
            out_rows = np.concatenate([contexts, negs.reshape(-1)])
            grad_out = np.vstack([grad_u, grad_un.reshape(-1, cfg.dim)])
            cnt_out = np.bincount(out_rows, minlength=v_size)
            grad_out *= 1.0 / cnt_out[out_rows][:, None]

            np.add.at(w_in, centers, -lr * grad_v)
            np.add.at(w_out, out_rows, -lr * grad_out)
        losses.append(epoch_loss / n_pairs)

    return EmbeddingModel(vocab=vocab, matrix=w_in, config=cfg, loss_by_epoch=losses)


def doc_vector(tokens: TokenList, model: EmbeddingModel) -> np.ndarray:
    """Mean of in-vocabulary word vectors; all-zero when nothing is known."""
    idxs = [model.vocab.index[t] for t in tokens if t in model.vocab.index]
    if not idxs:
        return np.zeros(model.dim)
    return model.matrix[idxs].mean(axis=0)


def doc_vectors(token_lists: list[TokenList], model: EmbeddingModel) -> np.ndarray:
    """Stacked document vectors, one row per token list."""
    out = np.zeros((len(token_lists), model.dim))
    for i, tl in enumerate(token_lists):
        out[i] = doc_vector(tl, model)
    return out


def save_embeddings(model: EmbeddingModel, path) -> None:
    """Text export: a JSON header line, then one `token freq v...` line per word.

    Floats are written with shortest round-trip formatting, so a load
    reproduces the matrix bit for bit.
    """
    header = {
        "vocab_size": len(model.vocab),
        "dim": model.dim,
        "config": asdict(model.config),
        "loss_by_epoch": [float(x) for x in model.loss_by_epoch],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for token in model.vocab.tokens():
            row = model.matrix[model.vocab.index[token]]
            values = " ".join(repr(float(x)) for x in row)
            fh.write(f"{token} {model.vocab.frequency[token]} {values}\n")


def embedding_to_dict(model: EmbeddingModel) -> dict:
    """JSON-ready form used when a model is nested inside another artifact."""
    tokens = model.vocab.tokens()
    return {
        "config": asdict(model.config),
        "tokens": tokens,
        "frequencies": [model.vocab.frequency[t] for t in tokens],
        "matrix": [[float(v) for v in model.matrix[model.vocab.index[t]]] for t in tokens],
        "loss_by_epoch": [float(x) for x in model.loss_by_epoch],
    }


def embedding_from_dict(raw: dict) -> EmbeddingModel:
    cfg = EmbeddingConfig(**raw["config"])
    tokens = list(raw["tokens"])
    vocab = Vocabulary(
        index={t: i for i, t in enumerate(tokens)},
        frequency={t: int(f) for t, f in zip(tokens, raw["frequencies"])},
        min_count=cfg.min_count,
    )
    return EmbeddingModel(vocab=vocab, matrix=np.array(raw["matrix"], dtype=np.float64),
                          config=cfg, loss_by_epoch=[float(x) for x in raw["loss_by_epoch"]])


def load_embeddings(path) -> EmbeddingModel:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        dim = int(header["dim"])
        index: dict[str, int] = {}
        frequency: dict[str, int] = {}
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(" ")
            token, freq = parts[0], int(parts[1])
            index[token] = len(rows)
            frequency[token] = freq
            rows.append([float(x) for x in parts[2:2 + dim]])
    cfg = EmbeddingConfig(**header["config"])
    vocab = Vocabulary(index=index, frequency=frequency, min_count=cfg.min_count)
    model = EmbeddingModel(vocab=vocab, matrix=np.array(rows, dtype=np.float64), config=cfg,
                           loss_by_epoch=[float(x) for x in header.get("loss_by_epoch", [])])
    if len(model.vocab) != int(header["vocab_size"]):
        raise ValueError("embedding file is truncated")
    return model
