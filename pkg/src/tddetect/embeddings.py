"""Word and document embeddings.

Three models live here: the pretrained 100-d embedding loaded from a text
file (concept-word features), a 10-d CBOW word embedding trained on the
corpus (word-vector features), and a 20-d PV-DBOW document embedding
(document-vector features). Training is single-threaded and bitwise
deterministic for a given seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._embed_kernels import cbow_train, dbow_infer, dbow_train
from .errors import DataError

FORMAT_VERSION = 1


@dataclass
class WordEmbedding:
    dim: int
    vocab: list[str]
    vectors: np.ndarray  # |vocab| x dim
    config: dict = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.vocab)}

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def get(self, word: str) -> np.ndarray | None:
        idx = self._index.get(word)
        return None if idx is None else self.vectors[idx]

    def index(self, word: str) -> int | None:
        return self._index.get(word)


@dataclass
class DocEmbedding:
    dim: int
    doc_ids: list[str]
    doc_vectors: np.ndarray  # |docs| x dim
    vocab: list[str]
    output_weights: np.ndarray  # |vocab| x dim, frozen after training
    noise_cum: np.ndarray  # cumulative noise distribution for inference
    config: dict = field(default_factory=dict)
    empty_docs: set[str] = field(default_factory=set)
    _index: dict[str, int] = field(default_factory=dict, repr=False)
    _vocab_index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {d: i for i, d in enumerate(self.doc_ids)}
        if not self._vocab_index:
            self._vocab_index = {w: i for i, w in enumerate(self.vocab)}

    def get(self, doc_id: str) -> np.ndarray | None:
        idx = self._index.get(doc_id)
        return None if idx is None else self.doc_vectors[idx]


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; zero vectors yield 0.0 by convention."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def load_pretrained(
    path: str | Path, expected_dim: int = 100, restrict_vocab: set[str] | None = None
) -> WordEmbedding:
    """Load a plain-text "word v1 ... vN" embedding file."""
    path = Path(path)
    try:
        lines = path.read_text("utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read embedding file {path}: {exc}") from exc
    vocab: list[str] = []
    rows: list[np.ndarray] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != expected_dim + 1:
            raise DataError(
                f"{path}:{lineno}: expected {expected_dim} values, got {len(parts) - 1}"
            )
        word = parts[0]
        if restrict_vocab is not None and word not in restrict_vocab:
            continue
        try:
            rows.append(np.array([float(x) for x in parts[1:]]))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad float: {exc}") from exc
        vocab.append(word)
    if not vocab:
        raise DataError(f"{path}: no embedding rows retained")
    return WordEmbedding(dim=expected_dim, vocab=vocab, vectors=np.vstack(rows))


def _build_vocab(token_streams: list[list[str]], vocab_size: int) -> list[str]:
    counts: dict[str, int] = {}
    for stream in token_streams:
        for tok in stream:
            counts[tok] = counts.get(tok, 0) + 1
    # frequency descending, ties lexicographic
    ordered = sorted(counts, key=lambda w: (-counts[w], w))
    return ordered[: min(vocab_size, len(ordered))]


def _encode_streams(
    token_streams: list[list[str]], index: dict[str, int]
) -> tuple[np.ndarray, np.ndarray]:
    flat: list[int] = []
    offsets = [0]
    for stream in token_streams:
        flat.extend(index[t] for t in stream if t in index)
        offsets.append(len(flat))
    return np.array(flat, dtype=np.int32), np.array(offsets, dtype=np.int64)


def _noise_cum(token_streams: list[list[str]], vocab: list[str]) -> np.ndarray:
    index = {w: i for i, w in enumerate(vocab)}
    counts = np.zeros(len(vocab))
    for stream in token_streams:
        for tok in stream:
            i = index.get(tok)
            if i is not None:
                counts[i] += 1
    weights = counts**0.75
    total = weights.sum()
    if total == 0:
        weights = np.ones(len(vocab))
        total = float(len(vocab))
    return np.cumsum(weights / total)


def _draw_negs(rng: np.random.Generator, cum: np.ndarray, n: int) -> np.ndarray:
    return np.searchsorted(cum, rng.random(n)).astype(np.int32)


def train_cbow(
    token_streams: list[list[str]],
    dim: int = 10,
    vocab_size: int = 5000,
    seed: int = 0,
    window: int = 5,
    negative: int = 5,
    epochs: int = 5,
    lr: float = 0.025,
) -> WordEmbedding:
    """Train CBOW word vectors with negative sampling."""
    vocab = _build_vocab(token_streams, vocab_size)
    if len(vocab) < 2:
        raise DataError("need at least 2 distinct tokens to train word vectors")
    index = {w: i for i, w in enumerate(vocab)}
    flat, offsets = _encode_streams(token_streams, index)
    cum = _noise_cum(token_streams, vocab)
    rng = np.random.default_rng(seed)
    W = rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(vocab), dim))
    Wp = np.zeros((len(vocab), dim))
    negs = _draw_negs(rng, cum, epochs * len(flat) * negative)
    losses = cbow_train(flat, offsets, W, Wp, negs, window, negative, epochs, lr, lr / 25.0)
    config = {
        "dim": dim, "vocab_size": vocab_size, "seed": seed, "window": window,
        "negative": negative, "epochs": epochs, "lr": lr,
        "epoch_losses": [float(x) for x in losses],
    }
    return WordEmbedding(dim=dim, vocab=vocab, vectors=W, config=config)


def train_docvecs(
    doc_ids: list[str],
    token_streams: list[list[str]],
    dim: int = 20,
    vocab_size: int = 5000,
    seed: int = 0,
    negative: int = 5,
    epochs: int = 5,
    lr: float = 0.025,
) -> DocEmbedding:
    """Train PV-DBOW document vectors; empty-token docs get the zero vector."""
    if len(doc_ids) != len(token_streams):
        raise ValueError("doc_ids and token_streams must align")
    vocab = _build_vocab(token_streams, vocab_size)
    if len(vocab) < 2:
        raise DataError("need at least 2 distinct tokens to train doc vectors")
    index = {w: i for i, w in enumerate(vocab)}
    flat, offsets = _encode_streams(token_streams, index)
    cum = _noise_cum(token_streams, vocab)
    rng = np.random.default_rng(seed)
    D = rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(doc_ids), dim))
    Wp = np.zeros((len(vocab), dim))
    negs = _draw_negs(rng, cum, epochs * len(flat) * negative)
    losses = dbow_train(flat, offsets, D, Wp, negs, negative, epochs, lr, lr / 25.0)
    empty = set()
    for i, doc_id in enumerate(doc_ids):
        if offsets[i] == offsets[i + 1]:
            D[i] = 0.0
            empty.add(doc_id)
    config = {
        "dim": dim, "vocab_size": vocab_size, "seed": seed, "negative": negative,
        "epochs": epochs, "lr": lr, "epoch_losses": [float(x) for x in losses],
    }
    return DocEmbedding(
        dim=dim, doc_ids=list(doc_ids), doc_vectors=D, vocab=vocab,
        output_weights=Wp, noise_cum=cum, config=config, empty_docs=empty,
    )


def infer_docvec(
    model: DocEmbedding, tokens: list[str], seed: int = 0, steps: int = 50
) -> np.ndarray:
    """Fit a fresh doc vector against frozen output weights."""
    ids = [model._vocab_index[t] for t in tokens if t in model._vocab_index]
    if not ids:
        return np.zeros(model.dim)
    rng = np.random.default_rng(seed)
    vec = rng.uniform(-0.5 / model.dim, 0.5 / model.dim, size=model.dim)
    negative = int(model.config.get("negative", 5))
    lr = float(model.config.get("lr", 0.025))
    tok = np.array(ids, dtype=np.int32)
    negs = _draw_negs(rng, model.noise_cum, steps * len(tok) * negative)
    dbow_infer(tok, vec, model.output_weights, negs, negative, steps, lr, lr / 25.0)
    return vec


# ---------------------------------------------------------------------------
# serialization (versioned JSON; floats round-trip exactly)


def save_word_embedding(emb: WordEmbedding, path: str | Path) -> None:
    obj = {
        "format_version": FORMAT_VERSION,
        "kind": "word",
        "dim": emb.dim,
        "vocab": emb.vocab,
        "vectors": emb.vectors.tolist(),
        "config": emb.config,
    }
    Path(path).write_text(json.dumps(obj, sort_keys=True), "utf-8")


def load_word_embedding(path: str | Path) -> WordEmbedding:
    obj = json.loads(Path(path).read_text("utf-8"))
    return WordEmbedding(
        dim=obj["dim"], vocab=obj["vocab"], vectors=np.array(obj["vectors"]),
        config=obj.get("config", {}),
    )


def save_doc_embedding(emb: DocEmbedding, path: str | Path) -> None:
    obj = {
        "format_version": FORMAT_VERSION,
        "kind": "doc",
        "dim": emb.dim,
        "doc_ids": emb.doc_ids,
        "doc_vectors": emb.doc_vectors.tolist(),
        "vocab": emb.vocab,
        "output_weights": emb.output_weights.tolist(),
        "noise_cum": emb.noise_cum.tolist(),
        "config": emb.config,
        "empty_docs": sorted(emb.empty_docs),
    }
    Path(path).write_text(json.dumps(obj, sort_keys=True), "utf-8")


def load_doc_embedding(path: str | Path) -> DocEmbedding:
    obj = json.loads(Path(path).read_text("utf-8"))
    return DocEmbedding(
        dim=obj["dim"], doc_ids=obj["doc_ids"], doc_vectors=np.array(obj["doc_vectors"]),
        vocab=obj["vocab"], output_weights=np.array(obj["output_weights"]),
        noise_cum=np.array(obj["noise_cum"]), config=obj.get("config", {}),
        empty_docs=set(obj.get("empty_docs", [])),
    )
