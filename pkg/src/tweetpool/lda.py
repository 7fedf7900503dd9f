"""LDA trained by collapsed Gibbs sampling, with fold-in inference for single tweets.

Saved models are JSON objects::

    {"format": "tweetpool-lda", "version": 1,
     "config": {"topics", "alpha", "beta", "iterations", "seed"},
     "vocabulary": [token, ...], "vocabulary_counts": [int, ...],
     "topic_word": K x V counts, "doc_topic": D x K counts}

The smoothed distributions are recomputed from the counts on load.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit

from .corpus import Vocabulary
from .pooling import PooledCorpus

log = logging.getLogger(__name__)

FORMAT_NAME = "tweetpool-lda"
FORMAT_VERSION = 1
BURN_IN = 20


class LdaError(ValueError):
    pass


@dataclass(frozen=True)
class LdaConfig:
    topics: int = 10
    alpha: Optional[float] = None
    beta: float = 0.01
    iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.topics < 1:
            raise LdaError("topics must be >= 1")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.topics)
        if self.alpha <= 0 or self.beta <= 0:
            raise LdaError("alpha and beta must be positive")
        if self.iterations < 1:
            raise LdaError("iterations must be >= 1")


@njit(cache=True)
def _sweep(words, docs, z, ndk, nwk, nk, alpha, beta, vbeta, seed):
    np.random.seed(seed)
    K = nk.shape[0]
    cum = np.empty(K)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        k = z[i]
        ndk[d, k] -= 1
        nwk[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for j in range(K):
            total += (ndk[d, j] + alpha) * (nwk[j, w] + beta) / (nk[j] + vbeta)
            cum[j] = total
        r = np.random.random() * total
        k = 0
        while k < K - 1 and cum[k] <= r:
            k += 1
        z[i] = k
        ndk[d, k] += 1
        nwk[k, w] += 1
        nk[k] += 1


@njit(cache=True)
def _fold_in(words, offsets, phi, alpha, burn_in, sweeps, seed):
    np.random.seed(seed)
    K = phi.shape[0]
    n_docs = offsets.shape[0] - 1
    out = np.empty((n_docs, K))
    cum = np.empty(K)
    counts = np.zeros(K)
    for d in range(n_docs):
        lo = offsets[d]
        hi = offsets[d + 1]
        n = hi - lo
        if n == 0:
            out[d, :] = 1.0 / K
            continue
        z = np.empty(n, dtype=np.int64)
        counts[:] = 0.0
        for i in range(n):
            k = min(int(np.random.random() * K), K - 1)
            z[i] = k
            counts[k] += 1.0
        acc = np.zeros(K)
        for s in range(burn_in + sweeps):
            for i in range(n):
                w = words[lo + i]
                counts[z[i]] -= 1.0
                total = 0.0
                for j in range(K):
                    total += (counts[j] + alpha) * phi[j, w]
                    cum[j] = total
                r = np.random.random() * total
                k = 0
                while k < K - 1 and cum[k] <= r:
                    k += 1
                z[i] = k
                counts[k] += 1.0
            if s >= burn_in:
                for j in range(K):
                    acc[j] += (counts[j] + alpha) / (n + K * alpha)
        total = acc.sum()
        for j in range(K):
            out[d, j] = acc[j] / total
    return out


def _flatten(token_ids: Sequence[Sequence[int]]):
    lengths = np.fromiter((len(t) for t in token_ids), dtype=np.int64, count=len(token_ids))
    offsets = np.zeros(len(token_ids) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    words = np.fromiter((w for t in token_ids for w in t), dtype=np.int64, count=int(offsets[-1]))
    return words, offsets


def _smoothed(counts: np.ndarray, prior: float) -> np.ndarray:
    smoothed = counts + prior
    return smoothed / smoothed.sum(axis=1, keepdims=True)


class TopicModel:
    """Count tables of a trained LDA model plus their smoothed estimates.

    ``phi`` is K x V (topic-word), ``theta`` is D x K (document-topic).
    """

    def __init__(self, config: LdaConfig, vocab: Vocabulary, topic_word: np.ndarray,
                 doc_topic: np.ndarray, oov_count: int = 0):
        self.config = config
        self.vocab = vocab
        self.topic_word = topic_word
        self.doc_topic = doc_topic
        self.topic_totals = topic_word.sum(axis=1)
        self.oov_count = oov_count
        self.phi = _smoothed(topic_word, config.beta)
        self.theta = _smoothed(doc_topic, config.alpha)

    @property
    def n_topics(self) -> int:
        return self.config.topics

    def save(self, path) -> None:
        obj = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "config": asdict(self.config),
            "vocabulary": list(self.vocab.index_to_token),
            "vocabulary_counts": list(self.vocab.counts),
            "topic_word": self.topic_word.tolist(),
            "doc_topic": self.doc_topic.tolist(),
            "oov_count": self.oov_count,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)

    @classmethod
    def load(cls, path) -> "TopicModel":
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        if obj.get("format") != FORMAT_NAME or obj.get("version") != FORMAT_VERSION:
            raise LdaError(f"{path}: not a {FORMAT_NAME} v{FORMAT_VERSION} file")
        config = LdaConfig(**obj["config"])
        vocab = Vocabulary.from_tokens(obj["vocabulary"], obj["vocabulary_counts"])
        topic_word = np.array(obj["topic_word"], dtype=np.int64).reshape(config.topics, len(vocab))
        doc_topic = np.array(obj["doc_topic"], dtype=np.int64).reshape(-1, config.topics)
        return cls(config, vocab, topic_word, doc_topic, obj.get("oov_count", 0))


def train(pooled: PooledCorpus, vocab: Vocabulary, config: LdaConfig = LdaConfig(),
          callback: Optional[Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]] = None) -> TopicModel:
    """Fit LDA on the pooled documents.

    ``callback(sweep, topic_word, doc_topic, topic_totals)`` runs after every
    sweep, if given; it must not modify the arrays.
    """
    encoded = [vocab.encode(doc) for doc in pooled.docs]
    oov = sum(len(doc) for doc in pooled.docs) - sum(len(doc) for doc in encoded)
    if oov:
        log.info("dropped %d out-of-vocabulary tokens", oov)
    words, offsets = _flatten(encoded)
    if len(words) == 0:
        raise LdaError("no in-vocabulary tokens to train on")
    doc_index = np.repeat(np.arange(len(encoded), dtype=np.int64), np.diff(offsets))

    K, V = config.topics, len(vocab)
    rng = np.random.default_rng(config.seed)
    z = rng.integers(0, K, size=len(words)).astype(np.int64)
    nwk = np.zeros((K, V), dtype=np.int64)
    ndk = np.zeros((len(encoded), K), dtype=np.int64)
    np.add.at(nwk, (z, words), 1)
    np.add.at(ndk, (doc_index, z), 1)
    nk = nwk.sum(axis=1)

    sweep_seeds = rng.integers(0, 2**31 - 1, size=config.iterations)
    for it in range(config.iterations):
        _sweep(words, doc_index, z, ndk, nwk, nk, float(config.alpha), float(config.beta),
               V * float(config.beta), int(sweep_seeds[it]))
        if callback is not None:
            callback(it, nwk, ndk, nk)
    return TopicModel(config, vocab, nwk, ndk, oov)


def infer_topics(model: TopicModel, token_lists: Sequence[Sequence[str]], sweeps: int = 30,
                 seed: int = 0, burn_in: int = BURN_IN) -> np.ndarray:
    """Fold-in topic distributions for many tweets at once, with ``phi`` held fixed.

    Returns an ``(len(token_lists), K)`` array of row-stochastic vectors.
    """
    if sweeps < 1:
        raise LdaError("sweeps must be >= 1")
    words, offsets = _flatten([model.vocab.encode(toks) for toks in token_lists])
    return _fold_in(words, offsets, model.phi, float(model.config.alpha), burn_in, sweeps, seed)


def infer_tweet_topics(model: TopicModel, tokens: Sequence[str], sweeps: int = 30, seed: int = 0) -> np.ndarray:
    return infer_topics(model, [tokens], sweeps, seed)[0]


def log_likelihood(model: TopicModel, pooled: PooledCorpus) -> float:
    total = 0.0
    for d, doc in enumerate(pooled.docs):
        ids = model.vocab.encode(doc)
        if ids:
            total += float(np.log(model.theta[d] @ model.phi[:, ids]).sum())
    return total


def top_words(model: TopicModel, topic: int, n: int = 10) -> list[tuple[str, float]]:
    if not 0 <= topic < model.n_topics:
        raise LdaError(f"topic {topic} out of range 0..{model.n_topics - 1}")
    row = model.phi[topic]
    # stable sort on -phi keeps lower token indices first among ties
    order = np.argsort(-row, kind="stable")[:max(n, 0)]
    return [(model.vocab.token(int(i)), float(row[i])) for i in order]
