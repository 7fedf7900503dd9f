"""Evaluation of topic decompositions: cluster quality, classification, retrieval, runtime."""
from __future__ import annotations

import json
import logging
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus, build_vocabulary, time_split, tokenize_corpus
from .lda import LdaConfig, TopicModel, infer_topics, train
from .pooling import SCHEMES, pool

log = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-9


class EvalError(ValueError):
    pass


# ---------------------------------------------------------------- clustering


def assign_clusters(model: TopicModel, token_lists: Sequence[Sequence[str]], sweeps: int = 30,
                    seed: int = 0) -> np.ndarray:
    """Most probable topic per tweet; ties go to the lowest topic index."""
    return np.argmax(infer_topics(model, token_lists, sweeps, seed), axis=1)


def _aligned(clusters, labels) -> tuple[list, list]:
    if isinstance(clusters, Mapping):
        if not isinstance(labels, Mapping) or clusters.keys() != labels.keys():
            raise EvalError("clusters and labels must cover the same tweet ids")
        keys = list(clusters)
        return [clusters[k] for k in keys], [labels[k] for k in keys]
    clusters, labels = list(clusters), list(labels)
    if len(clusters) != len(labels):
        raise EvalError("clusters and labels differ in length")
    return clusters, labels


def contingency(clusters, labels) -> np.ndarray:
    """Counts ``|T_i ∩ Q_j|`` with clusters on rows and labels on columns."""
    c, q = _aligned(clusters, labels)
    if not c:
        raise EvalError("empty assignment")
    rows = {x: i for i, x in enumerate(dict.fromkeys(c))}
    cols = {x: j for j, x in enumerate(dict.fromkeys(q))}
    table = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for a, b in zip(c, q):
        table[rows[a], cols[b]] += 1
    return table


def purity(clusters, labels) -> float:
    """Fraction of tweets carrying the majority label of their cluster."""
    table = contingency(clusters, labels)
    return float(table.max(axis=1).sum() / table.sum())


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(clusters, labels) -> float:
    """Normalised mutual information ``2 I(T;Q) / (H(T) + H(Q))``.

    Identical partitions score exactly 1. If either side has zero entropy
    and the partitions differ, the score is 0.
    """
    table = contingency(clusters, labels)
    n = int(table.sum())
    nonzero = table > 0
    if nonzero.sum(axis=0).max() == 1 and nonzero.sum(axis=1).max() == 1:
        return 1.0
    h_t = _entropy(table.sum(axis=1), n)
    h_q = _entropy(table.sum(axis=0), n)
    if h_t == 0.0 or h_q == 0.0:
        return 0.0
    outer = np.outer(table.sum(axis=1), table.sum(axis=0))
    joint = table[nonzero]
    mi = float((joint / n * np.log(joint * n / outer[nonzero])).sum())
    return min(1.0, max(0.0, 2.0 * mi / (h_t + h_q)))


# ------------------------------------------------------------ classification


class GaussianNaiveBayes:
    def __init__(self, var_floor: float = VARIANCE_FLOOR):
        self.var_floor = var_floor

    def fit(self, X: np.ndarray, y: Sequence) -> "GaussianNaiveBayes":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.classes_ = np.unique(y)
        self.means_ = np.array([X[y == c].mean(axis=0) for c in self.classes_])
        self.vars_ = np.array([X[y == c].var(axis=0) for c in self.classes_]) + self.var_floor
        self.log_priors_ = np.log(np.array([(y == c).mean() for c in self.classes_]))
        return self

    def log_posterior(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        ll = -0.5 * (np.log(2 * np.pi * self.vars_)[None, :, :]
                     + (X[:, None, :] - self.means_[None, :, :]) ** 2 / self.vars_[None, :, :])
        return ll.sum(axis=2) + self.log_priors_[None, :]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classes_[np.argmax(self.log_posterior(X), axis=1)]


def macro_f1(y_true: Sequence, y_pred: Sequence, classes: Iterable) -> float:
    y_true, y_pred = list(y_true), list(y_pred)
    scores = []
    for c in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        scores.append(0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn))
    return float(np.mean(scores)) if scores else 0.0


def classification_f1(train_features: np.ndarray, train_labels: Sequence[str],
                      test_features: np.ndarray, test_labels: Sequence[str]) -> float:
    """Macro F1 of Gaussian naive Bayes on topic-distribution features.

    Labels that never occur in training are left out of the average.
    """
    if len(test_labels) == 0:
        return 0.0
    clf = GaussianNaiveBayes().fit(train_features, train_labels)
    known = set(clf.classes_.tolist())
    unseen = sorted(set(test_labels) - known)
    if unseen:
        log.warning("labels absent from training excluded from F1: %s", unseen)
    pred = clf.predict(test_features).tolist()
    classes = sorted(known & (set(test_labels) | set(pred)))
    return macro_f1(test_labels, pred, classes)


# ----------------------------------------------------------------- retrieval


@dataclass(frozen=True)
class RetrievalScores:
    precision: float
    recall: float
    f1: float


def retrieval_scores(train_features: np.ndarray, train_labels: Sequence[str],
                     test_features: np.ndarray, test_labels: Sequence[str], k: int = 10) -> RetrievalScores:
    """Top-k cosine retrieval of training tweets for each test tweet.

    Training rows must be in timestamp order: equal similarities rank the
    earlier tweet first. Scores are averaged over test tweets.
    """
    if k <= 0:
        raise EvalError("k must be positive")
    train_labels = np.asarray(train_labels)
    if len(test_labels) == 0 or len(train_labels) == 0:
        return RetrievalScores(0.0, 0.0, 0.0)
    a = np.asarray(train_features, dtype=float)
    b = np.asarray(test_features, dtype=float)
    a = a / np.linalg.norm(a, axis=1, keepdims=True)
    b = b / np.linalg.norm(b, axis=1, keepdims=True)
    k = min(k, len(train_labels))
    label_totals = Counter(train_labels.tolist())
    precision = recall = f1 = 0.0
    for row, label in zip(b, test_labels):
        sims = a @ row
        top = np.argsort(-sims, kind="stable")[:k]
        hits = int((train_labels[top] == label).sum())
        relevant = label_totals.get(label, 0)
        if hits == 0 or relevant == 0:
            continue
        p, r = hits / k, hits / relevant
        precision += p
        recall += r
        f1 += 2 * p * r / (p + r)
    n = len(test_labels)
    return RetrievalScores(precision / n, recall / n, f1 / n)


def retrieval_f1(train_features, train_labels, test_features, test_labels, k: int = 10) -> float:
    return retrieval_scores(train_features, train_labels, test_features, test_labels, k).f1


# ----------------------------------------------------------------- benchmark


@dataclass
class SchemeRecord:
    scheme: str
    purity: Optional[float] = None
    nmi: Optional[float] = None
    classification_f1: Optional[float] = None
    retrieval_f1: Optional[float] = None
    running_time_s: Optional[float] = None
    docs: Optional[int] = None
    max_words: Optional[int] = None
    mean_words: Optional[int] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["error"] is None:
            del out["error"]
        return out


@dataclass
class EvalReport:
    dataset: str
    seed: int
    schemes: list[SchemeRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = True) -> dict:
        records = [r.to_dict() for r in self.schemes]
        if not timing:
            for r in records:
                r.pop("running_time_s", None)
        return {"dataset": self.dataset, "seed": self.seed, "config": self.config, "schemes": records}

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        obj = json.loads(text)
        return cls(obj["dataset"], obj["seed"], [SchemeRecord(**r) for r in obj["schemes"]], obj.get("config", {}))

    def record(self, scheme: str) -> SchemeRecord:
        for r in self.schemes:
            if r.scheme == scheme:
                return r
        raise KeyError(scheme)

    def table(self) -> str:
        head = f"{'Scheme':<14}{'Purity':>8}{'NMI':>8}{'Classif.':>10}{'Retrieval':>11}{'Time (s)':>10}{'# docs':>9}{'Max w/doc':>11}{'Mean w/doc':>12}"
        lines = [head, "-" * len(head)]
        for r in self.schemes:
            if r.error:
                lines.append(f"{r.scheme:<14}  failed: {r.error}")
                continue
            lines.append(f"{r.scheme:<14}{r.purity:>8.3f}{r.nmi:>8.3f}{r.classification_f1:>10.3f}"
                         f"{r.retrieval_f1:>11.3f}{r.running_time_s:>10.2f}{r.docs:>9,}{r.max_words:>11,}{r.mean_words:>12,}")
        return "\n".join(lines)


@dataclass(frozen=True)
class BenchConfig:
    lda: LdaConfig = LdaConfig()
    train_fraction: float = 0.8
    infer_sweeps: int = 30
    retrieval_k: int = 10
    resolution: float = 1.0
    stopwords: Optional[frozenset] = None
    min_count: int = 1


_warmed = False


def _warm_up() -> None:
    """Compile the Gibbs kernels so that the first timed scheme does not pay for it."""
    global _warmed
    if _warmed:
        return
    from .corpus import Vocabulary
    from .pooling import PooledCorpus
    vocab = Vocabulary.from_tokens(["a", "b"], [1, 1])
    model = train(PooledCorpus("warmup", [["a", "b"]], [["w"]]), vocab, LdaConfig(topics=2, iterations=1))
    infer_topics(model, [["a"]], sweeps=1)
    _warmed = True


def evaluate_scheme(scheme: str, train_corpus: Corpus, test_corpus: Corpus, tokens: Mapping[str, list[str]],
                    vocab, config: BenchConfig, seed: int) -> SchemeRecord:
    lda_config = LdaConfig(config.lda.topics, config.lda.alpha, config.lda.beta, config.lda.iterations, seed)
    start = time.perf_counter()
    pooled = pool(train_corpus, scheme, tokens, resolution=config.resolution, seed=seed)
    model = train(pooled, vocab, lda_config)
    elapsed = time.perf_counter() - start

    tweets = list(train_corpus) + list(test_corpus)
    theta = infer_topics(model, [tokens[t.id] for t in tweets], config.infer_sweeps, seed + 1)
    labels = [t.query_label for t in tweets]
    n_train = len(train_corpus)
    clusters = np.argmax(theta, axis=1).tolist()
    stats = pooled.stats
    return SchemeRecord(
        scheme=scheme,
        purity=purity(clusters, labels),
        nmi=nmi(clusters, labels),
        classification_f1=classification_f1(theta[:n_train], labels[:n_train], theta[n_train:], labels[n_train:]),
        retrieval_f1=retrieval_f1(theta[:n_train], labels[:n_train], theta[n_train:], labels[n_train:],
                                  config.retrieval_k),
        running_time_s=elapsed,
        docs=stats.docs,
        max_words=stats.max_words,
        mean_words=stats.mean_words,
    )


def run_benchmark(corpus: Corpus, schemes: Sequence[str] = SCHEMES, config: BenchConfig = BenchConfig(),
                  seed: int = 0, dataset: str = "corpus") -> EvalReport:
    """Pool, train and evaluate every scheme on a time split of ``corpus``.

    Running time covers pooling (including any graph construction and
    community detection) plus LDA training.
    """
    _warm_up()
    train_corpus, test_corpus = time_split(corpus, config.train_fraction)
    tokens = tokenize_corpus(corpus, config.stopwords)
    vocab = build_vocabulary(train_corpus, min_count=config.min_count, tokens=tokens)
    report = EvalReport(dataset, seed, config={
        "topics": config.lda.topics, "alpha": config.lda.alpha, "beta": config.lda.beta,
        "iterations": config.lda.iterations, "train_fraction": config.train_fraction,
        "infer_sweeps": config.infer_sweeps, "retrieval_k": config.retrieval_k,
        "resolution": config.resolution, "min_count": config.min_count,
    })
    for scheme in schemes:
        try:
            record = evaluate_scheme(scheme, train_corpus, test_corpus, tokens, vocab, config, seed)
        except Exception as exc:  # one broken scheme must not sink the rest
            log.exception("scheme %s failed", scheme)
            record = SchemeRecord(scheme, error=f"{type(exc).__name__}: {exc}")
        report.schemes.append(record)
    return report
