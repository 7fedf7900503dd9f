"""Tweet-pooling schemes: aggregate tweets into longer training documents."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .community import Partition, louvain
from .corpus import Corpus, tokenize_corpus
from .graph import (ConversationForest, build_conversation_forest, build_reply_mention_groups,
                    build_retweet_graph)

SCHEMES = ("unpooled", "author", "hashtag", "conversation", "network", "community")


@dataclass(frozen=True)
class PoolStats:
    docs: int
    max_words: int
    mean_words: int

    def row(self, scheme: str) -> str:
        return f"{scheme:<14}{self.docs:>10,}{self.max_words:>14,}{self.mean_words:>14,}"


@dataclass
class PooledCorpus:
    """Training documents built from a corpus under one pooling scheme.

    ``members[d]`` lists the tweet ids of document ``d`` in corpus order and
    ``docs[d]`` is the concatenation of their tokens.
    """

    scheme: str
    docs: list[list[str]]
    members: list[list[str]]
    keys: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.membership: dict[str, list[int]] = {}
        for d, ids in enumerate(self.members):
            for tid in ids:
                self.membership.setdefault(tid, []).append(d)

    def __len__(self) -> int:
        return len(self.docs)

    @property
    def stats(self) -> PoolStats:
        return corpus_stats(self)


def corpus_stats(pooled: PooledCorpus) -> PoolStats:
    lengths = [len(d) for d in pooled.docs]
    if not lengths:
        return PoolStats(0, 0, 0)
    return PoolStats(len(lengths), max(lengths), math.floor(sum(lengths) / len(lengths) + 0.5))


def _tokens(corpus: Corpus, tokens: Optional[Mapping[str, Sequence[str]]]):
    return tokenize_corpus(corpus) if tokens is None else tokens


def _assemble(scheme: str, groups: Iterable[tuple[str, list[str]]], tokens) -> PooledCorpus:
    docs, members, keys = [], [], []
    for key, ids in groups:
        if not ids:
            continue
        doc: list[str] = []
        for tid in ids:
            doc.extend(tokens[tid])
        docs.append(doc)
        members.append(list(ids))
        keys.append(str(key))
    return PooledCorpus(scheme, docs, members, keys)


def _group_by_author(corpus: Corpus, group_of: Mapping[str, object], order: Sequence) -> list:
    buckets: dict = {g: [] for g in order}
    for t in corpus:
        buckets[group_of[t.author_id]].append(t.id)
    return list(buckets.items())


def pool_unpooled(corpus: Corpus, tokens=None) -> PooledCorpus:
    tokens = _tokens(corpus, tokens)
    return _assemble("unpooled", ((t.id, [t.id]) for t in corpus), tokens)


def pool_author(corpus: Corpus, tokens=None) -> PooledCorpus:
    tokens = _tokens(corpus, tokens)
    authors = corpus.authors
    return _assemble("author", _group_by_author(corpus, {a: a for a in authors}, authors), tokens)


def pool_hashtag(corpus: Corpus, tokens=None) -> PooledCorpus:
    """One document per hashtag; tweets without hashtags stay on their own.

    A tweet with several distinct hashtags is copied into each of their documents.
    """
    tokens = _tokens(corpus, tokens)
    by_tag: dict[str, list[str]] = {}
    loose = []
    for t in corpus:
        tags = dict.fromkeys(h.lower() for h in t.hashtags)
        if not tags:
            loose.append((t.id, [t.id]))
        for h in tags:
            by_tag.setdefault(h, []).append(t.id)
    groups = [("#" + h, by_tag[h]) for h in sorted(by_tag)] + loose
    return _assemble("hashtag", groups, tokens)


def pool_conversation(corpus: Corpus, forest: Optional[ConversationForest] = None, tokens=None) -> PooledCorpus:
    tokens = _tokens(corpus, tokens)
    if forest is None:
        forest = build_conversation_forest(corpus)
    return _assemble("conversation", forest.trees(corpus).items(), tokens)


def pool_network(corpus: Corpus, groups: Optional[Sequence[Sequence[str]]] = None, tokens=None) -> PooledCorpus:
    tokens = _tokens(corpus, tokens)
    if groups is None:
        groups = build_reply_mention_groups(corpus)
    group_of = {u: gi for gi, members in enumerate(groups) for u in members}
    missing = {t.author_id for t in corpus} - group_of.keys()
    if missing:
        raise ValueError(f"authors missing from user groups: {sorted(missing)[:5]}")
    buckets = _group_by_author(corpus, group_of, range(len(groups)))
    return _assemble("network", ((min(groups[g]), ids) for g, ids in buckets), tokens)


def pool_community(corpus: Corpus, partition: Partition, tokens=None) -> PooledCorpus:
    """One document per community holding every tweet its users authored."""
    tokens = _tokens(corpus, tokens)
    missing = sorted({t.author_id for t in corpus if t.author_id not in partition})
    if missing:
        raise ValueError(f"authors missing from partition: {missing[:5]}")
    buckets = _group_by_author(corpus, partition.assignment, range(partition.n_communities))
    return _assemble("community", buckets, tokens)


def pool(corpus: Corpus, scheme: str, tokens=None, *, resolution: float = 1.0, seed: int = 0) -> PooledCorpus:
    """Run ``scheme`` end to end, building whatever interaction structure it needs."""
    tokens = _tokens(corpus, tokens)
    if scheme == "unpooled":
        return pool_unpooled(corpus, tokens)
    if scheme == "author":
        return pool_author(corpus, tokens)
    if scheme == "hashtag":
        return pool_hashtag(corpus, tokens)
    if scheme == "conversation":
        return pool_conversation(corpus, build_conversation_forest(corpus), tokens)
    if scheme == "network":
        return pool_network(corpus, build_reply_mention_groups(corpus), tokens)
    if scheme == "community":
        partition = louvain(build_retweet_graph(corpus), resolution=resolution, seed=seed)
        return pool_community(corpus, partition, tokens)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")
