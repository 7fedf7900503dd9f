"""Synthetic tweet corpora with planted communities and planted topics."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import Corpus, Tweet
from .graph import WeightedGraph


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthParams:
    communities: int = 4
    users_per_community: int = 25
    topics: int = 6
    topics_per_community: int = 2
    vocab_per_topic: int = 500
    shared_vocab: int = 0
    tweets_per_user: int = 10
    tweet_length: int = 6
    p_retweet_in: float = 0.3
    p_retweet_out: float = 0.01
    hashtag_rate: float = 0.3
    reply_rate: float = 0.1
    mention_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        counts = ("communities", "users_per_community", "topics", "topics_per_community",
                  "vocab_per_topic", "tweets_per_user", "tweet_length")
        for name in counts:
            if getattr(self, name) < 1:
                raise SynthError(f"{name} must be >= 1")
        if self.shared_vocab < 0:
            raise SynthError("shared_vocab must be >= 0")
        for name in ("p_retweet_in", "p_retweet_out", "hashtag_rate", "reply_rate", "mention_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise SynthError(f"{name} must lie in [0, 1]")
        if self.topics_per_community > self.topics:
            raise SynthError("topics_per_community cannot exceed topics")


@dataclass
class GroundTruth:
    community_of: dict[str, int]
    topic_of: dict[str, int]
    label_of: dict[str, str]
    community_topics: list[list[int]] = field(default_factory=list)
    community_mixtures: list[list[float]] = field(default_factory=list)
    topic_words: list[list[str]] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def read(cls, path) -> "GroundTruth":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))


def topic_name(k: int) -> str:
    return f"topic{k}"


def topic_vocabulary(params: SynthParams) -> list[list[str]]:
    shared = [f"common{j}" for j in range(params.shared_vocab)]
    return [[f"k{k}w{j}" for j in range(params.vocab_per_topic)] + shared for k in range(params.topics)]


def community_topic_sets(params: SynthParams) -> list[list[int]]:
    """Spread communities evenly round the ring of topics; consecutive topics per community."""
    C, T = params.communities, params.topics
    return [sorted({(c * T // C + j) % T for j in range(params.topics_per_community)}) for c in range(C)]


def generate(params: SynthParams) -> tuple[Corpus, GroundTruth]:
    rng = np.random.default_rng(params.seed)
    C, U = params.communities, params.users_per_community
    vocab = topic_vocabulary(params)
    topic_sets = community_topic_sets(params)
    mixtures = [rng.dirichlet(np.ones(len(ts))) for ts in topic_sets]
    hashtags = [[f"{topic_name(k)}tag{j}" for j in range(3)] for k in range(params.topics)]

    users = [f"u{c * U + i:04d}" for c in range(C) for i in range(U)]
    community_of = {u: i // U for i, u in enumerate(users)}
    members = [users[c * U:(c + 1) * U] for c in range(C)]
    horizon = 2 * 86400

    tweets: list[dict] = []
    topic_of: dict[str, int] = {}
    posts_by: dict[str, list[int]] = {u: [] for u in users}

    def new_id() -> str:
        return f"t{len(tweets):06d}"

    def compose(topic: int) -> tuple[str, list[str]]:
        words = list(rng.choice(vocab[topic], size=params.tweet_length))
        tags = []
        if rng.random() < params.hashtag_rate:
            tags.append(str(rng.choice(hashtags[topic])))
            if rng.random() < 0.2:
                other = hashtags[int(rng.integers(params.topics))]
                tag = str(rng.choice(other))
                if tag not in tags:
                    tags.append(tag)
        return " ".join(words + ["#" + t for t in tags]), tags

    # original posts and replies, in creation order so replies have a parent
    for _ in range(params.tweets_per_user):
        for u in users:
            c = community_of[u]
            parent = None
            candidates = [i for v in members[c] if v != u for i in posts_by[v]]
            if candidates and rng.random() < params.reply_rate:
                parent = tweets[int(rng.choice(candidates))]
                topic = topic_of[parent["id"]]
                ts = parent["timestamp"] + int(rng.integers(1, 3600))
            else:
                topic = int(topic_sets[c][rng.choice(len(topic_sets[c]), p=mixtures[c])])
                ts = int(rng.integers(0, horizon))
            text, tags = compose(topic)
            mentions = []
            if rng.random() < params.mention_rate:
                mentions.append(str(rng.choice([v for v in members[c] if v != u] or [u])))
            tid = new_id()
            topic_of[tid] = topic
            posts_by[u].append(len(tweets))
            tweets.append({
                "id": tid, "author_id": u, "text": text, "timestamp": ts,
                "query_label": topic_name(topic), "hashtags": tags,
                "reply_to": parent["id"] if parent else None, "retweet_of": None,
                "mentions": mentions,
            })

    # retweets: every ordered user pair independently, planted-partition style
    originals = {u: list(idx) for u, idx in posts_by.items()}
    for u in users:
        for v in users:
            if u == v:
                continue
            p = params.p_retweet_in if community_of[u] == community_of[v] else params.p_retweet_out
            if rng.random() >= p or not originals[v]:
                continue
            src = tweets[int(rng.choice(originals[v]))]
            tid = new_id()
            topic_of[tid] = topic_of[src["id"]]
            tweets.append({
                "id": tid, "author_id": u, "text": src["text"],
                "timestamp": src["timestamp"] + int(rng.integers(1, 3600)),
                "query_label": src["query_label"], "hashtags": list(src["hashtags"]),
                "reply_to": None, "retweet_of": src["id"], "mentions": [],
            })

    corpus = Corpus(Tweet.from_dict(t) for t in tweets)
    truth = GroundTruth(
        community_of=community_of,
        topic_of=topic_of,
        label_of={tid: topic_name(k) for tid, k in topic_of.items()},
        community_topics=topic_sets,
        community_mixtures=[[float(x) for x in m] for m in mixtures],
        topic_words=vocab,
    )
    return corpus, truth


def planted_partition_graph(blocks: int, block_size: int, p_in: float, p_out: float,
                            seed: int = 0) -> tuple[WeightedGraph, dict[str, int]]:
    """Unit-weight planted partition graph and its block assignment."""
    rng = np.random.default_rng(seed)
    nodes = [f"n{i:04d}" for i in range(blocks * block_size)]
    block = {n: i // block_size for i, n in enumerate(nodes)}
    g = WeightedGraph(nodes)
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            p = p_in if block[u] == block[v] else p_out
            if rng.random() < p:
                g.add_edge(u, v, 1.0)
    return g, block


def separated_corpus(docs_per_half: int = 20, words_per_half: int = 100, doc_length: int = 50,
                     seed: int = 0) -> tuple[list[list[str]], list[str], list[str]]:
    """Documents drawn from two disjoint vocabularies, one per half of the documents.

    Returns ``(docs, half_a_words, half_b_words)``.
    """
    rng = np.random.default_rng(seed)
    half_a = [f"a{j}" for j in range(words_per_half)]
    half_b = [f"b{j}" for j in range(words_per_half)]
    docs = [list(rng.choice(half, size=doc_length)) for half in (half_a, half_b) for _ in range(docs_per_half)]
    return [[str(w) for w in d] for d in docs], half_a, half_b
