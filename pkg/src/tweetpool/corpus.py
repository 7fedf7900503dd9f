"""Tweet corpora: ingestion, preprocessing, time splits and vocabulary."""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

# '#'/'@' survive only as a leading prefix; '_' counts as a separator.
_TOKEN_RE = re.compile(r"[#@]?[^\W_]+")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Tweet:
    id: str
    author_id: str
    text: str
    timestamp: int
    query_label: str
    hashtags: tuple[str, ...] = ()
    reply_to: Optional[str] = None
    retweet_of: Optional[str] = None
    mentions: tuple[str, ...] = ()

    def __post_init__(self):
        if self.reply_to == self.id or self.retweet_of == self.id:
            raise CorpusError(f"tweet {self.id} references itself")
        tags = tuple(h.lower().lstrip("#") for h in self.hashtags)
        if any(not h or any(c.isspace() for c in h) for h in tags):
            raise CorpusError(f"tweet {self.id} has an invalid hashtag")
        object.__setattr__(self, "hashtags", tags)
        object.__setattr__(self, "mentions", tuple(self.mentions))

    @property
    def sort_key(self) -> tuple[int, str]:
        return (self.timestamp, self.id)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "author_id": self.author_id,
            "text": self.text,
            "timestamp": self.timestamp,
            "query_label": self.query_label,
            "hashtags": list(self.hashtags),
            "reply_to": self.reply_to,
            "retweet_of": self.retweet_of,
            "mentions": list(self.mentions),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Tweet":
        return cls(
            id=str(obj["id"]),
            author_id=str(obj["author_id"]),
            text=str(obj["text"]),
            timestamp=int(obj["timestamp"]),
            query_label=str(obj["query_label"]),
            hashtags=tuple(obj.get("hashtags") or ()),
            reply_to=obj.get("reply_to"),
            retweet_of=obj.get("retweet_of"),
            mentions=tuple(obj.get("mentions") or ()),
        )


class Corpus:
    """An immutable, time-ordered collection of labeled tweets.

    Tweets are kept sorted by ``(timestamp, id)``; ids must be unique.
    """

    def __init__(self, tweets: Iterable[Tweet], label_set: Optional[Iterable[str]] = None):
        ordered = tuple(sorted(tweets, key=lambda t: t.sort_key))
        index = {}
        for pos, t in enumerate(ordered):
            if t.id in index:
                raise CorpusError(f"duplicate id {t.id}")
            index[t.id] = pos
        labels = frozenset(t.query_label for t in ordered)
        if label_set is not None:
            label_set = frozenset(label_set)
            missing = labels - label_set
            if missing:
                raise CorpusError(f"labels not in label_set: {sorted(missing)}")
            labels = label_set
        self._tweets = ordered
        self._index = index
        self.label_set = labels

    @property
    def tweets(self) -> tuple[Tweet, ...]:
        return self._tweets

    def __len__(self) -> int:
        return len(self._tweets)

    def __iter__(self):
        return iter(self._tweets)

    def __getitem__(self, i):
        return self._tweets[i]

    def __contains__(self, tweet_id: str) -> bool:
        return tweet_id in self._index

    def get(self, tweet_id: str) -> Optional[Tweet]:
        pos = self._index.get(tweet_id)
        return None if pos is None else self._tweets[pos]

    def position(self, tweet_id: str) -> int:
        return self._index[tweet_id]

    @property
    def authors(self) -> list[str]:
        return sorted({t.author_id for t in self._tweets})

    def labels(self) -> dict[str, str]:
        return {t.id: t.query_label for t in self._tweets}

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self._tweets == other._tweets

    def __repr__(self) -> str:
        return f"Corpus({len(self)} tweets, {len(self.label_set)} labels)"


def load_jsonl(path) -> Corpus:
    tweets = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                tweet = Tweet.from_dict(obj)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: malformed line {lineno}: {exc}") from exc
            if tweet.id in seen:
                raise CorpusError(f"duplicate id {tweet.id} (line {lineno})")
            seen.add(tweet.id)
            tweets.append(tweet)
    return Corpus(tweets)


def dump_jsonl(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in corpus:
            fh.write(json.dumps(t.to_dict(), ensure_ascii=False) + "\n")


def default_stopwords() -> frozenset[str]:
    text = resources.files("tweetpool").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def load_stopwords(path) -> frozenset[str]:
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def tokenize(text: str, stopwords: Iterable[str] = ()) -> list[str]:
    """Lowercase ``text`` and split it into word tokens.

    Hashtag and mention prefixes stay attached (``#tag``, ``@user``);
    punctuation-only fragments and stopwords are dropped.
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    return [tok for tok in _TOKEN_RE.findall(text.lower()) if tok not in stop]


def tokenize_corpus(corpus: Corpus, stopwords: Optional[Iterable[str]] = None) -> dict[str, list[str]]:
    stop = default_stopwords() if stopwords is None else frozenset(s.lower() for s in stopwords)
    return {t.id: tokenize(t.text, stop) for t in corpus}


def dedupe_multilabel(tweets: Iterable[Tweet]) -> Corpus:
    """Drop every tweet id retrieved under more than one query label.

    Exact repeats under a single label collapse to the first occurrence.
    """
    tweets = list(tweets)
    labels_of: dict[str, set[str]] = {}
    for t in tweets:
        labels_of.setdefault(t.id, set()).add(t.query_label)
    kept = {}
    for t in tweets:
        if len(labels_of[t.id]) == 1 and t.id not in kept:
            kept[t.id] = t
    return Corpus(kept.values())


def time_split(corpus: Corpus, train_fraction: float = 0.8) -> tuple[Corpus, Corpus]:
    if not 0.0 < train_fraction < 1.0:
        raise CorpusError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if len(corpus) == 0:
        raise CorpusError("cannot split an empty corpus")
    cut = math.ceil(train_fraction * len(corpus))
    tweets = corpus.tweets
    return (Corpus(tweets[:cut], corpus.label_set), Corpus(tweets[cut:], corpus.label_set))


@dataclass
class Vocabulary:
    token_to_index: dict[str, int] = field(default_factory=dict)
    counts: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.index_to_token = [""] * len(self.token_to_index)
        for tok, i in self.token_to_index.items():
            self.index_to_token[i] = tok

    def __len__(self) -> int:
        return len(self.token_to_index)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def index(self, token: str) -> int:
        return self.token_to_index[token]

    def token(self, index: int) -> str:
        return self.index_to_token[index]

    def encode(self, tokens: Sequence[str]) -> list[int]:
        """Map tokens to indices, silently dropping out-of-vocabulary ones."""
        lookup = self.token_to_index
        return [lookup[t] for t in tokens if t in lookup]

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], counts: Optional[Sequence[int]] = None) -> "Vocabulary":
        counts = list(counts) if counts is not None else [0] * len(tokens)
        return cls({t: i for i, t in enumerate(tokens)}, counts)


def build_vocabulary(corpus: Corpus, stopwords: Optional[Iterable[str]] = None,
                     min_count: int = 1, tokens: Optional[dict[str, list[str]]] = None) -> Vocabulary:
    if min_count < 1:
        raise CorpusError("min_count must be >= 1")
    if tokens is None:
        tokens = tokenize_corpus(corpus, stopwords)
    freq: Counter = Counter()
    order: list[str] = []
    for t in corpus:
        for tok in tokens[t.id]:
            if tok not in freq:
                order.append(tok)
            freq[tok] += 1
    kept = [tok for tok in order if freq[tok] >= min_count]
    return Vocabulary.from_tokens(kept, [freq[tok] for tok in kept])
