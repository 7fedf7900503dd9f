import random
from collections import Counter

import pytest

from tweetpool.community import Partition, louvain
from tweetpool.corpus import Corpus, tokenize_corpus
from tweetpool.graph import build_conversation_forest, build_reply_mention_groups, build_retweet_graph
from tweetpool.pooling import (SCHEMES, PooledCorpus, corpus_stats, pool, pool_author, pool_community,
                               pool_conversation, pool_hashtag, pool_network, pool_unpooled)

from conftest import tw


def words(n, tag):
    return " ".join(f"{tag}{i}" for i in range(n))


def doc_multiset(pooled):
    return Counter(tuple(d) for d in pooled.docs)


def check_invariants(corpus, pooled, tokens):
    for t in corpus:
        assert len(pooled.membership[t.id]) >= 1
        if pooled.scheme != "hashtag":
            assert len(pooled.membership[t.id]) == 1
    for doc, ids in zip(pooled.docs, pooled.members):
        assert doc == [tok for tid in ids for tok in tokens[tid]]
        positions = [corpus.position(i) for i in ids]
        assert positions == sorted(positions)
    total = sum(len(tokens[t.id]) for t in corpus)
    if pooled.scheme == "hashtag":
        total = sum(max(1, len(set(t.hashtags))) * len(tokens[t.id]) for t in corpus)
    assert sum(len(d) for d in pooled.docs) == total


def test_unpooled():
    c = Corpus([tw(f"t{i}", "u", words(2, "w"), i) for i in range(3)])
    p = pool_unpooled(c)
    assert len(p) == 3 and p.membership == {"t0": [0], "t1": [1], "t2": [2]}
    assert len(pool_unpooled(Corpus([]))) == 0


def test_author_example():
    c = Corpus([tw("t1", "u1", "x y", 0), tw("t2", "u1", "z", 1), tw("t3", "u2", "w", 2)])
    p = pool_author(c)
    assert len(p) == 2
    assert p.docs[0] == ["x", "y", "z"]


def test_author_count_matches_distinct_authors():
    rng = random.Random(4)
    c = Corpus(tw(f"t{i}", f"u{rng.randrange(137)}", words(3, "x"), i) for i in range(1000))
    assert len(pool_author(c)) == len({t.author_id for t in c})


def test_hashtag_example():
    c = Corpus([tw("t1", "u", "one", 0, hashtags=["a", "b"]), tw("t2", "u", "two", 1, hashtags=["a"]),
                tw("t3", "u", "three", 2)])
    p = pool_hashtag(c)
    assert p.keys == ["#a", "#b", "t3"]
    assert p.members == [["t1", "t2"], ["t1"], ["t3"]]
    assert len(p.membership["t1"]) == 2


def test_hashtag_without_tags_equals_unpooled():
    c = Corpus([tw(f"t{i}", "u", words(2, "w"), i) for i in range(5)])
    assert pool_hashtag(c).docs == pool_unpooled(c).docs


def test_hashtag_matches_inverted_index():
    rng = random.Random(7)
    tags = ["rock", "pop", "jazz", "news"]
    c = Corpus(tw(f"t{i}", "u", words(rng.randint(1, 4), "w"), i,
                  hashtags=rng.sample(tags, rng.randint(0, 3))) for i in range(200))
    tokens = tokenize_corpus(c, set())
    index = {}
    for t in c:
        for h in t.hashtags:
            index.setdefault(h, []).append(t.id)
    p = pool_hashtag(c, tokens)
    for key, ids, doc in zip(p.keys, p.members, p.docs):
        if key.startswith("#"):
            assert ids == index[key[1:]]
            assert len(doc) == sum(len(tokens[i]) for i in index[key[1:]])
    check_invariants(c, p, tokens)


def test_conversation_example():
    c = Corpus([tw("t1", "u1", "a", 0), tw("t2", "u2", "b", 1, reply_to="t1"),
                tw("t3", "u3", "c", 2, reply_to="t2"), tw("t4", "u4", "d", 3)])
    p = pool_conversation(c, build_conversation_forest(c))
    assert sorted(len(m) for m in p.members) == [1, 3]


def test_conversation_without_replies_equals_unpooled():
    c = Corpus([tw(f"t{i}", "u", words(2, "w"), i) for i in range(5)])
    assert pool_conversation(c).docs == pool_unpooled(c).docs
    assert len(pool_conversation(c)) == len(build_conversation_forest(c).roots)


def test_network_example():
    c = Corpus([tw("t1", "u1", "a", 0), tw("t2", "u1", "b", 1), tw("t3", "u2", "c", 2), tw("t4", "u3", "d", 3)])
    p = pool_network(c, [["u1", "u2"], ["u3"]])
    assert [len(m) for m in p.members] == [3, 1]


def test_network_singletons_equal_author():
    c = Corpus([tw(f"t{i}", f"u{i % 3}", words(2, "w"), i) for i in range(9)])
    p = pool_network(c, [[f"u{i}"] for i in range(3)])
    assert doc_multiset(p) == doc_multiset(pool_author(c))


def test_network_matches_group_by(small_synth):
    corpus, _ = small_synth
    tokens = tokenize_corpus(corpus)
    groups = build_reply_mention_groups(corpus)
    group_of = {u: i for i, g in enumerate(groups) for u in g}
    expected = Counter(group_of[t.author_id] for t in corpus)
    p = pool_network(corpus, groups, tokens)
    assert sorted(len(m) for m in p.members) == sorted(expected.values())
    check_invariants(corpus, p, tokens)


def test_community_example():
    c = Corpus([tw("t1", "u1", "a", 0), tw("t2", "u2", "b", 1), tw("t3", "u2", "c", 2), tw("t4", "u3", "d", 3)])
    p = pool_community(c, Partition({"u1": 0, "u2": 0, "u3": 1}))
    assert [len(m) for m in p.members] == [3, 1]


def test_community_missing_author_raises():
    c = Corpus([tw("t1", "u1", "a", 0), tw("t2", "u9", "b", 1)])
    with pytest.raises(ValueError, match="u9"):
        pool_community(c, Partition({"u1": 0}))


def test_community_singletons_equal_author(toy_corpus):
    part = Partition.from_labels({u: u for u in toy_corpus.authors})
    assert doc_multiset(pool_community(toy_corpus, part)) == doc_multiset(pool_author(toy_corpus))


def test_community_recovers_planted_structure():
    from tweetpool.synth import SynthParams, generate
    corpus, truth = generate(SynthParams(communities=4, p_retweet_out=0.0, seed=2))
    part = louvain(build_retweet_graph(corpus), seed=2)
    p = pool_community(corpus, part)
    big = [m for m in p.members if len({corpus.get(i).author_id for i in m}) > 1]
    assert len(big) == 4
    for members in big:
        assert len({truth.community_of[corpus.get(i).author_id] for i in members}) == 1


@pytest.mark.parametrize("scheme", SCHEMES)
def test_all_schemes_invariants(scheme, small_synth):
    corpus, _ = small_synth
    tokens = tokenize_corpus(corpus)
    p = pool(corpus, scheme, tokens, seed=1)
    assert p.scheme == scheme
    check_invariants(corpus, p, tokens)
    assert corpus_stats(p) == p.stats


def test_unknown_scheme():
    with pytest.raises(ValueError):
        pool(Corpus([]), "temporal")


def test_corpus_stats_examples():
    p = PooledCorpus("x", [["a", "b"], ["a", "b", "c", "d"]], [["t1"], ["t2"]])
    s = corpus_stats(p)
    assert (s.docs, s.max_words, s.mean_words) == (2, 4, 3)
    assert corpus_stats(PooledCorpus("x", [], [])).docs == 0


def test_mean_rounds_half_up():
    p = PooledCorpus("x", [["a"], ["a", "b"]], [["t1"], ["t2"]])
    assert corpus_stats(p).mean_words == 2


def test_community_fewer_docs_than_author(small_synth):
    corpus, _ = small_synth
    part = louvain(build_retweet_graph(corpus), seed=0)
    n_users = len(corpus.authors)
    if part.n_communities < n_users:
        assert pool_community(corpus, part).stats.docs < pool_author(corpus).stats.docs
