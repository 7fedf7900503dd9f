import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.metrics import f1_score, normalized_mutual_info_score

from tweetpool.corpus import Vocabulary
from tweetpool.evaluation import (BenchConfig, EvalError, EvalReport, GaussianNaiveBayes, assign_clusters,
                                  classification_f1, contingency, macro_f1, nmi, purity, retrieval_f1,
                                  retrieval_scores, run_benchmark)
from tweetpool.lda import LdaConfig, train
from tweetpool.pooling import PooledCorpus
from tweetpool.synth import SynthParams, generate, separated_corpus

from oracles import nmi_bruteforce, purity_bruteforce


def test_purity_examples():
    assert purity([0, 0, 1], ["x", "x", "y"]) == 1.0
    assert purity([0, 0, 0, 1, 1], ["x", "x", "y", "y", "y"]) == pytest.approx(0.8, abs=1e-15)
    assert purity([0] * 6, ["a", "a", "b", "b", "c", "c"]) == pytest.approx(1 / 3, abs=1e-15)


def test_purity_mapping_input():
    assert purity({"t1": 0, "t2": 1}, {"t1": "a", "t2": "a"}) == 1.0
    with pytest.raises(EvalError):
        purity({"t1": 0}, {"t2": "a"})


def test_empty_input_errors():
    with pytest.raises(EvalError):
        purity([], [])
    with pytest.raises(EvalError):
        nmi([], [])


def test_nmi_identical_is_exactly_one():
    assert nmi([0, 0, 1, 1, 2], ["a", "a", "b", "b", "c"]) == 1.0
    assert nmi([5, 5, 5], ["q", "q", "q"]) == 1.0


def test_nmi_independent_is_zero():
    clusters = [c for c in range(2) for l in range(3) for _ in range(2)]
    labels = [l for c in range(2) for l in range(3) for _ in range(2)]
    assert nmi(clusters, labels) <= 1e-12


def test_nmi_zero_entropy_side():
    assert nmi([0, 0, 0, 0], ["a", "a", "b", "b"]) == 0.0


def test_nmi_matches_bruteforce_on_contingency():
    # contingency [[3,1],[1,3]]
    clusters = [0] * 4 + [1] * 4
    labels = ["a"] * 3 + ["b"] + ["a"] + ["b"] * 3
    assert contingency(clusters, labels).tolist() == [[3, 1], [1, 3]]
    assert abs(nmi(clusters, labels) - nmi_bruteforce(clusters, labels)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_metrics_against_oracles(data):
    n = data.draw(st.integers(1, 50))
    clusters = data.draw(st.lists(st.integers(0, 6), min_size=n, max_size=n))
    labels = data.draw(st.lists(st.sampled_from("abcde"), min_size=n, max_size=n))
    assert abs(purity(clusters, labels) - purity_bruteforce(clusters, labels)) <= 1e-12
    if len(set(clusters)) > 1 and len(set(labels)) > 1:
        assert abs(nmi(clusters, labels) - nmi_bruteforce(clusters, labels)) <= 1e-12
        assert nmi(clusters, labels) == pytest.approx(normalized_mutual_info_score(labels, clusters), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 3)), min_size=2, max_size=40), st.permutations(range(5)))
def test_relabeling_invariance(pairs, perm):
    clusters = [c for c, _ in pairs]
    labels = [f"l{l}" for _, l in pairs]
    relabeled = [perm[c] for c in clusters]
    renamed = [l + "x" for l in labels]
    assert purity(relabeled, renamed) == pytest.approx(purity(clusters, labels), abs=1e-15)
    assert nmi(relabeled, renamed) == pytest.approx(nmi(clusters, labels), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=40))
def test_self_agreement_and_single_cluster_bound(xs):
    assert purity(xs, xs) == 1.0
    assert nmi(xs, xs) == 1.0
    labels = [str(x) for x in xs]
    largest = max(labels.count(l) for l in set(labels))
    assert purity([0] * len(xs), labels) >= largest / len(xs) - 1e-15


@pytest.fixture(scope="module")
def separated_model():
    docs, half_a, half_b = separated_corpus(seed=4)
    vocab = Vocabulary.from_tokens(half_a + half_b)
    pooled = PooledCorpus("t", docs, [[f"d{i}"] for i in range(len(docs))])
    model = train(pooled, vocab, LdaConfig(topics=2, alpha=0.5, iterations=200, seed=4))
    return model, half_a, half_b


def test_assign_clusters_ties_and_separation(separated_model):
    model, half_a, half_b = separated_model
    # empty tweets get the uniform vector: the tie goes to topic 0
    assert assign_clusters(model, [[], []]).tolist() == [0, 0]
    rng = random.Random(0)
    tweets = [rng.sample(half_a, 6) for _ in range(50)] + [rng.sample(half_b, 6) for _ in range(50)]
    truth = ["a"] * 50 + ["b"] * 50
    clusters = assign_clusters(model, tweets, seed=1).tolist()
    assert purity(clusters, truth) >= 0.9


def test_gaussian_nb_variance_floor():
    clf = GaussianNaiveBayes().fit(np.ones((4, 2)), ["a", "a", "b", "b"])
    assert np.all(clf.vars_ == 1e-9)


def test_macro_f1_matches_sklearn():
    rng = random.Random(3)
    y = [rng.choice("abc") for _ in range(200)]
    p = [rng.choice("abc") for _ in range(200)]
    assert macro_f1(y, p, "abc") == pytest.approx(f1_score(y, p, average="macro"), abs=1e-12)


def test_classification_separable():
    rng = np.random.default_rng(0)
    centers = np.eye(3)
    y = rng.integers(0, 3, 300)
    X = centers[y] * 0.8 + 0.2 / 3 + rng.normal(0, 0.03, (300, 3))
    labels = [f"l{v}" for v in y]
    assert classification_f1(X[:200], labels[:200], X[200:], labels[200:]) >= 0.9


def test_classification_uniform_features_degenerate_baseline():
    labels_train = ["a"] * 6 + ["b"] * 3 + ["c"]
    labels_test = ["a", "b", "b", "c", "a"]
    X_train = np.full((10, 4), 0.25)
    X_test = np.full((5, 4), 0.25)
    # oracle: every test tweet gets the majority training class "a"
    precision = labels_test.count("a") / len(labels_test)
    f1_a = 2 * precision * 1.0 / (precision + 1.0)
    expected = f1_a / 3  # b and c are never predicted but occur in test
    assert classification_f1(X_train, labels_train, X_test, labels_test) == pytest.approx(expected, abs=1e-12)


def test_classification_unseen_label_excluded(caplog):
    X = np.array([[0.9, 0.1], [0.1, 0.9], [0.85, 0.15], [0.2, 0.8]])
    f1 = classification_f1(X[:2], ["a", "b"], X[2:], ["a", "z"])
    assert "absent from training" in caplog.text
    assert f1 == pytest.approx(macro_f1(["a", "z"], ["a", "b"], ["a", "b"]))


def test_training_data_is_optimistic():
    # few training points, many noisy dimensions: room to overfit
    rng = np.random.default_rng(1)
    y = rng.integers(0, 2, 220)
    X = rng.normal(0, 1, (220, 12))
    X[:, 0] += y * 0.8
    labels = [str(v) for v in y]
    leak = classification_f1(X[:20], labels[:20], X[:20], labels[:20])
    held = classification_f1(X[:20], labels[:20], X[20:], labels[20:])
    assert leak >= held


def test_retrieval_identical_vectors_timestamp_order():
    train_labels = ["a", "b", "a", "a", "b", "c", "a", "b", "b", "a", "c", "a"]
    test_labels = ["a", "b", "c", "d"]
    X_train = np.full((12, 3), 1 / 3)
    X_test = np.full((4, 3), 1 / 3)
    k = 5
    prefix = train_labels[:k]
    expected = 0.0
    for l in test_labels:
        hits, rel = prefix.count(l), train_labels.count(l)
        if hits:
            p, r = hits / k, hits / rel
            expected += 2 * p * r / (p + r)
    expected /= len(test_labels)
    assert retrieval_f1(X_train, train_labels, X_test, test_labels, k) == pytest.approx(expected, abs=1e-15)


def test_retrieval_label_without_train_instances():
    assert retrieval_f1(np.eye(2), ["a", "b"], np.eye(2)[:1], ["zzz"], k=1) == 0.0


def test_retrieval_full_k_gives_full_recall():
    rng = np.random.default_rng(2)
    X_train = rng.dirichlet(np.ones(4), 30)
    X_test = rng.dirichlet(np.ones(4), 10)
    labels = [rng.choice(["a", "b", "c"]) for _ in range(30)]
    test_labels = ["a", "b", "c", "a", "b", "c", "a", "b", "c", "a"]
    s = retrieval_scores(X_train, labels, X_test, test_labels, k=30)
    assert s.recall == pytest.approx(1.0)
    assert retrieval_scores(X_train, labels, X_test, test_labels, k=1000) == s


def test_retrieval_bad_k():
    with pytest.raises(EvalError):
        retrieval_f1(np.eye(2), ["a", "b"], np.eye(2), ["a", "b"], k=0)


def test_retrieval_separated_precision(separated_model):
    from tweetpool.lda import infer_topics
    model, half_a, half_b = separated_model
    rng = random.Random(9)
    train_t = [rng.sample(half_a, 6) for _ in range(40)] + [rng.sample(half_b, 6) for _ in range(60)]
    train_l = ["a"] * 40 + ["b"] * 60
    test_t = [rng.sample(half_a, 6) for _ in range(10)] + [rng.sample(half_b, 6) for _ in range(10)]
    test_l = ["a"] * 10 + ["b"] * 10
    s = retrieval_scores(infer_topics(model, train_t, seed=1), train_l, infer_topics(model, test_t, seed=2), test_l)
    prior = np.mean([train_l.count(l) / len(train_l) for l in test_l])
    assert s.precision >= prior + 0.2


SMALL = BenchConfig(lda=LdaConfig(iterations=50), infer_sweeps=10)


@pytest.fixture(scope="module")
def synth_corpus():
    return generate(SynthParams(communities=3, users_per_community=10, tweets_per_user=5, seed=1))[0]


def test_run_benchmark_structure(synth_corpus):
    report = run_benchmark(synth_corpus, ["unpooled", "community"], SMALL, seed=0, dataset="s")
    assert [r.scheme for r in report.schemes] == ["unpooled", "community"]
    for r in report.schemes:
        for metric in (r.purity, r.nmi, r.classification_f1, r.retrieval_f1):
            assert 0.0 <= metric <= 1.0
        assert r.running_time_s >= 0
    assert report.record("community").docs < report.record("unpooled").docs


def test_run_benchmark_deterministic_and_roundtrip(synth_corpus):
    r1 = run_benchmark(synth_corpus, ["author", "hashtag"], SMALL, seed=3)
    r2 = run_benchmark(synth_corpus, ["author", "hashtag"], SMALL, seed=3)
    assert r1.to_json(timing=False) == r2.to_json(timing=False)
    text = r1.to_json()
    assert EvalReport.from_json(text).to_json() == text
    obj = json.loads(text)
    assert set(obj) >= {"dataset", "seed", "schemes"}
    assert set(obj["schemes"][0]) == {"scheme", "purity", "nmi", "classification_f1", "retrieval_f1",
                                      "running_time_s", "docs", "max_words", "mean_words"}


def test_run_benchmark_records_failures(synth_corpus):
    report = run_benchmark(synth_corpus, ["bogus", "unpooled"], SMALL)
    assert report.schemes[0].error and "bogus" in report.schemes[0].error
    assert report.schemes[1].error is None and report.schemes[1].purity is not None
    assert "failed" in report.table()
