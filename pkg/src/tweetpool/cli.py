"""Command-line entry point.

All randomness derives from ``--seed``: Louvain and LDA training use the seed
itself, fold-in inference uses ``seed + 1``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import CorpusError, build_vocabulary, dump_jsonl, load_jsonl, load_stopwords, time_split, tokenize_corpus
from .evaluation import BenchConfig, classification_f1, nmi, purity, retrieval_f1, run_benchmark
from .lda import LdaConfig, LdaError, TopicModel, infer_topics, top_words, train
from .pooling import SCHEMES, pool
from .synth import SynthError, SynthParams, generate

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2

log = logging.getLogger("tweetpool")


class UsageError(Exception):
    pass


def _parse_schemes(value: str) -> list[str]:
    if value == "all":
        return list(SCHEMES)
    schemes = [s.strip() for s in value.split(",") if s.strip()]
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        raise UsageError(f"unknown scheme(s) {bad}; choose from {', '.join(SCHEMES)} or 'all'")
    return schemes


def _lda_config(args) -> LdaConfig:
    return LdaConfig(topics=args.topics, alpha=args.alpha, beta=args.beta,
                     iterations=args.iterations, seed=args.seed)


def _stopwords(args):
    return None if args.stopwords is None else load_stopwords(args.stopwords)


def _load(args):
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"input file not found: {path}")
    return load_jsonl(path)


def cmd_generate(args) -> int:
    params = SynthParams(
        communities=args.communities, users_per_community=args.users_per_community,
        topics=args.synth_topics, topics_per_community=args.topics_per_community,
        vocab_per_topic=args.vocab_per_topic, shared_vocab=args.shared_vocab,
        tweets_per_user=args.tweets_per_user, tweet_length=args.tweet_length,
        p_retweet_in=args.p_in, p_retweet_out=args.p_out, hashtag_rate=args.hashtag_rate,
        reply_rate=args.reply_rate, mention_rate=args.mention_rate, seed=args.seed,
    )
    corpus, truth = generate(params)
    out = Path(args.out)
    truth_path = Path(args.truth) if args.truth else out.with_suffix(".truth.json")
    dump_jsonl(corpus, out)
    truth.write(truth_path)
    print(f"wrote {len(corpus)} tweets to {out} and ground truth to {truth_path}")
    return EXIT_OK


def cmd_pool(args) -> int:
    corpus = _load(args)
    tokens = tokenize_corpus(corpus, _stopwords(args))
    print(f"{'Scheme':<14}{'# docs':>10}{'Max w/doc':>14}{'Mean w/doc':>14}")
    for scheme in _parse_schemes(args.schemes):
        pooled = pool(corpus, scheme, tokens, resolution=args.resolution, seed=args.seed)
        print(pooled.stats.row(scheme))
        if args.out:
            path = Path(args.out.replace("{scheme}", scheme))
            with open(path, "w", encoding="utf-8") as fh:
                for key, ids, doc in zip(pooled.keys, pooled.members, pooled.docs):
                    fh.write(json.dumps({"key": key, "tweets": ids, "tokens": doc}) + "\n")
    return EXIT_OK


def cmd_train(args) -> int:
    corpus = _load(args)
    scheme = _parse_schemes(args.scheme)
    if len(scheme) != 1:
        raise UsageError("train takes exactly one scheme")
    tokens = tokenize_corpus(corpus, _stopwords(args))
    vocab = build_vocabulary(corpus, tokens=tokens)
    pooled = pool(corpus, scheme[0], tokens, resolution=args.resolution, seed=args.seed)
    model = train(pooled, vocab, _lda_config(args))
    model.save(args.out)
    for k in range(model.n_topics):
        words = " ".join(w for w, _ in top_words(model, k, args.top))
        print(f"topic {k}: {words}")
    print(f"saved model to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    corpus = _load(args)
    model = TopicModel.load(args.model)
    tokens = tokenize_corpus(corpus, _stopwords(args))
    tweets = list(corpus)
    theta = infer_topics(model, [tokens[t.id] for t in tweets], args.sweeps, args.seed + 1)
    labels = [t.query_label for t in tweets]
    clusters = np.argmax(theta, axis=1).tolist()
    result = {"purity": purity(clusters, labels), "nmi": nmi(clusters, labels)}
    train_c, test_c = time_split(corpus, args.split)
    n = len(train_c)
    if len(test_c):
        result["classification_f1"] = classification_f1(theta[:n], labels[:n], theta[n:], labels[n:])
        result["retrieval_f1"] = retrieval_f1(theta[:n], labels[:n], theta[n:], labels[n:])
    print(json.dumps(result, indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    schemes = _parse_schemes(args.schemes)
    if not 0 < args.split < 1:
        raise UsageError("--split must lie in (0, 1)")
    corpus = _load(args)
    config = BenchConfig(lda=_lda_config(args), train_fraction=args.split, infer_sweeps=args.sweeps,
                         resolution=args.resolution, stopwords=_stopwords(args))
    report = run_benchmark(corpus, schemes, config, seed=args.seed, dataset=args.dataset or Path(args.input).stem)
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.table())
    return EXIT_FAILED if any(r.error for r in report.schemes) else EXIT_OK


def _add_lda_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topics", type=int, default=10, help="number of LDA topics (default 10)")
    p.add_argument("--alpha", type=float, default=None, help="document-topic prior (default 50/topics)")
    p.add_argument("--beta", type=float, default=0.01, help="topic-word prior")
    p.add_argument("--iterations", type=int, default=1000, help="Gibbs sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tweetpool", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)

    corpus_flags = argparse.ArgumentParser(add_help=False)
    corpus_flags.add_argument("--input", required=True, help="JSONL tweet corpus")
    corpus_flags.add_argument("--stopwords", default=None, help="stopword file, one token per line")
    corpus_flags.add_argument("--resolution", type=float, default=1.0, help="Louvain resolution")

    g = sub.add_parser("generate", parents=[common], help="write a synthetic corpus and its ground truth")
    d = SynthParams()
    g.add_argument("--out", required=True)
    g.add_argument("--truth", default=None, help="ground-truth JSON path (default: <out>.truth.json)")
    g.add_argument("--communities", type=int, default=d.communities)
    g.add_argument("--users-per-community", type=int, default=d.users_per_community)
    g.add_argument("--synth-topics", type=int, default=d.topics)
    g.add_argument("--topics-per-community", type=int, default=d.topics_per_community)
    g.add_argument("--vocab-per-topic", type=int, default=d.vocab_per_topic)
    g.add_argument("--shared-vocab", type=int, default=d.shared_vocab)
    g.add_argument("--tweets-per-user", type=int, default=d.tweets_per_user)
    g.add_argument("--tweet-length", type=int, default=d.tweet_length)
    g.add_argument("--p-in", type=float, default=d.p_retweet_in)
    g.add_argument("--p-out", type=float, default=d.p_retweet_out)
    g.add_argument("--hashtag-rate", type=float, default=d.hashtag_rate)
    g.add_argument("--reply-rate", type=float, default=d.reply_rate)
    g.add_argument("--mention-rate", type=float, default=d.mention_rate)
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("pool", parents=[common, corpus_flags], help="pool a corpus and print document statistics")
    p.add_argument("--schemes", "--scheme", dest="schemes", default="all")
    p.add_argument("--out", default=None, help="write documents as JSONL; '{scheme}' is substituted")
    p.set_defaults(func=cmd_pool)

    t = sub.add_parser("train", parents=[common, corpus_flags], help="train LDA on one pooling of a corpus")
    t.add_argument("--scheme", default="community")
    t.add_argument("--out", required=True, help="model JSON path")
    t.add_argument("--top", type=int, default=8, help="top words printed per topic")
    _add_lda_flags(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", parents=[common, corpus_flags], help="score a saved model on a corpus")
    e.add_argument("--model", required=True)
    e.add_argument("--split", type=float, default=0.8)
    e.add_argument("--sweeps", type=int, default=30, help="fold-in sweeps after burn-in")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", parents=[common, corpus_flags], help="pool, train and evaluate every scheme")
    b.add_argument("--schemes", default="all")
    b.add_argument("--split", type=float, default=0.8)
    b.add_argument("--sweeps", type=int, default=30, help="fold-in sweeps after burn-in")
    b.add_argument("--dataset", default=None)
    b.add_argument("--out", default=None, help="report JSON path")
    _add_lda_flags(b)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, CorpusError, LdaError, SynthError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        log.exception("run failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
