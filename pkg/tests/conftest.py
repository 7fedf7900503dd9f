import pytest

from tweetpool.corpus import Corpus, Tweet
from tweetpool.synth import SynthParams, generate


def tw(id, author, text="", ts=0, label="a", hashtags=(), reply_to=None, retweet_of=None, mentions=()):
    return Tweet(id, author, text, ts, label, tuple(hashtags), reply_to, retweet_of, tuple(mentions))


@pytest.fixture
def make_tweet():
    return tw


@pytest.fixture(scope="session")
def small_synth():
    return generate(SynthParams(communities=4, users_per_community=10, tweets_per_user=5, seed=3))


@pytest.fixture
def toy_corpus():
    return Corpus([
        tw("t1", "u1", "music is great #Rock", 1, "music", ["rock"], mentions=["u2"]),
        tw("t2", "u2", "great music again", 2, "music", reply_to="t1"),
        tw("t3", "u3", "family dinner #home #rock", 3, "family", ["home", "rock"]),
        tw("t4", "u1", "music is great #Rock", 4, "music", ["rock"], retweet_of="t1"),
        tw("t5", "u4", "health news", 5, "health", retweet_of="t3"),
        tw("t6", "u4", "health tips today", 6, "health", reply_to="t2"),
    ])
