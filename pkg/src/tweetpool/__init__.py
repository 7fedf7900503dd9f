"""Tweet pooling schemes for LDA topic modelling, including community pooling over the retweet graph."""

__version__ = "0.1.0"
