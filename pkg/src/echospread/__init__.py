"""Retweet-cascade analysis toolkit.

Reconstructs retweet cascades from tweet logs, partitions the retweet
network into two echo chambers, infers a network-aware per-tweet virality
score by maximum likelihood under an independent cascade model with
platform display rules, and regresses log-virality on tweet features with
a group lasso.
"""

__version__ = "0.1.0"
