"""User activities and per-tweet virality inference.

Under the independent cascade model an exposed user u retweets tweet T with
probability alpha_u * r_T, so the cascade log-likelihood given an exposure
ledger with successes S and failures F is

    l(r) = |S| ln r + sum_{u in S} ln alpha_u + sum_{w in F} ln(1 - alpha_w r)

with derivative l'(r) = |S|/r - sum_F alpha_w / (1 - alpha_w r), which is
strictly decreasing on (0, r_max). The maximizer is therefore the unique
root of l' when one exists inside the domain, else the upper boundary
r_max = 1 / max activity over the exposed set.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exposure import ExposureLedger
from .ingest import Cascade, TweetRecord


class Boundary(enum.Enum):
    INTERIOR = "interior"
    UPPER_BOUNDARY = "upper_boundary"
    ZERO_SUCCESSES = "zero_successes"


@dataclass(frozen=True)
class UserActivity:
    """Tweets plus retweets in the collection window, raw and normalized."""

    raw: int
    normalized: float

    def __post_init__(self) -> None:
        if self.raw < 0:
            raise ValueError("raw activity must be nonnegative")
        if not 0.0 <= self.normalized <= 1.0:
            raise ValueError("normalized activity must lie in [0, 1]")
        if self.normalized == 0.0 and self.raw > 0:
            raise ValueError("normalized can be zero only for raw zero")


@dataclass(frozen=True)
class ViralityEstimate:
    """MLE virality for one cascade; r_hat is None when S is empty."""

    tweet_id: str
    group: int
    successes: int
    failures: int
    exposed: int
    r_hat: float | None
    ln_r: float | None
    boundary: Boundary
    dropped_zero_activity: int = 0


@dataclass(frozen=True)
class ScoreReport:
    scored: int
    zero_successes: int
    missing_ledgers: int


def compute_activities(records: Sequence[TweetRecord]) -> dict[str, UserActivity]:
    """Per-user activity over the full record set, normalized by the max.

    Activities come from the pre-filter corpus: every original and retweet a
    user produced counts once. Users absent from the records simply have no
    entry and must be treated as activity zero (never a valid trial).
    """
    raw: dict[str, int] = {}
    for rec in records:
        raw[rec.user_id] = raw.get(rec.user_id, 0) + 1
    max_raw = max(raw.values(), default=0)
    return {
        u: UserActivity(raw=c, normalized=(c / max_raw if max_raw else 0.0))
        for u, c in raw.items()
    }


def activity_values(
    activities: Mapping[str, UserActivity], raw: bool = False
) -> dict[str, float]:
    """Alpha per user: normalized (default) or raw counts as floats."""
    if raw:
        return {u: float(a.raw) for u, a in activities.items()}
    return {u: a.normalized for u, a in activities.items()}


def _dlog_likelihood(r: float, n_success: int, alpha_f: np.ndarray) -> float:
    """l'(r); -inf when any failure term's Bernoulli parameter reaches 1."""
    denom = 1.0 - alpha_f * r
    if np.any(denom <= 0.0):
        return -math.inf
    return n_success / r - float(np.sum(alpha_f / denom))


def mle_virality(
    ledger: ExposureLedger, act: Mapping[str, float], max_iter: int = 200
) -> ViralityEstimate:
    """Maximize the cascade likelihood by bisection on its derivative.

    Trial users with zero activity cannot occur under the model and are
    dropped (counted in dropped_zero_activity). The bracket [lo, r_max] is
    narrowed until its relative width falls below 1e-14 or max_iter halves,
    comfortably inside the 1e-10 contract.
    """
    successes = sorted(u for u in ledger.successes if act.get(u, 0.0) > 0.0)
    failures = sorted(w for w in ledger.failures if act.get(w, 0.0) > 0.0)
    dropped = len(ledger.successes) + len(ledger.failures) - len(successes) - len(failures)
    n_s = len(successes)
    n_f = len(failures)

    def estimate(r_hat: float | None, boundary: Boundary) -> ViralityEstimate:
        return ViralityEstimate(
            tweet_id=ledger.tweet_id,
            group=ledger.group,
            successes=n_s,
            failures=n_f,
            exposed=n_s + n_f,
            r_hat=r_hat,
            ln_r=math.log(r_hat) if r_hat is not None else None,
            boundary=boundary,
            dropped_zero_activity=dropped,
        )

    if n_s == 0:
        return estimate(None, Boundary.ZERO_SUCCESSES)

    alpha_exposed = np.array([act[u] for u in successes + failures])
    r_max = 1.0 / float(alpha_exposed.max())
    if n_f == 0:
        return estimate(r_max, Boundary.UPPER_BOUNDARY)

    alpha_f = np.array([act[w] for w in failures])
    if _dlog_likelihood(r_max, n_s, alpha_f) >= 0.0:
        return estimate(r_max, Boundary.UPPER_BOUNDARY)

    lo, hi = r_max * 1e-15, r_max
    for _ in range(max_iter):
        if hi - lo <= hi * 1e-14:
            break
        mid = 0.5 * (lo + hi)
        if _dlog_likelihood(mid, n_s, alpha_f) > 0.0:
            lo = mid
        else:
            hi = mid
    return estimate(0.5 * (lo + hi), Boundary.INTERIOR)


def log_likelihood(r: float, ledger: ExposureLedger, act: Mapping[str, float]) -> float:
    """l(r) for a ledger; -inf outside the feasible domain."""
    if r <= 0.0:
        return -math.inf
    total = 0.0
    for u in ledger.successes:
        alpha = act.get(u, 0.0)
        if alpha <= 0.0:
            continue
        total += math.log(alpha * r)
    for w in ledger.failures:
        alpha = act.get(w, 0.0)
        if alpha <= 0.0:
            continue
        p = 1.0 - alpha * r
        if p <= 0.0:
            return -math.inf
        total += math.log(p)
    return total


def score_corpus(
    cascades: Sequence[Cascade],
    ledgers: Iterable[ExposureLedger],
    act: Mapping[str, float],
) -> tuple[list[ViralityEstimate], ScoreReport]:
    """One estimate per cascade with a ledger, ordered by tweet id."""
    by_id = {led.tweet_id: led for led in ledgers}
    estimates: list[ViralityEstimate] = []
    zero = 0
    missing = 0
    for cascade in sorted(cascades, key=lambda c: c.tweet_id):
        led = by_id.get(cascade.tweet_id)
        if led is None:
            missing += 1
            continue
        est = mle_virality(led, act)
        if est.boundary is Boundary.ZERO_SUCCESSES:
            zero += 1
        estimates.append(est)
    report = ScoreReport(
        scored=len(estimates) - zero, zero_successes=zero, missing_ledgers=missing
    )
    return estimates, report


def write_virality_csv(estimates: Iterable[ViralityEstimate], path: str | Path) -> None:
    rows = sorted(estimates, key=lambda e: e.tweet_id)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["tweet_id", "group", "successes", "failures", "exposed", "r_hat", "ln_r", "boundary"]
        )
        for est in rows:
            writer.writerow(
                [
                    est.tweet_id,
                    est.group,
                    est.successes,
                    est.failures,
                    est.exposed,
                    "" if est.r_hat is None else f"{est.r_hat:.12g}",
                    "" if est.ln_r is None else f"{est.ln_r:.12g}",
                    est.boundary.value,
                ]
            )
