"""Multi-coder binary labels: adjudication, agreement, and feature assembly.

Semantic tweet features arrive as per-coder CSV sheets (manual coding is the
interface; nothing here classifies text). Hashtag and mention counts are
machine-extracted. The regression feature matrix combines adjudicated
labels, mark counts, author indicators, and log-virality responses.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .virality import Boundary, ViralityEstimate

HASHTAG_RE = re.compile(r"#\w+")
MENTION_RE = re.compile(r"@\w+")


@dataclass(frozen=True)
class CoderSheet:
    """One coder's binary labels over a declared feature list."""

    coder_id: str
    features: tuple[str, ...]
    rows: Mapping[str, tuple[int, ...]]

    def __post_init__(self) -> None:
        width = len(self.features)
        for tweet_id, values in self.rows.items():
            if len(values) != width:
                raise ValueError(f"{self.coder_id}: row {tweet_id} has wrong width")
            if any(v not in (0, 1) for v in values):
                raise ValueError(f"{self.coder_id}: row {tweet_id} has non-binary label")

    @classmethod
    def from_csv(cls, path: str | Path, coder_id: str | None = None) -> "CoderSheet":
        path = Path(path)
        if coder_id is None:
            coder_id = path.stem.removeprefix("labels_")
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0] != "tweet_id" or len(header) < 2:
                raise ValueError(f"{path}: expected header 'tweet_id,<features...>'")
            features = tuple(header[1:])
            rows: dict[str, tuple[int, ...]] = {}
            for row in reader:
                if len(row) != len(header):
                    raise ValueError(f"{path}: ragged row {row!r}")
                if row[0] in rows:
                    raise ValueError(f"{path}: duplicate tweet_id {row[0]}")
                try:
                    rows[row[0]] = tuple(int(v) for v in row[1:])
                except ValueError as exc:
                    raise ValueError(f"{path}: non-integer label in {row!r}") from exc
        return cls(coder_id=coder_id, features=features, rows=rows)


@dataclass(frozen=True)
class VoteResult:
    """Adjudicated labels with the unanimity rate and any tie cells."""

    features: tuple[str, ...]
    rows: Mapping[str, tuple[int, ...]]
    consensus_rate: float
    ties: tuple[tuple[str, str], ...] = ()


def _check_aligned(sheets: Sequence[CoderSheet]) -> None:
    if len(sheets) < 2:
        raise ValueError("need at least two coder sheets")
    first = sheets[0]
    for sheet in sheets[1:]:
        if sheet.features != first.features:
            raise ValueError(
                f"feature lists differ: {first.coder_id}={first.features} "
                f"vs {sheet.coder_id}={sheet.features}"
            )
        if sheet.rows.keys() != first.rows.keys():
            missing = sorted(first.rows.keys() - sheet.rows.keys())
            extra = sorted(sheet.rows.keys() - first.rows.keys())
            raise ValueError(
                f"tweet sets differ between {first.coder_id} and {sheet.coder_id}: "
                f"missing={missing[:5]} extra={extra[:5]}"
            )


def majority_vote(sheets: Sequence[CoderSheet]) -> VoteResult:
    """Per-cell majority label; even ties resolve to 0 and are flagged."""
    _check_aligned(sheets)
    features = sheets[0].features
    n_coders = len(sheets)
    rows: dict[str, tuple[int, ...]] = {}
    ties: list[tuple[str, str]] = []
    unanimous = 0
    total = 0
    for tweet_id in sorted(sheets[0].rows):
        votes = [sheet.rows[tweet_id] for sheet in sheets]
        adjudicated = []
        for j, feature in enumerate(features):
            ones = sum(v[j] for v in votes)
            total += 1
            if ones == 0 or ones == n_coders:
                unanimous += 1
            if ones * 2 == n_coders:
                ties.append((tweet_id, feature))
                adjudicated.append(0)
            else:
                adjudicated.append(1 if ones * 2 > n_coders else 0)
        rows[tweet_id] = tuple(adjudicated)
    rate = unanimous / total if total else 1.0
    return VoteResult(
        features=features, rows=rows, consensus_rate=rate, ties=tuple(ties)
    )


def krippendorff_alpha(sheets: Sequence[CoderSheet]) -> float:
    """Nominal-metric Krippendorff's alpha over all (tweet, feature) cells.

    Computed pairwise: each cell is a unit whose coder values contribute
    ordered-pair disagreements weighted by 1/(m-1). Zero expected
    disagreement (all values identical) defines alpha as 1.0.
    """
    _check_aligned(sheets)
    features = sheets[0].features
    n_coders = len(sheets)
    if n_coders < 2:
        raise ValueError("alpha needs at least two coders")
    total_values = 0
    ones = 0
    observed = 0.0
    for tweet_id in sheets[0].rows:
        for j in range(len(features)):
            values = [sheet.rows[tweet_id][j] for sheet in sheets]
            m = len(values)
            unit_ones = sum(values)
            ones += unit_ones
            total_values += m
            disagreements = 2 * unit_ones * (m - unit_ones)
            observed += disagreements / (m - 1)
    if total_values == 0:
        return 1.0
    zeros = total_values - ones
    d_o = observed / total_values
    d_e = 2 * ones * zeros / (total_values * (total_values - 1))
    if d_e == 0.0:
        return 1.0
    return 1.0 - d_o / d_e


def extract_marks(text: str) -> tuple[int, int]:
    """Counts of '#'-prefixed and '@'-prefixed word-character runs."""
    return len(HASHTAG_RE.findall(text)), len(MENTION_RE.findall(text))


@dataclass(frozen=True)
class FeatureMatrix:
    """Design matrix for one group's log-virality regression.

    Columns: binary label features, hashtag count, mention count, then
    author one-hot indicators. ``group_spec`` lists column-index groups for
    the penalty: each non-author column alone, all author columns together.
    """

    group: int
    tweet_ids: tuple[str, ...]
    author_ids: tuple[str, ...]
    column_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    group_spec: tuple[tuple[int, ...], ...]
    authors: tuple[str, ...]
    excluded_zero_successes: int = 0
    excluded_thin_authors: int = 0

    @property
    def n(self) -> int:
        return len(self.tweet_ids)

    def __post_init__(self) -> None:
        if self.X.shape != (len(self.tweet_ids), len(self.column_names)):
            raise ValueError("X shape does not match row/column labels")
        if self.y.shape != (len(self.tweet_ids),):
            raise ValueError("y length does not match rows")
        n_auth = len(self.authors)
        if n_auth:
            onehot = self.X[:, -n_auth:]
            if not np.all(onehot.sum(axis=1) == 1):
                raise ValueError("author indicators must be one-hot")


def build_feature_matrix(
    vote: VoteResult,
    marks: Mapping[str, tuple[int, int]],
    estimates: Sequence[ViralityEstimate],
    authors: Mapping[str, str],
    group: int,
    min_author_tweets: int = 3,
    group_only_features: Mapping[int, tuple[str, ...]] | None = None,
) -> FeatureMatrix:
    """Assemble one group's matrix from labels, marks, and virality scores.

    Scorable labeled tweets of the group (boundary not zero_successes) are
    restricted to authors contributing at least min_author_tweets of them;
    features declared for the other group are dropped from the columns.
    """
    group_only = group_only_features or {}
    drop = {
        f for g, feats in group_only.items() if g != group for f in feats
    } - set(group_only.get(group, ()))
    kept_idx = [j for j, f in enumerate(vote.features) if f not in drop]
    feature_names = [vote.features[j] for j in kept_idx]

    by_id = {e.tweet_id: e for e in estimates}
    scorable: list[tuple[str, ViralityEstimate]] = []
    excluded_zero = 0
    for tweet_id in sorted(vote.rows):
        est = by_id.get(tweet_id)
        if est is None or est.group != group:
            continue
        if est.boundary is Boundary.ZERO_SUCCESSES or est.r_hat is None:
            excluded_zero += 1
            continue
        if tweet_id not in authors:
            raise ValueError(f"no author known for labeled tweet {tweet_id}")
        scorable.append((tweet_id, est))

    counts: dict[str, int] = {}
    for tweet_id, _ in scorable:
        counts[authors[tweet_id]] = counts.get(authors[tweet_id], 0) + 1
    kept_authors = tuple(sorted(a for a, c in counts.items() if c >= min_author_tweets))
    author_pos = {a: i for i, a in enumerate(kept_authors)}
    rows = [(t, e) for t, e in scorable if authors[t] in author_pos]
    excluded_thin = len(scorable) - len(rows)

    n = len(rows)
    p_feat = len(feature_names)
    p = p_feat + 2 + len(kept_authors)
    X = np.zeros((n, p))
    y = np.zeros(n)
    tweet_ids = []
    author_ids = []
    for i, (tweet_id, est) in enumerate(rows):
        labels = vote.rows[tweet_id]
        X[i, :p_feat] = [labels[j] for j in kept_idx]
        h, m = marks.get(tweet_id, (0, 0))
        X[i, p_feat] = h
        X[i, p_feat + 1] = m
        X[i, p_feat + 2 + author_pos[authors[tweet_id]]] = 1.0
        y[i] = est.ln_r
        tweet_ids.append(tweet_id)
        author_ids.append(authors[tweet_id])

    singles = [(j,) for j in range(p_feat + 2)]
    author_block = tuple(range(p_feat + 2, p))
    group_spec = tuple(singles) + ((author_block,) if kept_authors else ())
    column_names = (
        tuple(feature_names)
        + ("hashtags", "mentions")
        + tuple(f"author:{a}" for a in kept_authors)
    )
    return FeatureMatrix(
        group=group,
        tweet_ids=tuple(tweet_ids),
        author_ids=tuple(author_ids),
        column_names=column_names,
        X=X,
        y=y,
        group_spec=group_spec,
        authors=kept_authors,
        excluded_zero_successes=excluded_zero,
        excluded_thin_authors=excluded_thin,
    )


def write_features_csv(matrix: FeatureMatrix, path: str | Path) -> None:
    """Mirror of the matrix rows for inspection."""
    n_auth = len(matrix.authors)
    value_cols = (
        list(matrix.column_names[: len(matrix.column_names) - n_auth])
        if n_auth
        else list(matrix.column_names)
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tweet_id", "author_id", "group"] + value_cols + ["ln_r"])
        for i, tweet_id in enumerate(matrix.tweet_ids):
            values = [
                ("%g" % v) for v in matrix.X[i, : len(value_cols)]
            ]
            writer.writerow(
                [tweet_id, matrix.author_ids[i], matrix.group]
                + values
                + [f"{matrix.y[i]:.12g}"]
            )
