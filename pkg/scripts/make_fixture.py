"""Generate the bundled two-faction fixture under fixtures/.

A small deterministic world: 40 users split into an activist and a skeptic
faction, 10 authors posting 60 originals, in-faction retweets driven by the
follower graph (so every retweet has an exposure pathway), a few cross-
faction retweets to connect the retweet network, and three coder sheets
over four neutral content features.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures"

ACTIVISTS = [f"a{i:02d}" for i in range(20)]
SKEPTICS = [f"s{i:02d}" for i in range(20)]
AUTHORS = ACTIVISTS[:5] + SKEPTICS[:5]

ACTIVIST_TEXTS = [
    "climate crisis demands action now, join the strike #ClimateCrisis",
    "renewables beat coal on price, climate science is settled #ClimateCrisis",
    "massive turnout at the climate march today @a01 #ClimateCrisis #hope",
    "our city just passed a climate resolution, progress! #ClimateCrisis",
    "read the climate report, the evidence is overwhelming https://example.org/report #ClimateCrisis",
    "teachers and kids leading on climate action #ClimateCrisis #strike",
]
SKEPTIC_TEXTS = [
    "the climate hoax is about taxes, not temperature #climatehoax",
    "another freezing week, so much for climate warming #climatehoax",
    "climate alarmism ignores the data, wake up @s01 #climatehoax",
    "who profits from climate panic? follow the money #climatehoax",
    "this climate model failed again https://example.org/model #climatehoax #freedom",
    "no climate emergency, just weather and politics #climatehoax",
]

FEATURES = ["endorses_action", "humor", "links_evidence", "crowd_size"]
# Bernoulli rates per feature for each faction's originals.
RATES = {
    "activist": [0.75, 0.2, 0.45, 0.4],
    "skeptic": [0.2, 0.45, 0.35, 0.1],
}


def follower_edges(rng: np.random.Generator) -> list[tuple[str, str]]:
    users = ACTIVISTS + SKEPTICS
    edges = []
    for follower in users:
        for followee in users:
            if follower == followee:
                continue
            same = (follower[0] == followee[0])
            p = 0.5 if same else 0.04
            if rng.random() < p:
                edges.append((follower, followee))
    return edges


def make_tweets(rng: np.random.Generator, followers_of: dict[str, set[str]]):
    records = []
    originals = []
    idx = 0
    retweeted_once: set[str] = set()
    for author in AUTHORS:
        faction = ACTIVISTS if author.startswith("a") else SKEPTICS
        texts = ACTIVIST_TEXTS if author.startswith("a") else SKEPTIC_TEXTS
        for k in range(6):
            tweet_id = f"t{idx:03d}"
            ts = 1000 * idx
            text = texts[(idx + k) % len(texts)]
            records.append(
                {
                    "tweet_id": tweet_id,
                    "user_id": author,
                    "timestamp": ts,
                    "text": text,
                    "retweet_of": None,
                    "reply_to": None,
                    "lang": "en",
                }
            )
            originals.append((tweet_id, author, text))
            pool = sorted(
                u for u in followers_of.get(author, set()) if u in faction
            )
            n_rt = 1 + int(rng.poisson(2.2))
            picks = list(
                rng.choice(pool, size=min(n_rt, len(pool)), replace=False)
            )
            for j, user in enumerate(sorted(picks)):
                records.append(
                    {
                        "tweet_id": f"{tweet_id}r{j}",
                        "user_id": str(user),
                        "timestamp": ts + 10 * (j + 1),
                        "text": f"RT @{author}: {text}",
                        "retweet_of": tweet_id,
                        "reply_to": None,
                        "lang": "en",
                    }
                )
                retweeted_once.add(str(user))
            idx += 1

    # Cross-faction retweets connect the two halves of the retweet network.
    cross = [
        ("a18", "t030"), ("a19", "t036"), ("s18", "t000"), ("s19", "t006"),
    ]
    for j, (user, tweet_id) in enumerate(cross):
        origin = next(r for r in records if r["tweet_id"] == tweet_id)
        records.append(
            {
                "tweet_id": f"{tweet_id}x{j}",
                "user_id": user,
                "timestamp": origin["timestamp"] + 500,
                "text": f"RT @{origin['user_id']}: {origin['text']}",
                "retweet_of": tweet_id,
                "reply_to": None,
                "lang": "en",
            }
        )
        retweeted_once.add(user)

    # Anyone who never retweeted joins one in-faction cascade they follow.
    for user in ACTIVISTS + SKEPTICS:
        if user in retweeted_once or user in AUTHORS:
            continue
        for tweet_id, author, text in originals:
            if author[0] == user[0] and user in followers_of.get(author, set()):
                origin_ts = next(
                    r["timestamp"] for r in records if r["tweet_id"] == tweet_id
                )
                records.append(
                    {
                        "tweet_id": f"{tweet_id}f{user}",
                        "user_id": user,
                        "timestamp": origin_ts + 900,
                        "text": f"RT @{author}: {text}",
                        "retweet_of": tweet_id,
                        "reply_to": None,
                        "lang": "en",
                    }
                )
                retweeted_once.add(user)
                break
    return records, originals


def make_labels(rng: np.random.Generator, originals) -> dict[str, dict[str, list[int]]]:
    base: dict[str, list[int]] = {}
    for tweet_id, author, _ in originals:
        rates = RATES["activist" if author.startswith("a") else "skeptic"]
        base[tweet_id] = [int(rng.random() < p) for p in rates]
    sheets = {"c1": {t: list(v) for t, v in base.items()}}
    for coder, flip in (("c2", 0.06), ("c3", 0.08)):
        sheet = {}
        for tweet_id, values in base.items():
            sheet[tweet_id] = [
                1 - v if rng.random() < flip else v for v in values
            ]
        sheets[coder] = sheet
    return sheets


def main() -> None:
    rng = np.random.default_rng(42)
    OUT.mkdir(parents=True, exist_ok=True)

    edges = follower_edges(rng)
    followers_of: dict[str, set[str]] = {}
    for follower, followee in edges:
        followers_of.setdefault(followee, set()).add(follower)

    records, originals = make_tweets(rng, followers_of)
    with open(OUT / "tweets.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    with open(OUT / "edges.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["follower", "followee"])
        for follower, followee in edges:
            writer.writerow([follower, followee])

    for coder, sheet in make_labels(rng, originals).items():
        with open(OUT / f"labels_{coder}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tweet_id"] + FEATURES)
            for tweet_id in sorted(sheet):
                writer.writerow([tweet_id] + sheet[tweet_id])

    config = {
        "tweets": "tweets.jsonl",
        "edges": "edges.csv",
        "labels": ["labels_c1.csv", "labels_c2.csv", "labels_c3.csv"],
        "seed": 0,
        "balance_tol": 0.1,
        "min_author_tweets": 3,
        "folds": 5,
        "top_k": 30,
        "threshold": 2,
        "lambda_grid": 60,
        "group_only_features": {"activist": ["crowd_size"]},
    }
    (OUT / "config.json").write_text(
        json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    n_rt = sum(1 for r in records if r["retweet_of"])
    print(f"fixture: {len(records)} records ({len(originals)} originals, {n_rt} retweets)")
    print(f"edges: {len(edges)}")


if __name__ == "__main__":
    main()
