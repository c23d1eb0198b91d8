"""End-to-end pipeline orchestration with per-stage subcommands.

Every stage reads its inputs from files in the output directory and writes
its artifacts back there; the one-shot pipeline simply runs the stages in
order. Re-running a stage in isolation therefore reproduces the one-shot
bytes exactly. The manifest carries the config echo, library versions,
stage counts, and the master seed; it deliberately omits the worker count
and any timestamps so output bytes are schedule-independent.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .exposure import ExposureLedger, build_exposure_ledger, choose_scope, write_ledger_csv
from .graph import (
    PartitionAssignment,
    RetweetNetwork,
    bisect_partition,
    build_follower_network,
    build_retweet_network,
    largest_component,
    to_dot,
)
from .ingest import (
    Cascade,
    TweetRecord,
    build_cascades,
    filter_corpus,
    parse_records,
    seed_pair_users,
)
from .labels import (
    CoderSheet,
    build_feature_matrix,
    extract_marks,
    krippendorff_alpha,
    majority_vote,
    write_features_csv,
)
from .lasso import (
    ConvergenceError,
    LassoConfig,
    fit_cv,
    kkt_residual_from_fit,
    report_coefficients,
    write_cv_curve_csv,
    write_regress_csv,
)
from .sim import (
    ActivitySpec,
    GraphSpec,
    SimConfig,
    generate_world,
    simulate_corpus,
    write_world,
)
from .textstats import cross_group_counts, word_diff_table, write_spread_csv, write_words_csv
from .virality import (
    Boundary,
    UserActivity,
    ViralityEstimate,
    activity_values,
    compute_activities,
    score_corpus,
    write_virality_csv,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2

SKEPTIC_PAIR = ("climate", "hoax")


@dataclass(frozen=True)
class PipelineConfig:
    tweets: Path
    edges: Path
    labels: tuple[Path, ...]
    out: Path
    seed: int = 0
    workers: int = 1
    balance_tol: float = 0.1
    min_author_tweets: int = 3
    folds: int = 5
    top_k: int = 30
    threshold: int = 10
    include_unexposed_retweeters: bool = False
    raw_activities: bool = False
    stemmer: bool = False
    lambda_grid: int = 100
    group_only_features: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    declared_inputs: Mapping[str, object] | None = None

    def echo(self) -> dict:
        """Manifest form: everything a rerun needs except the worker count and
        the output location, neither of which may influence output bytes.
        Input paths echo as declared (config values or flag overrides), not as
        resolved, so the manifest does not depend on where the tree sits."""
        declared = self.declared_inputs or {}
        return {
            "tweets": str(declared.get("tweets", self.tweets)),
            "edges": str(declared.get("edges", self.edges)),
            "labels": [str(p) for p in declared.get("labels", self.labels)],
            "seed": self.seed,
            "balance_tol": self.balance_tol,
            "min_author_tweets": self.min_author_tweets,
            "folds": self.folds,
            "top_k": self.top_k,
            "threshold": self.threshold,
            "include_unexposed_retweeters": self.include_unexposed_retweeters,
            "raw_activities": self.raw_activities,
            "stemmer": self.stemmer,
            "lambda_grid": self.lambda_grid,
            "group_only_features": {
                k: list(v) for k, v in sorted(self.group_only_features.items())
            },
        }


def parallel_map(fn, items, workers: int, initializer=None, initargs=()):
    """Order-preserving map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [fn(item) for item in items]
    with multiprocessing.Pool(
        workers, initializer=initializer, initargs=initargs
    ) as pool:
        return pool.map(fn, items)


# ---------------------------------------------------------------- manifest


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json"


def load_manifest(out: Path) -> dict:
    path = _manifest_path(out)
    if path.exists():
        return json.loads(path.read_text(encoding="utf-8"))
    return {"stages": {}}


def write_manifest(out: Path, manifest: dict) -> None:
    manifest.setdefault("versions", {})
    manifest["versions"] = {
        "echospread": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    path = _manifest_path(out)
    path.write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def record_stage(config: PipelineConfig, name: str, counts: dict) -> None:
    manifest = load_manifest(config.out)
    manifest["config"] = config.echo()
    manifest.setdefault("stages", {})[name] = counts
    manifest.pop("failure", None)
    write_manifest(config.out, manifest)


def record_failure(config: PipelineConfig, stage: str, error: Exception) -> None:
    manifest = load_manifest(config.out)
    manifest["config"] = config.echo()
    manifest["failure"] = {"stage": stage, "error": str(error)}
    write_manifest(config.out, manifest)


# ------------------------------------------------------- shared file loads


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"missing {what}: {path}")
    return path


def _load_filtered(out: Path) -> list[TweetRecord]:
    path = _require(out / "filtered.jsonl", "intermediate filtered.jsonl (run ingest)")
    records, report = parse_records(path)
    if report.malformed:
        raise ValueError(f"corrupt intermediate {path}")
    return records


def _load_activities(out: Path) -> dict[str, UserActivity]:
    path = _require(out / "activities.csv", "intermediate activities.csv (run ingest)")
    raw: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["user", "raw"]:
            raise ValueError(f"unexpected header in {path}: {header}")
        for row in reader:
            raw[row[0]] = int(row[1])
    max_raw = max(raw.values(), default=0)
    return {
        u: UserActivity(raw=c, normalized=(c / max_raw if max_raw else 0.0))
        for u, c in raw.items()
    }


def _load_retweet_network(out: Path) -> RetweetNetwork:
    path = _require(
        out / "retweet_edges.csv", "intermediate retweet_edges.csv (run network)"
    )
    edges = []
    nodes = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["a", "b"]:
            raise ValueError(f"unexpected header in {path}: {header}")
        for a, b in reader:
            edges.append((a, b))
            nodes.update((a, b))
    return RetweetNetwork(nodes=frozenset(nodes), edges=tuple(edges))


def _load_partition(out: Path) -> PartitionAssignment:
    path = _require(out / "partition.csv", "intermediate partition.csv (run partition)")
    groups: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["user", "group"]:
            raise ValueError(f"unexpected header in {path}: {header}")
        for user, group in reader:
            groups[user] = int(group)
    net = _load_retweet_network(out)
    cut = sum(1 for a, b in net.edges if groups.get(a) != groups.get(b))
    sizes = [0, 0]
    for g in groups.values():
        sizes[g] += 1
    balance = max(sizes) / max(1, sum(sizes))
    return PartitionAssignment(groups=groups, cut_size=cut, balance=balance)


def _load_virality(out: Path) -> list[ViralityEstimate]:
    path = _require(out / "virality.csv", "intermediate virality.csv (run virality)")
    estimates = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            estimates.append(
                ViralityEstimate(
                    tweet_id=row["tweet_id"],
                    group=int(row["group"]),
                    successes=int(row["successes"]),
                    failures=int(row["failures"]),
                    exposed=int(row["exposed"]),
                    r_hat=float(row["r_hat"]) if row["r_hat"] else None,
                    ln_r=float(row["ln_r"]) if row["ln_r"] else None,
                    boundary=Boundary(row["boundary"]),
                )
            )
    return estimates


def name_groups(
    records: Sequence[TweetRecord], assignment: PartitionAssignment
) -> dict[int, str]:
    """The group holding more hoax-pair users is the skeptic side."""
    hoax_users = seed_pair_users(records, (SKEPTIC_PAIR,))[SKEPTIC_PAIR]
    counts = [0, 0]
    for user in hoax_users:
        g = assignment.groups.get(user)
        if g is not None:
            counts[g] += 1
    skeptic = 0 if counts[0] > counts[1] else 1
    return {skeptic: "skeptic", 1 - skeptic: "activist"}


def _cascades(records: Sequence[TweetRecord]) -> tuple[list[Cascade], object]:
    topical, _ = filter_corpus(records)
    return build_cascades(topical)


# ------------------------------------------------------------------ stages


def stage_ingest(config: PipelineConfig) -> dict:
    records, parse_report = parse_records(_require(config.tweets, "tweets file"))
    topical, eligible = filter_corpus(records)
    activities = compute_activities(records)

    with open(config.out / "filtered.jsonl", "w", encoding="utf-8") as fh:
        for rec in topical:
            fh.write(
                json.dumps(
                    {
                        "tweet_id": rec.tweet_id,
                        "user_id": rec.user_id,
                        "timestamp": rec.timestamp,
                        "text": rec.text,
                        "retweet_of": rec.retweet_of,
                        "reply_to": rec.reply_to,
                        "lang": rec.lang,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    with open(config.out / "activities.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user", "raw"])
        for user in sorted(activities):
            writer.writerow([user, activities[user].raw])
    return {
        "lines": parse_report.lines,
        "parsed": parse_report.parsed,
        "malformed": parse_report.malformed,
        "duplicates": parse_report.duplicates,
        "topical": len(topical),
        "eligible_users": len(eligible),
    }


def stage_network(config: PipelineConfig) -> dict:
    records = _load_filtered(config.out)
    topical, eligible = filter_corpus(records)
    cascades, report = build_cascades(topical)
    net = build_retweet_network(cascades, eligible)
    comp = largest_component(net)
    with open(config.out / "retweet_edges.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a", "b"])
        for a, b in sorted(comp.edges):
            writer.writerow([a, b])
    return {
        "cascades": report.cascades,
        "stub_origins": report.stub_origins,
        "dropped_cycles": report.dropped_cycles,
        "network_nodes": net.n_nodes,
        "network_edges": net.n_edges,
        "component_nodes": comp.n_nodes,
        "component_edges": comp.n_edges,
    }


def stage_partition(config: PipelineConfig) -> dict:
    net = _load_retweet_network(config.out)
    assignment = bisect_partition(net, balance_tol=config.balance_tol, seed=config.seed)
    records = _load_filtered(config.out)
    names = name_groups(records, assignment)
    with open(config.out / "partition.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user", "group"])
        for user in sorted(assignment.groups):
            writer.writerow([user, assignment.groups[user]])
    (config.out / "network.dot").write_text(to_dot(net, assignment), encoding="utf-8")
    sizes = assignment.group_sizes()
    return {
        "cut_size": assignment.cut_size,
        "balance": assignment.balance,
        "group_sizes": list(sizes),
        "group_names": {str(g): n for g, n in names.items()},
    }


_LEDGER_CTX: dict = {}


def _init_ledger_worker(follow, assignment, include_unexposed) -> None:
    _LEDGER_CTX["ctx"] = (follow, assignment, include_unexposed)


def _ledger_task(cascade: Cascade) -> tuple[str, ExposureLedger | None]:
    follow, assignment, include_unexposed = _LEDGER_CTX["ctx"]
    try:
        scope = choose_scope(cascade, assignment)
    except ValueError:
        return cascade.tweet_id, None
    return cascade.tweet_id, build_exposure_ledger(
        cascade, follow, scope, include_unexposed_retweeters=include_unexposed
    )


def stage_virality(config: PipelineConfig) -> dict:
    records = _load_filtered(config.out)
    cascades, _ = _cascades(records)
    assignment = _load_partition(config.out)
    activities = _load_activities(config.out)
    universe = {rec.user_id for rec in records}
    follow, dropped_edges = build_follower_network(
        _require(config.edges, "edges file"), universe
    )

    results = parallel_map(
        _ledger_task,
        cascades,
        config.workers,
        initializer=_init_ledger_worker,
        initargs=(follow, assignment, config.include_unexposed_retweeters),
    )
    ledgers = [led for _, led in results if led is not None]
    unscorable = sum(1 for _, led in results if led is None)
    write_ledger_csv(ledgers, config.out / "ledgers.csv")

    act = activity_values(activities, raw=config.raw_activities)
    estimates, report = score_corpus(cascades, ledgers, act)
    write_virality_csv(estimates, config.out / "virality.csv")
    return {
        "dropped_edges": dropped_edges,
        "ledgers": len(ledgers),
        "unscorable_cascades": unscorable,
        "scored": report.scored,
        "zero_successes": report.zero_successes,
    }


def stage_words(config: PipelineConfig) -> dict:
    records = _load_filtered(config.out)
    cascades, _ = _cascades(records)
    assignment = _load_partition(config.out)
    names = name_groups(records, assignment)
    activist = next(g for g, n in names.items() if n == "activist")
    texts: dict[int, list[str]] = {0: [], 1: []}
    for cascade in sorted(cascades, key=lambda c: c.tweet_id):
        g = assignment.groups.get(cascade.origin.user_id)
        if g is not None and not cascade.stub_origin:
            texts[g].append(cascade.origin.text)
    rows_act, rows_ske = word_diff_table(
        texts[activist], texts[1 - activist], top_k=config.top_k, stemmer=config.stemmer
    )
    write_words_csv(rows_act, config.out / "words_activist.csv")
    write_words_csv(rows_ske, config.out / "words_skeptic.csv")
    return {
        "activist_tweets": len(texts[activist]),
        "skeptic_tweets": len(texts[1 - activist]),
        "rows": [len(rows_act), len(rows_ske)],
    }


def stage_spread(config: PipelineConfig) -> dict:
    records = _load_filtered(config.out)
    cascades, _ = _cascades(records)
    assignment = _load_partition(config.out)
    names = name_groups(records, assignment)
    activist = next(g for g, n in names.items() if n == "activist")
    counts, summary = cross_group_counts(
        cascades, assignment, threshold=config.threshold, activist_group=activist
    )
    write_spread_csv(counts, config.out / "spread.csv")
    return {"tweets": len(counts), "threshold": summary.threshold,
            "qualifying": summary.qualifying}


def stage_labels(config: PipelineConfig) -> dict:
    if len(config.labels) < 2:
        raise ValueError("need at least two label sheets")
    sheets = [CoderSheet.from_csv(_require(p, "label sheet")) for p in config.labels]
    sheets.sort(key=lambda s: s.coder_id)
    vote = majority_vote(sheets)
    alpha = krippendorff_alpha(sheets)

    records = _load_filtered(config.out)
    by_id = {rec.tweet_id: rec for rec in records}
    authors = {tid: by_id[tid].user_id for tid in vote.rows if tid in by_id}
    marks = {tid: extract_marks(by_id[tid].text) for tid in vote.rows if tid in by_id}
    estimates = _load_virality(config.out)
    assignment = _load_partition(config.out)
    names = name_groups(records, assignment)
    name_to_group = {n: g for g, n in names.items()}
    group_only = {
        name_to_group[name]: tuple(feats)
        for name, feats in config.group_only_features.items()
        if name in name_to_group
    }

    counts: dict = {
        "krippendorff_alpha": alpha,
        "consensus_rate": vote.consensus_rate,
        "ties": len(vote.ties),
        "labeled_tweets": len(vote.rows),
    }
    for g, name in sorted(names.items()):
        matrix = build_feature_matrix(
            vote,
            marks,
            estimates,
            authors,
            group=g,
            min_author_tweets=config.min_author_tweets,
            group_only_features=group_only,
        )
        write_features_csv(matrix, config.out / f"features_{name}.csv")
        counts[f"rows_{name}"] = matrix.n
        counts[f"excluded_zero_successes_{name}"] = matrix.excluded_zero_successes
        counts[f"excluded_thin_authors_{name}"] = matrix.excluded_thin_authors
    return counts


def _read_features(path: Path) -> tuple[np.ndarray, np.ndarray, tuple, list[str]]:
    """Rebuild the design from features_<group>.csv: value columns plus
    author one-hots recovered from the author_id column (sorted order)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    value_cols = header[3:-1]
    author_ids = [row[1] for row in rows]
    authors = sorted(set(author_ids))
    author_pos = {a: i for i, a in enumerate(authors)}
    n, p = len(rows), len(value_cols) + len(authors)
    X = np.zeros((n, p))
    y = np.zeros(n)
    for i, row in enumerate(rows):
        X[i, : len(value_cols)] = [float(v) for v in row[3:-1]]
        X[i, len(value_cols) + author_pos[row[1]]] = 1.0
        y[i] = float(row[-1])
    singles = tuple((j,) for j in range(len(value_cols)))
    author_block = tuple(range(len(value_cols), p))
    groups = singles + ((author_block,) if authors else ())
    columns = value_cols + [f"author:{a}" for a in authors]
    return X, y, groups, columns


def stage_regress(config: PipelineConfig) -> dict:
    counts: dict = {}
    for name in ("activist", "skeptic"):
        path = _require(
            config.out / f"features_{name}.csv",
            f"intermediate features_{name}.csv (run labels)",
        )
        X, y, groups, columns = _read_features(path)
        if X.shape[0] < max(2, config.folds):
            counts[name] = {"skipped": f"only {X.shape[0]} rows"}
            continue
        lasso_cfg = LassoConfig(
            lambda_grid=config.lambda_grid, folds=config.folds, seed=config.seed
        )
        fit = fit_cv(X, y, groups, lasso_cfg)
        residual = kkt_residual_from_fit(X, y, groups, fit)
        if residual > 1e-6:
            raise ConvergenceError(
                f"{name}: KKT residual {residual:.3g} above 1e-6", fit.beta, residual
            )
        report = report_coefficients(fit, columns)
        write_regress_csv(report, config.out / f"regress_{name}.csv")
        write_cv_curve_csv(fit.cv_curve, config.out / f"cv_curve_{name}.csv")
        counts[name] = {
            "lambda": fit.lam,
            "active_groups": len(fit.active_groups),
            "kkt_residual": residual,
            "rows": int(X.shape[0]),
        }
    return counts


STAGES: tuple[tuple[str, object], ...] = (
    ("ingest", stage_ingest),
    ("network", stage_network),
    ("partition", stage_partition),
    ("virality", stage_virality),
    ("words", stage_words),
    ("spread", stage_spread),
    ("labels", stage_labels),
    ("regress", stage_regress),
)


def _exit_code_for(error: Exception) -> int:
    if isinstance(error, (ConvergenceError, ArithmeticError)):
        return EXIT_NUMERICAL
    return EXIT_INPUT


def run_stage(config: PipelineConfig, name: str) -> int:
    fn = dict(STAGES)[name]
    config.out.mkdir(parents=True, exist_ok=True)
    try:
        counts = fn(config)
    except Exception as error:  # noqa: BLE001 - boundary turns errors into codes
        record_failure(config, name, error)
        print(f"error in stage {name}: {error}", file=sys.stderr)
        return _exit_code_for(error)
    record_stage(config, name, counts)
    return EXIT_OK


def run_pipeline(config: PipelineConfig) -> int:
    config.out.mkdir(parents=True, exist_ok=True)
    for path, what in (
        (config.tweets, "tweets"),
        (config.edges, "edges"),
        *((p, "labels") for p in config.labels),
    ):
        if not Path(path).exists():
            error = FileNotFoundError(f"missing {what} input: {path}")
            record_failure(config, "validate-inputs", error)
            print(f"error: {error}", file=sys.stderr)
            return EXIT_INPUT
    for name, _ in STAGES:
        code = run_stage(config, name)
        if code != EXIT_OK:
            return code
    return EXIT_OK


# --------------------------------------------------------------- interface


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON pipeline configuration")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--workers", type=int, help="process count for ledger building")
    parser.add_argument("--tweets", type=Path, help="tweets.jsonl input")
    parser.add_argument("--edges", type=Path, help="edges.csv input")
    parser.add_argument("--labels", type=Path, nargs="*", help="coder label sheets")
    parser.add_argument("--min-author-tweets", type=int, dest="min_author_tweets")
    parser.add_argument("--balance-tol", type=float, dest="balance_tol")
    parser.add_argument("--folds", type=int)
    parser.add_argument("--top-k", type=int, dest="top_k")
    parser.add_argument("--threshold", type=int)
    parser.add_argument(
        "--include-unexposed-retweeters",
        action="store_true",
        default=None,
        dest="include_unexposed_retweeters",
    )
    parser.add_argument("--raw-activities", action="store_true", default=None,
                        dest="raw_activities")
    parser.add_argument("--stemmer", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="echospread", description="Retweet-cascade virality pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run",) + tuple(n for n, _ in STAGES) + ("simulate",):
        sp = sub.add_parser(name)
        _add_common_flags(sp)
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    raw: dict = {}
    base = Path(".")
    if args.config is not None:
        cfg_path = Path(args.config)
        raw = json.loads(_require(cfg_path, "config file").read_text(encoding="utf-8"))
        base = cfg_path.parent

    def pick(key, fallback):
        override = getattr(args, key, None)
        if override is not None:
            return override
        return raw.get(key, fallback)

    def as_path(value) -> Path:
        path = Path(value)
        return path if path.is_absolute() else base / path

    tweets = pick("tweets", "tweets.jsonl")
    edges = pick("edges", "edges.csv")
    labels = pick("labels", [])
    out = getattr(args, "out", None) or raw.get("out", "out")
    return PipelineConfig(
        tweets=as_path(tweets),
        edges=as_path(edges),
        labels=tuple(as_path(p) for p in labels),
        out=Path(out),
        seed=int(pick("seed", 0)),
        workers=int(pick("workers", 1)),
        balance_tol=float(pick("balance_tol", 0.1)),
        min_author_tweets=int(pick("min_author_tweets", 3)),
        folds=int(pick("folds", 5)),
        top_k=int(pick("top_k", 30)),
        threshold=int(pick("threshold", 10)),
        include_unexposed_retweeters=bool(pick("include_unexposed_retweeters", False)),
        raw_activities=bool(pick("raw_activities", False)),
        stemmer=bool(pick("stemmer", False)),
        lambda_grid=int(raw.get("lambda_grid", 100)),
        group_only_features={
            k: tuple(v) for k, v in raw.get("group_only_features", {}).items()
        },
        declared_inputs={
            "tweets": str(tweets),
            "edges": str(edges),
            "labels": [str(p) for p in labels],
        },
    )


def _sim_config(args: argparse.Namespace) -> SimConfig:
    raw: dict = {}
    if args.config is not None:
        raw = json.loads(
            _require(Path(args.config), "config file").read_text(encoding="utf-8")
        ).get("sim", {})
    graph = raw.get("graph", {})
    activity = raw.get("activity", {})
    seed = args.seed if args.seed is not None else int(raw.get("master_seed", 0))
    return SimConfig(
        graph=GraphSpec(
            kind=graph.get("kind", "directed-random"),
            n=int(graph.get("n", 100)),
            p=graph.get("p", 0.1),
            p_in=graph.get("p_in"),
            p_out=graph.get("p_out"),
        ),
        activity=ActivitySpec(
            kind=activity.get("kind", "uniform"),
            lo=float(activity.get("lo", 0.2)),
            hi=float(activity.get("hi", 1.0)),
            mu=float(activity.get("mu", 0.0)),
            sigma=float(activity.get("sigma", 1.0)),
        ),
        r_values=tuple(raw.get("r_values", [0.1])),
        cascades_per_r=int(raw.get("cascades_per_r", 10)),
        master_seed=seed,
        seed_pool=raw.get("seed_pool", "top-decile"),
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    out = Path(args.out) if args.out is not None else Path("out")
    try:
        config = _sim_config(args)
        world = generate_world(config)
        sims, truth = simulate_corpus(world)
        write_world(world, sims, truth, out)
    except Exception as error:  # noqa: BLE001 - boundary turns errors into codes
        print(f"error: {error}", file=sys.stderr)
        return _exit_code_for(error)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.command == "simulate":
        return cmd_simulate(args)
    try:
        config = _config_from_args(args)
    except Exception as error:  # noqa: BLE001 - boundary turns errors into codes
        print(f"error: {error}", file=sys.stderr)
        return EXIT_INPUT
    if args.command == "run":
        return run_pipeline(config)
    return run_stage(config, args.command)


if __name__ == "__main__":
    raise SystemExit(main())
