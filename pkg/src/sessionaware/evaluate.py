"""Iterative-reveal evaluation protocol, accuracy/coverage/popularity metrics and timing."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from sessionaware.algorithms.base import PredictionContext
from sessionaware.errors import ConfigError, DataError
from sessionaware.preprocess import Session, SliceSplit

logger = logging.getLogger(__name__)

METRICS = ("HR", "MRR", "Precision", "Recall", "MAP", "Coverage", "Popularity")


@dataclass(frozen=True)
class MetricConfig:
    cutoffs: tuple[int, ...] = (5, 10, 20)

    def __post_init__(self) -> None:
        cutoffs = tuple(sorted(set(int(k) for k in self.cutoffs)))
        if not cutoffs or cutoffs[0] < 1:
            raise ConfigError("cutoffs must be a non-empty list of integers >= 1")
        object.__setattr__(self, "cutoffs", cutoffs)


# -- per-event metrics ---------------------------------------------------


def hr_at_k(ranked: Sequence[int], next_item: int, k: int) -> float:
    return 1.0 if next_item in ranked[:k] else 0.0


def mrr_at_k(ranked: Sequence[int], next_item: int, k: int) -> float:
    top = ranked[:k]
    for rank, item in enumerate(top, start=1):
        if item == next_item:
            return 1.0 / rank
    return 0.0


def precision_recall_map_at_k(ranked: Sequence[int], remaining, k: int) -> tuple[float, float, float]:
    """Precision, recall and average precision of the top-k list against the
    set of remaining session items."""
    remaining = set(remaining)
    if not remaining:
        raise ValueError("remaining item set must not be empty")
    hits = 0
    ap = 0.0
    for i, item in enumerate(ranked[:k], start=1):
        if item in remaining:
            hits += 1
            ap += hits / i
    return hits / k, hits / len(remaining), ap / min(len(remaining), k)


def coverage_at_k(lists: Iterable[Sequence[int]], catalog, k: int) -> float:
    catalog = set(catalog)
    if not catalog:
        raise ValueError("catalog must not be empty")
    seen = set()
    for ranked in lists:
        seen.update(ranked[:k])
    return len(seen & catalog) / len(catalog)


def normalized_popularity(train_counts: Mapping[int, int]) -> dict[int, float]:
    if not train_counts:
        return {}
    lo, hi = min(train_counts.values()), max(train_counts.values())
    if hi == lo:
        return dict.fromkeys(train_counts, 0.0)
    return {i: (c - lo) / (hi - lo) for i, c in train_counts.items()}


def popularity_at_k(lists: Iterable[Sequence[int]], train_counts: Mapping[int, int], k: int) -> float:
    """Mean normalized training popularity over every filled top-k slot."""
    pop = normalized_popularity(train_counts)
    total, slots = 0.0, 0
    for ranked in lists:
        for item in ranked[:k]:
            total += pop.get(item, 0.0)
            slots += 1
    return total / slots if slots else 0.0


# -- aggregation -----------------------------------------------------------


@dataclass
class _CutoffSums:
    # per-event values are kept and summed with math.fsum, which is exactly
    # rounded and therefore independent of event order
    hr: list = field(default_factory=list)
    mrr: list = field(default_factory=list)
    precision: list = field(default_factory=list)
    recall: list = field(default_factory=list)
    ap: list = field(default_factory=list)
    pop: list = field(default_factory=list)
    covered: set = field(default_factory=set)

    def merge(self, other: "_CutoffSums") -> None:
        for name in ("hr", "mrr", "precision", "recall", "ap", "pop"):
            getattr(self, name).extend(getattr(other, name))
        self.covered |= other.covered


class MetricAccumulator:
    """Accumulates per-event metrics; results are independent of event order."""

    def __init__(self, cutoffs: Sequence[int], catalog, train_counts: Mapping[int, int]):
        self.cutoffs = tuple(cutoffs)
        self.catalog = frozenset(catalog)
        self.popularity = normalized_popularity(train_counts)
        self.sums = {k: _CutoffSums() for k in self.cutoffs}
        self.events = 0

    def add(self, ranked: Sequence[int], next_item: int, remaining) -> None:
        self.events += 1
        remaining = set(remaining)
        for k in self.cutoffs:
            s = self.sums[k]
            top = ranked[:k]
            s.hr.append(hr_at_k(top, next_item, k))
            s.mrr.append(mrr_at_k(top, next_item, k))
            p, r, ap = precision_recall_map_at_k(top, remaining, k)
            s.precision.append(p)
            s.recall.append(r)
            s.ap.append(ap)
            s.covered.update(top)
            s.pop.extend(self.popularity.get(item, 0.0) for item in top)

    def merge(self, other: "MetricAccumulator") -> None:
        self.events += other.events
        for k in self.cutoffs:
            self.sums[k].merge(other.sums[k])

    def results(self) -> dict[int, dict[str, float]]:
        n = self.events

        def mean(values, count):
            return math.fsum(values) / count if count else 0.0

        out = {}
        for k in self.cutoffs:
            s = self.sums[k]
            out[k] = {
                "HR": mean(s.hr, n),
                "MRR": mean(s.mrr, n),
                "Precision": mean(s.precision, n),
                "Recall": mean(s.recall, n),
                "MAP": mean(s.ap, n),
                "Coverage": len(s.covered & self.catalog) / len(self.catalog) if self.catalog else 0.0,
                "Popularity": mean(s.pop, len(s.pop)),
            }
        return out


@dataclass
class MetricReport:
    algorithm: str
    slice_index: int
    eval_set: str
    metrics: dict[int, dict[str, float]]
    training_time_s: float
    mean_prediction_time_ms: float
    prediction_events: int
    sessions: int

    def quality(self) -> dict[int, dict[str, float]]:
        return self.metrics

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "slice": self.slice_index,
            "eval_set": self.eval_set,
            "metrics": {str(k): v for k, v in self.metrics.items()},
            "training_time_s": self.training_time_s,
            "mean_prediction_time_ms": self.mean_prediction_time_ms,
            "prediction_events": self.prediction_events,
            "sessions": self.sessions,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        return cls(
            algorithm=data["algorithm"],
            slice_index=int(data["slice"]),
            eval_set=data["eval_set"],
            metrics={int(k): v for k, v in data["metrics"].items()},
            training_time_s=data["training_time_s"],
            mean_prediction_time_ms=data["mean_prediction_time_ms"],
            prediction_events=data["prediction_events"],
            sessions=data["sessions"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_rows(self) -> list[dict]:
        rows = []
        for k, vals in sorted(self.metrics.items()):
            row = {"algorithm": self.algorithm, "slice": self.slice_index, "eval_set": self.eval_set, "cutoff": k}
            row.update(vals)
            row.update(
                training_time_s=self.training_time_s,
                mean_prediction_time_ms=self.mean_prediction_time_ms,
                prediction_events=self.prediction_events,
                sessions=self.sessions,
            )
            rows.append(row)
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        rows = self.csv_rows()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()


# -- protocol --------------------------------------------------------------


def prediction_events(session: Session):
    """Yields (prefix length, next item, remaining items) for each reveal step."""
    items = session.items
    for t in range(1, len(items)):
        yield t, items[t], items[t:]


def _evaluate_sessions(recommender, sessions, split: SliceSplit, cfg: MetricConfig, acc_factory, timed: bool):
    acc = acc_factory()
    elapsed = 0.0
    depth = max(cfg.cutoffs)
    for session in sessions:
        history = split.train.history(session.user_id)
        for t, next_item, remaining in prediction_events(session):
            ctx = PredictionContext(session.prefix(t), history, session.start_time)
            if timed:
                start = time.perf_counter()
                ranked = recommender.predict(ctx)
                elapsed += time.perf_counter() - start
            else:
                ranked = recommender.predict(ctx)
            acc.add(ranked.top(depth), next_item, remaining)
    return acc, elapsed


def run_protocol(
    recommender,
    split: SliceSplit,
    eval_set: str = "test",
    cfg: Optional[MetricConfig] = None,
    threads: int = 1,
    training_time_s: float = 0.0,
    name: Optional[str] = None,
) -> MetricReport:
    """Evaluates ``recommender`` (anything with ``predict(ctx)``) on the
    validation or test sessions of ``split`` by revealing one item at a time.

    With ``threads > 1`` sessions are scored concurrently and merged in
    session order; prediction latency is only meaningful with one thread.
    """
    cfg = cfg or MetricConfig()
    sessions = list(split.eval_log(eval_set))
    if not sessions:
        raise DataError(f"{eval_set} set of slice {split.slice_index} is empty")
    for s in sessions:
        if len(s) < 2:
            raise DataError(f"evaluation session {s.session_id} has fewer than 2 events")

    counts = split.train.item_counts()

    def factory():
        return MetricAccumulator(cfg.cutoffs, split.item_vocabulary, counts)

    if threads > 1:
        chunks = [sessions[i::threads] for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _evaluate_sessions(recommender, c, split, cfg, factory, True), chunks))
        acc = factory()
        elapsed = 0.0
        for part, t in parts:
            acc.merge(part)
            elapsed += t
    else:
        acc, elapsed = _evaluate_sessions(recommender, sessions, split, cfg, factory, True)

    return MetricReport(
        algorithm=name or getattr(recommender, "name", type(recommender).__name__),
        slice_index=split.slice_index,
        eval_set=eval_set,
        metrics=acc.results(),
        training_time_s=training_time_s,
        mean_prediction_time_ms=1000.0 * elapsed / acc.events if acc.events else 0.0,
        prediction_events=acc.events,
        sessions=len(sessions),
    )


def measure_times(build, split: SliceSplit, eval_set: str = "test", cfg: Optional[MetricConfig] = None):
    """Fits via ``build(train) -> recommender`` and runs the protocol single-threaded.

    Returns the recommender and its report with training and prediction times filled in.
    """
    start = time.perf_counter()
    recommender = build(split.train)
    train_time = time.perf_counter() - start
    report = run_protocol(recommender, split, eval_set, cfg, threads=1, training_time_s=train_time)
    return recommender, report
