"""Sessionization, temporal slicing, filtering and user-wise splitting."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from sessionaware.errors import ConfigError, DataError
from sessionaware.eventlog import EventLog

logger = logging.getLogger(__name__)

DAY = 86400


@dataclass(frozen=True)
class Session:
    session_id: int
    user_id: int
    items: tuple[int, ...]
    timestamps: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.items) != len(self.timestamps):
            raise ValueError("items and timestamps must have equal length")
        if not self.items:
            raise ValueError("a session needs at least one event")

    @property
    def start_time(self) -> int:
        return self.timestamps[0]

    def __len__(self) -> int:
        return len(self.items)

    def prefix(self, length: int) -> "Session":
        return Session(self.session_id, self.user_id, self.items[:length], self.timestamps[:length])


def _recency_key(s: Session) -> tuple[int, int]:
    return (s.start_time, s.session_id)


class SessionLog:
    """Sessions plus a per-user index ordered by start time."""

    def __init__(self, sessions: Iterable[Session]):
        self.sessions: tuple[Session, ...] = tuple(sorted(sessions, key=_recency_key))
        by_user: dict[int, list[Session]] = defaultdict(list)
        for s in self.sessions:
            by_user[s.user_id].append(s)
        self.by_user: dict[int, tuple[Session, ...]] = {u: tuple(v) for u, v in by_user.items()}

    def __len__(self) -> int:
        return len(self.sessions)

    def __iter__(self):
        return iter(self.sessions)

    @property
    def num_events(self) -> int:
        return sum(len(s) for s in self.sessions)

    @property
    def users(self) -> list[int]:
        return sorted(self.by_user)

    def items(self) -> set[int]:
        return {i for s in self.sessions for i in s.items}

    def item_counts(self) -> Counter:
        return Counter(i for s in self.sessions for i in s.items)

    def history(self, user_id: int) -> tuple[Session, ...]:
        return self.by_user.get(user_id, ())

    def stats(self) -> dict[str, float]:
        n_users = len(self.by_user)
        n_sessions = len(self.sessions)
        n_events = self.num_events
        return {
            "events": n_events,
            "users": n_users,
            "sessions": n_sessions,
            "items": len(self.items()),
            "sessions_per_user": n_sessions / n_users if n_users else 0.0,
            "actions_per_session": n_events / n_sessions if n_sessions else 0.0,
        }


@dataclass(frozen=True)
class PreprocessConfig:
    inactivity_gap: int = 1800
    min_item_support: int = 5
    min_session_length: int = 2
    max_session_length: Optional[int] = None
    min_user_sessions: int = 3
    num_slices: int = 5
    skip_head: Optional[int] = None  # seconds dropped from the start of the log
    user_sample: Optional[float] = None  # fraction of users kept, seeded

    def __post_init__(self) -> None:
        if self.inactivity_gap <= 0:
            raise ConfigError("inactivity_gap must be > 0")
        for name in ("min_item_support", "min_session_length", "min_user_sessions", "num_slices"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.max_session_length is not None and self.max_session_length < 1:
            raise ConfigError("max_session_length must be >= 1")
        if self.skip_head is not None and self.skip_head < 0:
            raise ConfigError("skip_head must be >= 0")
        if self.user_sample is not None and not 0 < self.user_sample <= 1:
            raise ConfigError("user_sample must be in (0, 1]")


@dataclass(frozen=True)
class SliceSplit:
    slice_index: int
    train: SessionLog
    validation: SessionLog
    test: SessionLog
    item_vocabulary: frozenset = field(default_factory=frozenset)

    def eval_log(self, which: str) -> SessionLog:
        if which == "validation":
            return self.validation
        if which == "test":
            return self.test
        raise ValueError(f"eval set must be 'validation' or 'test', got {which!r}")

    def counts(self) -> dict[str, int]:
        return {
            "train_sessions": len(self.train),
            "train_events": self.train.num_events,
            "validation_sessions": len(self.validation),
            "test_sessions": len(self.test),
            "users": len(set(self.train.by_user) | set(self.test.by_user)),
            "items": len(self.item_vocabulary),
        }


def sessionize(log: EventLog, gap: int) -> SessionLog:
    """Splits each user's events wherever consecutive events are more than
    ``gap`` seconds apart. Session ids follow the canonical event order."""
    if gap <= 0:
        raise ConfigError(f"inactivity gap must be > 0, got {gap}")
    n = len(log)
    if n == 0:
        return SessionLog([])
    users, items, ts = log.users, log.items, log.timestamps
    new = np.ones(n, dtype=bool)
    new[1:] = (users[1:] != users[:-1]) | ((ts[1:] - ts[:-1]) > gap)
    starts = np.flatnonzero(new)
    ends = np.append(starts[1:], n)
    items_l, ts_l, users_l = items.tolist(), ts.tolist(), users.tolist()
    sessions = [
        Session(sid, users_l[a], tuple(items_l[a:b]), tuple(ts_l[a:b]))
        for sid, (a, b) in enumerate(zip(starts.tolist(), ends.tolist()))
    ]
    return SessionLog(sessions)


@dataclass(frozen=True)
class TimeSlices:
    slices: list[SessionLog]
    boundaries: list[tuple[float, float]]


def slice_by_time(log: SessionLog, n: int) -> TimeSlices:
    """Partitions sessions into ``n`` equal-duration windows by start time.

    Windows are half-open except the last, which is closed on the right.
    """
    if n < 1:
        raise ConfigError("number of slices must be >= 1")
    if len(log) == 0:
        raise DataError("cannot slice an empty session log")
    starts = [s.start_time for s in log]
    distinct = len(set(starts))
    if n > distinct:
        raise DataError(f"{n} slices requested but only {distinct} distinct session start times")
    lo, hi = min(starts), max(starts)
    span = hi - lo
    buckets: list[list[Session]] = [[] for _ in range(n)]
    for s in log:
        # integer arithmetic keeps window assignment exact at the bounds
        idx = 0 if span == 0 else min(((s.start_time - lo) * n) // span, n - 1)
        buckets[idx].append(s)
    width = span / n
    bounds = [(lo + k * width, lo + (k + 1) * width) for k in range(n)]
    return TimeSlices([SessionLog(b) for b in buckets], bounds)


def filter_slice(log: SessionLog, cfg: PreprocessConfig) -> SessionLog:
    """Truncate, then drop rare items, short sessions and light users; single pass."""
    sessions = list(log)
    if cfg.max_session_length is not None:
        m = cfg.max_session_length
        sessions = [
            s if len(s) <= m else Session(s.session_id, s.user_id, s.items[:m], s.timestamps[:m])
            for s in sessions
        ]

    counts = Counter(i for s in sessions for i in s.items)
    kept: list[Session] = []
    for s in sessions:
        pairs = [(i, t) for i, t in zip(s.items, s.timestamps) if counts[i] >= cfg.min_item_support]
        if len(pairs) < cfg.min_session_length:
            continue
        if len(pairs) == len(s):
            kept.append(s)
        else:
            it, tt = zip(*pairs)
            kept.append(Session(s.session_id, s.user_id, tuple(it), tuple(tt)))

    per_user = Counter(s.user_id for s in kept)
    return SessionLog(s for s in kept if per_user[s.user_id] >= cfg.min_user_sessions)


def _restrict(session: Session, vocab: frozenset) -> Optional[Session]:
    pairs = [(i, t) for i, t in zip(session.items, session.timestamps) if i in vocab]
    if not pairs:
        return None
    it, tt = zip(*pairs)
    return Session(session.session_id, session.user_id, tuple(it), tuple(tt))


def split_user_wise(log: SessionLog, slice_index: int = 0, min_eval_length: int = 2) -> SliceSplit:
    """Last session per user goes to test, second-to-last to validation, the
    rest to train. Items unknown to train are then removed from the
    evaluation sessions, and evaluation sessions that become too short are dropped."""
    train, val, test = [], [], []
    for user, sessions in sorted(log.by_user.items()):
        if len(sessions) < 3:
            raise DataError(f"user {user} has {len(sessions)} sessions; at least 3 are required")
        train.extend(sessions[:-2])
        val.append(sessions[-2])
        test.append(sessions[-1])

    vocab = frozenset(i for s in train for i in s.items)

    def clean(group: Sequence[Session]) -> list[Session]:
        out = []
        for s in group:
            r = _restrict(s, vocab)
            if r is not None and len(r) >= min_eval_length:
                out.append(r)
        return out

    return SliceSplit(
        slice_index=slice_index,
        train=SessionLog(train),
        validation=SessionLog(clean(val)),
        test=SessionLog(clean(test)),
        item_vocabulary=vocab,
    )


def sample_users(log: EventLog, fraction: float, seed: int) -> EventLog:
    """Keeps a seeded uniform random subset of users (rounded, at least one)."""
    users = np.unique(log.users)
    k = max(1, int(round(fraction * len(users))))
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(users, size=k, replace=False))
    return log.select(np.isin(log.users, chosen))


def skip_log_head(log: EventLog, seconds: int) -> EventLog:
    if len(log) == 0:
        return log
    cutoff = int(log.timestamps.min()) + seconds
    return log.select(log.timestamps >= cutoff)


@dataclass
class PreprocessResult:
    splits: list[SliceSplit]
    boundaries: list[tuple[float, float]]
    slice_stats: list[dict[str, float]]

    def averaged_stats(self) -> dict[str, float]:
        keys = self.slice_stats[0].keys() if self.slice_stats else []
        n = len(self.slice_stats)
        return {k: sum(s[k] for s in self.slice_stats) / n for k in keys}

    def most_events_slice(self) -> int:
        """Index of the slice with the most events after filtering (ties: lowest index)."""
        events = [s["events"] for s in self.slice_stats]
        return int(np.argmax(events))


def run_preprocessing(log: EventLog, cfg: PreprocessConfig, seed: int = 0) -> PreprocessResult:
    """Full pipeline: optional user sample and head skip, sessionize, slice,
    filter each slice, split each slice user-wise."""
    if cfg.user_sample is not None and cfg.user_sample < 1:
        log = sample_users(log, cfg.user_sample, seed)
    if cfg.skip_head:
        log = skip_log_head(log, cfg.skip_head)
    sessions = sessionize(log, cfg.inactivity_gap)
    sliced = slice_by_time(sessions, cfg.num_slices)

    splits, stats = [], []
    for idx, part in enumerate(sliced.slices):
        filtered = filter_slice(part, cfg)
        stats.append(filtered.stats())
        if len(filtered) == 0:
            logger.warning("slice %d is empty after filtering", idx)
        split = split_user_wise(filtered, slice_index=idx)
        splits.append(split)
        logger.info("slice %d: %s", idx, split.counts())
    return PreprocessResult(splits, sliced.boundaries, stats)

