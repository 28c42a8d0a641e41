"""Random small instances for property and oracle tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sessionaware.algorithms.base import PredictionContext
from sessionaware.preprocess import Session, SessionLog


@dataclass
class Instance:
    train: SessionLog
    ctx: PredictionContext
    seed: int


def random_sessions(rng: np.random.Generator, max_sessions: int = 50, max_items: int = 20, max_len: int = 8):
    n_items = int(rng.integers(2, max_items + 1))
    n_sessions = int(rng.integers(1, max_sessions + 1))
    n_users = int(rng.integers(1, 8))
    sessions = []
    for sid in range(n_sessions):
        length = int(rng.integers(1, max_len + 1))
        items = tuple(int(x) for x in rng.integers(0, n_items, size=length))
        # coarse start times so that equal start times (ties) occur regularly
        start = int(rng.integers(0, 20)) * 3600
        stamps = tuple(start + 60 * j for j in range(length))
        sessions.append(Session(sid + 1, int(rng.integers(n_users)), items, stamps))
    return sessions, n_items, n_users


def random_instance(seed: int, max_sessions: int = 50, max_items: int = 20) -> Instance:
    rng = np.random.default_rng(seed)
    sessions, n_items, n_users = random_sessions(rng, max_sessions, max_items)
    train = SessionLog(sessions)
    length = int(rng.integers(1, 7))
    items = tuple(int(x) for x in rng.integers(0, n_items + 2, size=length))
    now = int(rng.integers(20, 40)) * 3600
    current = Session(10_000, int(rng.integers(n_users)), items, tuple(now + 30 * j for j in range(length)))
    history = train.history(current.user_id)
    return Instance(train, PredictionContext(current, history, now), seed)
