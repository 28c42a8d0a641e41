"""Seeded synthetic event logs with session, topic and repeat structure.

Used by the test-suite and for scale checks; the generated logs carry enough
sequential signal for the recommenders to beat chance.
"""

from __future__ import annotations

import numpy as np

from sessionaware.eventlog import EventLog


def synthetic_log(
    n_users: int = 50,
    sessions_per_user: float = 8.0,
    mean_session_length: float = 6.0,
    n_items: int = 300,
    n_topics: int = 10,
    repeat_prob: float = 0.2,
    seed: int = 0,
    start: int = 1_500_000_000,
    days: float = 100.0,
) -> EventLog:
    """Generates an ``EventLog``.

    Each user favours two topics; items are spread over topics and a session
    walks along neighbouring items of one topic. With ``repeat_prob`` an event
    re-visits an item from the user's previous session. Sessions are spaced by
    hours to days and events within a session by 10 s to 10 min.
    """
    rng = np.random.default_rng(seed)
    topic_of = rng.integers(n_topics, size=n_items)
    by_topic = [np.flatnonzero(topic_of == t) for t in range(n_topics)]
    by_topic = [t if len(t) else np.arange(n_items) for t in by_topic]
    horizon = int(days * 86400)

    users, items, stamps = [], [], []
    for user in range(n_users):
        fav = rng.choice(n_topics, size=min(2, n_topics), replace=False)
        n_sess = max(1, int(rng.poisson(sessions_per_user)))
        # session starts spread over the horizon, at least an hour apart
        offsets = np.sort(rng.choice(max(horizon // 3600, n_sess), size=n_sess, replace=False)) * 3600
        offsets += rng.integers(0, 1800, size=n_sess)
        previous: list[int] = []
        for off in offsets.tolist():
            length = max(1, int(rng.poisson(mean_session_length - 1)) + 1)
            topic = by_topic[int(fav[rng.integers(len(fav))]) if rng.random() < 0.8 else int(rng.integers(n_topics))]
            pos = int(rng.integers(len(topic)))
            t = start + off
            current: list[int] = []
            for _ in range(length):
                if previous and rng.random() < repeat_prob:
                    item = previous[int(rng.integers(len(previous)))]
                else:
                    pos = (pos + int(rng.integers(-1, 3))) % len(topic)
                    item = int(topic[pos])
                users.append(user)
                items.append(item)
                stamps.append(t)
                current.append(item)
                t += int(rng.integers(10, 600))
            previous = current
    return EventLog.from_arrays(users, items, stamps, source_meta=f"synthetic(seed={seed})")
