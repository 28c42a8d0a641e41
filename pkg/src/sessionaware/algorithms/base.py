"""Prediction contract shared by all recommenders and wrappers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

from sessionaware.preprocess import Session


TIE_DIGITS = 12


def tie_key(score: float) -> float:
    """Score rounded to ``TIE_DIGITS`` significant digits.

    Rankings sort on this key so that scores which are equal up to float
    summation noise count as ties and fall back to the item-id order.
    """
    return float(f"{score:.{TIE_DIGITS}g}")


@dataclass(frozen=True)
class ScoredList:
    """Ranked (item, score) pairs: score descending, ties by item id ascending.

    Scores agreeing to ``TIE_DIGITS`` significant digits are ties.
    """

    items: tuple[int, ...] = ()
    scores: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.items) != len(self.scores):
            raise ValueError("items and scores must have equal length")

    @classmethod
    def from_scores(cls, scores: Mapping[int, float], keep_zero: bool = False) -> "ScoredList":
        """Builds the canonical ranking. Non-positive scores are dropped unless
        ``keep_zero`` is set; non-finite scores are rejected."""
        pairs = []
        for item, score in scores.items():
            if not math.isfinite(score):
                raise ValueError(f"non-finite score {score} for item {item}")
            if score > 0 or keep_zero:
                pairs.append((item, float(score)))
        pairs.sort(key=lambda p: (-tie_key(p[1]), p[0]))
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(zip(self.items, self.scores))

    def top(self, k: int) -> tuple[int, ...]:
        return self.items[:k]

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.items, self.scores))

    def rank_of(self, item: int) -> Optional[int]:
        """1-based rank of ``item`` or None when absent."""
        try:
            return self.items.index(item) + 1
        except ValueError:
            return None


@dataclass(frozen=True)
class PredictionContext:
    """What a recommender sees at one prediction step.

    ``current_session`` is the revealed prefix, ``user_history`` the user's
    earlier training sessions (oldest first) and ``now`` the start time of the
    ongoing session.
    """

    current_session: Session
    user_history: tuple[Session, ...] = ()
    now: Optional[int] = None

    def __post_init__(self) -> None:
        if self.now is None:
            object.__setattr__(self, "now", self.current_session.start_time)

    def last_sessions(self, p: int) -> tuple[Session, ...]:
        return self.user_history[-p:] if p > 0 else ()
