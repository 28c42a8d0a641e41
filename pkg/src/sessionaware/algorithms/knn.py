"""Session-based nearest-neighbor recommenders (VSKNN, STAN, VSTAN).

All three share one fitted ``SessionIndex``: the training sessions ranked by
recency, an inverted item -> sessions index and an IDF table. A prediction

1. collects the candidate pool (sessions sharing an item with the current
   session, capped to the ``sample_size`` most recent),
2. weights each pool session (similarity, optionally times a recency factor),
3. keeps the ``k`` best and lets them vote for their items.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from sessionaware.algorithms.base import PredictionContext, ScoredList
from sessionaware.algorithms.decay import SCHEMES, position_weight
from sessionaware.errors import ConfigError, DataError
from sessionaware.preprocess import DAY, Session, SessionLog


def _idf_strength(value) -> int:
    if value is None or value is False:
        return 0
    if value is True:
        return 1
    if int(value) < 0:
        raise ConfigError("IDF strength must be >= 0")
    return int(value)


def _check_common(k: int, sample_size: Optional[int]) -> None:
    if k < 1:
        raise ConfigError("k must be >= 1")
    if sample_size is not None and sample_size < 1:
        raise ConfigError("sample_size must be >= 1")


@dataclass(frozen=True)
class VsknnConfig:
    k: int = 100
    sample_size: Optional[int] = 500
    weighting: str = "div"
    weighting_score: str = "div"
    idf_weighting: Union[int, bool, None] = 0

    def __post_init__(self) -> None:
        _check_common(self.k, self.sample_size)
        for scheme in (self.weighting, self.weighting_score):
            if scheme not in SCHEMES:
                raise ConfigError(f"unknown decay scheme {scheme!r}")
        object.__setattr__(self, "idf_weighting", _idf_strength(self.idf_weighting))


@dataclass(frozen=True)
class StanConfig:
    k: int = 100
    sample_size: Optional[int] = 1000
    lambda_spw: float = 0.905
    lambda_snh: float = 100.0
    lambda_inh: float = 0.905

    def __post_init__(self) -> None:
        _check_common(self.k, self.sample_size)
        for name in ("lambda_spw", "lambda_snh", "lambda_inh"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")


@dataclass(frozen=True)
class VstanConfig(StanConfig):
    similarity: str = "cosine"
    lambda_ipw: float = 0.905
    lambda_idf: Union[int, bool, None] = 0

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.similarity not in ("cosine", "vec"):
            raise ConfigError(f"similarity must be 'cosine' or 'vec', got {self.similarity!r}")
        if not self.lambda_ipw > 0:
            raise ConfigError("lambda_ipw must be > 0")
        object.__setattr__(self, "lambda_idf", _idf_strength(self.lambda_idf))


class SessionIndex:
    """Immutable neighbor-search structures over a training ``SessionLog``.

    Sessions are identified by their recency rank: rank r is the r-th session
    in (start_time, session_id) order, so "most recent" means "largest rank".
    """

    def __init__(self, train: SessionLog):
        if len(train) == 0:
            raise DataError("cannot fit on an empty training set")
        self.sessions: tuple[Session, ...] = train.sessions
        self.item_sets = tuple(frozenset(s.items) for s in self.sessions)
        self.start_times = np.array([s.start_time for s in self.sessions], dtype=np.int64)
        self.session_ids = np.array([s.session_id for s in self.sessions], dtype=np.int64)
        self.start_times.setflags(write=False)
        self.session_ids.setflags(write=False)

        postings: dict[int, list[int]] = defaultdict(list)
        for rank, items in enumerate(self.item_sets):
            for item in items:
                postings[item].append(rank)
        self.inverted: dict[int, np.ndarray] = {}
        for item, ranks in postings.items():
            arr = np.array(ranks, dtype=np.int64)
            arr.setflags(write=False)
            self.inverted[item] = arr

        n = len(self.sessions)
        self.idf = {item: math.log(n / len(r)) for item, r in self.inverted.items()}
        self.idf_min = min(self.idf.values())
        self.idf_max = max(self.idf.values())

    def pool(self, items, sample_size: Optional[int]) -> np.ndarray:
        """Ranks of sessions sharing an item with ``items``, ascending; only the
        ``sample_size`` most recent are kept."""
        arrays = [self.inverted[i] for i in set(items) if i in self.inverted]
        if not arrays:
            return np.empty(0, dtype=np.int64)
        ranks = np.unique(np.concatenate(arrays)) if len(arrays) > 1 else arrays[0]
        if sample_size is not None and len(ranks) > sample_size:
            ranks = ranks[-sample_size:]
        return ranks


def _last_positions(items) -> dict[int, int]:
    """item -> 1-based last position, ordered by that position."""
    last: dict[int, int] = {}
    for pos, item in enumerate(items, start=1):
        last.pop(item, None)
        last[item] = pos
    return last


class _KnnBase:
    method = ""

    def __init__(self, config, index: SessionIndex):
        self.config = config
        self.index = index

    @classmethod
    def fit(cls, train: SessionLog, config):
        return cls(config, SessionIndex(train))

    # -- hooks -----------------------------------------------------------
    def _item_weights(self, items) -> dict[int, float]:
        raise NotImplementedError

    def _similarity(self, weights: dict[int, float], norm: float, other: frozenset) -> float:
        dot = 0.0
        for item, w in weights.items():
            if item in other:
                dot += w
        if dot == 0.0:
            return 0.0
        return dot / (norm * math.sqrt(len(other)))

    def _neighbor_weight(self, sim: float, rank: int, now: int) -> float:
        return sim

    def _vote(self, scores, weight: float, rank: int, current_last: dict[int, int], length: int) -> None:
        raise NotImplementedError

    # -- public ----------------------------------------------------------
    def neighbor_pool(self, ctx: PredictionContext, sample_size: Optional[int] = None) -> tuple[int, ...]:
        """Session ids of the candidate pool, most recent first."""
        if sample_size is None:
            sample_size = self.config.sample_size
        ranks = self.index.pool(ctx.current_session.items, sample_size)
        return tuple(self.index.session_ids[ranks[::-1]].tolist())

    def neighbors(self, ctx: PredictionContext) -> list[tuple[int, float]]:
        """Top-k (rank, weight) pairs in ascending rank order."""
        items = ctx.current_session.items
        weights = self._item_weights(items)
        norm = math.sqrt(sum(w * w for w in weights.values()))
        if norm == 0.0:
            return []
        idx = self.index
        candidates = []
        for rank in idx.pool(items, self.config.sample_size).tolist():
            sim = self._similarity(weights, norm, idx.item_sets[rank])
            if sim > 0.0:
                w = self._neighbor_weight(sim, rank, ctx.now)
                if w > 0.0:
                    candidates.append((w, rank))
        # strongest first; equal weights prefer the more recent session
        candidates.sort(key=lambda c: (-c[0], -c[1]))
        top = candidates[: self.config.k]
        return sorted(((r, w) for w, r in top))

    def predict(self, ctx: PredictionContext) -> ScoredList:
        items = ctx.current_session.items
        current_last = _last_positions(items)
        scores: dict[int, float] = defaultdict(float)
        for rank, weight in self.neighbors(ctx):
            self._vote(scores, weight, rank, current_last, len(items))
        return ScoredList.from_scores(scores)

    def session_similarity(self, current: Session, past: Session) -> float:
        """The model's session similarity, without any recency factor."""
        weights = self._item_weights(current.items)
        norm = math.sqrt(sum(w * w for w in weights.values()))
        if norm == 0.0:
            return 0.0
        return self._similarity(weights, norm, frozenset(past.items))

    def state(self) -> dict:
        return {
            "sessions": [
                [s.session_id, s.user_id, list(s.items), list(s.timestamps)] for s in self.index.sessions
            ]
        }

    @classmethod
    def from_state(cls, config, state: dict):
        sessions = [Session(int(a), int(b), tuple(c), tuple(d)) for a, b, c, d in state["sessions"]]
        return cls(config, SessionIndex(SessionLog(sessions)))


class VSKNN(_KnnBase):
    """Vector-multiplication session kNN with position decay and optional IDF."""

    method = "vsknn"

    def _item_weights(self, items) -> dict[int, float]:
        length = len(items)
        scheme = self.config.weighting
        return {i: position_weight(scheme, p, length) for i, p in _last_positions(items).items()}

    def _vote(self, scores, weight, rank, current_last, length) -> None:
        other = self.index.item_sets[rank]
        ref = max(p for i, p in current_last.items() if i in other)
        w = weight * position_weight(self.config.weighting_score, ref, length)
        strength = self.config.idf_weighting
        idf = self.index.idf
        for item in other:
            if strength:
                scores[item] += w * (1.0 + strength * idf[item])
            else:
                scores[item] += w


def _nearest_occurrence(positions: list[int], ref: int) -> int:
    # closest to ref; on equal distance the later occurrence wins
    return min(positions, key=lambda p: (abs(p - ref), -p))


class STAN(_KnnBase):
    """Sequence- and time-aware neighborhood."""

    method = "stan"

    def _item_weights(self, items) -> dict[int, float]:
        length = len(items)
        lam = self.config.lambda_spw
        return {i: math.exp((p - length) / lam) for i, p in _last_positions(items).items()}

    def _neighbor_weight(self, sim, rank, now) -> float:
        days = abs(now - int(self.index.start_times[rank])) / DAY
        return sim * math.exp(-days / self.config.lambda_snh)

    def _positions(self, rank: int, current_last: dict[int, int]):
        """(reference position, item -> occurrence positions) for a neighbor."""
        seq = self.index.sessions[rank].items
        ref = 0
        occ: dict[int, list[int]] = defaultdict(list)
        for pos, item in enumerate(seq, start=1):
            occ[item].append(pos)
            if item in current_last:
                ref = pos
        return ref, occ

    def _vote(self, scores, weight, rank, current_last, length) -> None:
        ref, occ = self._positions(rank, current_last)
        lam = self.config.lambda_inh
        for item, positions in occ.items():
            pos = _nearest_occurrence(positions, ref)
            scores[item] += weight * math.exp(-abs(pos - ref) / lam)


class VSTAN(STAN):
    """STAN with selectable similarity, candidate-position decay and an IDF bonus."""

    method = "vstan"

    def _similarity(self, weights, norm, other) -> float:
        if self.config.similarity == "cosine":
            return super()._similarity(weights, norm, other)
        dot = 0.0
        for item, w in weights.items():
            if item in other:
                dot += w
        return dot

    def _idf_bonus(self, item: int) -> float:
        strength = self.config.lambda_idf
        idx = self.index
        if not strength or idx.idf_max == idx.idf_min:
            return 1.0
        return 1.0 + strength * (idx.idf[item] - idx.idf_min) / (idx.idf_max - idx.idf_min)

    def _vote(self, scores, weight, rank, current_last, length) -> None:
        ref, occ = self._positions(rank, current_last)
        n_len = len(self.index.sessions[rank])
        lam_inh, lam_ipw = self.config.lambda_inh, self.config.lambda_ipw
        for item, positions in occ.items():
            pos = _nearest_occurrence(positions, ref)
            factor = math.exp(-abs(pos - ref) / lam_inh) * math.exp((pos - n_len) / lam_ipw)
            scores[item] += weight * factor * self._idf_bonus(item)
