"""Sequential rules: weighted, ordered item co-occurrence within a step window."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType

from sessionaware.algorithms.base import PredictionContext, ScoredList
from sessionaware.algorithms.decay import SCHEMES, distance_weight
from sessionaware.errors import ConfigError, DataError
from sessionaware.preprocess import SessionLog


@dataclass(frozen=True)
class SRConfig:
    steps: int = 10
    weighting: str = "div"

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.weighting not in SCHEMES:
            raise ConfigError(f"unknown weighting {self.weighting!r}")


class SequentialRules:
    method = "sr"

    def __init__(self, config: SRConfig, rules):
        self.config = config
        # antecedent -> {consequent: weight}; read-only views
        self.rules = MappingProxyType({a: MappingProxyType(dict(c)) for a, c in rules.items()})

    @classmethod
    def fit(cls, train: SessionLog, config: SRConfig) -> "SequentialRules":
        if len(train) == 0:
            raise DataError("cannot fit on an empty training set")
        weights = [distance_weight(config.weighting, d) for d in range(config.steps + 1)[1:]]
        rules: dict[int, dict[int, float]] = defaultdict(lambda: defaultdict(float))
        for session in train:
            items = session.items
            n = len(items)
            for i in range(n):
                a = items[i]
                for d in range(1, min(config.steps, n - 1 - i) + 1):
                    w = weights[d - 1]
                    if w > 0:
                        rules[a][items[i + d]] += w
        return cls(config, rules)

    def predict(self, ctx: PredictionContext) -> ScoredList:
        last = ctx.current_session.items[-1]
        return ScoredList.from_scores(self.rules.get(last, {}))

    def session_similarity(self, current, past):
        return None

    def state(self) -> dict:
        return {
            "rules": {a: dict(sorted(c.items())) for a, c in sorted(self.rules.items())},
        }

    @classmethod
    def from_state(cls, config: SRConfig, state: dict) -> "SequentialRules":
        rules = {int(a): {int(b): float(w) for b, w in c.items()} for a, c in state["rules"].items()}
        return cls(config, rules)
