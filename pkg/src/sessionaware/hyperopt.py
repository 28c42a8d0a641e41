"""Seeded random hyperparameter search with an optional post-hoc phase."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional

import numpy as np

from sessionaware import presets
from sessionaware.errors import ConfigError
from sessionaware.extensions import parse_algorithm_name

logger = logging.getLogger(__name__)

JOINT = "joint"
POSTHOC = "posthoc"


@dataclass(frozen=True)
class SearchSpace:
    """Finite value sets per hyperparameter, each tagged with a tuning phase."""

    values: Mapping[str, tuple]
    phases: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, vals in self.values.items():
            if len(vals) == 0:
                raise ConfigError(f"empty value set for {name!r}")
            if self.phases.get(name, JOINT) not in (JOINT, POSTHOC):
                raise ConfigError(f"unknown phase for {name!r}")

    def phase(self, name: str) -> str:
        return self.phases.get(name, JOINT)

    def names(self, phase: Optional[str] = None) -> list[str]:
        return [n for n in self.values if phase is None or self.phase(n) == phase]

    @property
    def has_posthoc(self) -> bool:
        return bool(self.names(POSTHOC))

    def to_dict(self) -> dict:
        return {n: {"values": list(v), "phase": self.phase(n)} for n, v in self.values.items()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SearchSpace":
        values, phases = {}, {}
        for name, spec in data.items():
            if isinstance(spec, Mapping):
                values[name] = tuple(spec["values"])
                phases[name] = spec.get("phase", JOINT)
            else:
                values[name] = tuple(spec)
        return cls(values, phases)


def space_for(algorithm: str, without_ssim: Optional[bool] = None) -> SearchSpace:
    """Default search space for an algorithm name such as ``stan_ebr``.

    Extend and boost settings are tuned jointly with the base method; reminder
    settings are tuned afterwards on the frozen winner. Sequential rules get no
    session-similarity weight.
    """
    base, flags = parse_algorithm_name(algorithm)
    if base not in presets.BASE_SPACES:
        raise ConfigError(f"unknown algorithm {base!r}")
    values: dict[str, tuple] = dict(presets.BASE_SPACES[base])
    phases = dict.fromkeys(values, JOINT)
    if "e" in flags:
        values.update(presets.EXTEND_SPACE)
        phases.update(dict.fromkeys(presets.EXTEND_SPACE, JOINT))
    if "b" in flags:
        values.update(presets.BOOST_SPACE)
        phases.update(dict.fromkeys(presets.BOOST_SPACE, JOINT))
    if "r" in flags:
        remind = dict(presets.REMIND_SPACE)
        if without_ssim if without_ssim is not None else base == "sr":
            remind.pop("weight_SSim")
        values.update(remind)
        phases.update(dict.fromkeys(remind, POSTHOC))
    return SearchSpace(values, phases)


def _plain(value):
    """numpy scalars -> builtin types so configs serialize and compare cleanly."""
    return value.item() if isinstance(value, np.generic) else value


def sample_config(space: SearchSpace, seed: int, phase: Optional[str] = None) -> dict:
    """Draws each hyperparameter independently and uniformly from its value set."""
    rng = np.random.default_rng(seed)
    config = {}
    for name in space.names(phase):
        vals = space.values[name]
        config[name] = _plain(vals[int(rng.integers(len(vals)))])
    return config


def trial_seed(seed: int, phase_no: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, phase_no, index]).generate_state(1)[0])


def config_key(config: Mapping) -> str:
    return json.dumps(config, sort_keys=True, default=str)


@dataclass
class Trial:
    index: int
    phase: str
    config: dict
    score: float
    seed: int
    cached: bool = False

    def to_dict(self) -> dict:
        score = self.score if math.isfinite(self.score) else None
        return {
            "index": self.index,
            "phase": self.phase,
            "config": self.config,
            "score": score,
            "seed": self.seed,
            "cached": self.cached,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Trial":
        score = data["score"]
        return cls(
            index=data["index"],
            phase=data["phase"],
            config=dict(data["config"]),
            score=-math.inf if score is None else float(score),
            seed=data["seed"],
            cached=data.get("cached", False),
        )


@dataclass
class SearchResult:
    best_config: dict
    best_score: float
    trials: list[Trial]
    metric: str = "MRR@20"

    def to_json(self) -> str:
        payload = {
            "metric": self.metric,
            "best_config": self.best_config,
            "best_score": self.best_score if math.isfinite(self.best_score) else None,
            "trials": [t.to_dict() for t in self.trials],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "SearchResult":
        data = json.loads(Path(path).read_text())
        best = data["best_score"]
        return cls(
            best_config=data["best_config"],
            best_score=-math.inf if best is None else best,
            trials=[Trial.from_dict(t) for t in data["trials"]],
            metric=data.get("metric", "MRR@20"),
        )


def _evaluate(objective, config, cache) -> tuple[float, bool]:
    key = config_key(config)
    if key in cache:
        return cache[key], True
    try:
        score = float(objective(config))
    except Exception:  # noqa: BLE001 - a failing config must not abort the search
        logger.exception("objective failed for %s", key)
        score = -math.inf
    cache[key] = score
    return score, False


def _best(trials: list[Trial]) -> Trial:
    # strict > keeps the earliest trial on ties
    best = trials[0]
    for t in trials[1:]:
        if t.score > best.score:
            best = t
    return best


IDENTITY_REMINDER = {"remind_sessions_num": 1, "weight_base": 1, "weight_IRec": 0, "weight_SSim": 0}


def random_search(
    space: SearchSpace,
    trials: int,
    objective: Callable[[dict], float],
    seed: int = 0,
    posthoc_trials: Optional[int] = None,
    cache: Optional[dict] = None,
) -> SearchResult:
    """Random search maximizing ``objective``.

    The joint phase samples all joint-phase hyperparameters ``trials`` times.
    If the space has post-hoc (reminder) parameters, joint configs carry the
    neutral reminder setting; the joint winner is then frozen and
    ``posthoc_trials`` further configs vary only the post-hoc parameters,
    starting with the neutral setting itself. The winner is the argmax over
    the whole log, ties going to the earlier trial. Repeated configs are
    scored once via ``cache``, which may be pre-filled to resume a search.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    cache = {} if cache is None else cache
    log: list[Trial] = []
    neutral = {k: v for k, v in IDENTITY_REMINDER.items() if k in space.values and space.phase(k) == POSTHOC}

    for i in range(trials):
        s = trial_seed(seed, 0, i)
        config = {**sample_config(space, s, JOINT), **neutral}
        score, cached = _evaluate(objective, config, cache)
        log.append(Trial(len(log), JOINT, config, score, s, cached))

    if space.has_posthoc:
        frozen = dict(_best(log).config)
        n_post = trials if posthoc_trials is None else posthoc_trials
        for i in range(max(1, n_post)):
            s = trial_seed(seed, 1, i)
            extra = neutral if i == 0 else sample_config(space, s, POSTHOC)
            config = {**frozen, **extra}
            score, cached = _evaluate(objective, config, cache)
            log.append(Trial(len(log), POSTHOC, config, score, s, cached))

    best = _best(log)
    return SearchResult(dict(best.config), best.score, log)
