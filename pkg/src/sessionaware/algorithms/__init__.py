"""Recommender registry, fitting and model (de)serialization."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from sessionaware.algorithms.base import PredictionContext, ScoredList
from sessionaware.algorithms.knn import STAN, VSKNN, VSTAN, SessionIndex, StanConfig, VsknnConfig, VstanConfig
from sessionaware.algorithms.sr import SequentialRules, SRConfig
from sessionaware.errors import ConfigError

MODEL_FORMAT_VERSION = "1.0"

REGISTRY = {
    "sr": (SequentialRules, SRConfig),
    "vsknn": (VSKNN, VsknnConfig),
    "stan": (STAN, StanConfig),
    "vstan": (VSTAN, VstanConfig),
}

_CONFIG_TO_METHOD = {cfg: name for name, (_, cfg) in REGISTRY.items()}

__all__ = [
    "PredictionContext",
    "ScoredList",
    "SessionIndex",
    "SRConfig",
    "VsknnConfig",
    "StanConfig",
    "VstanConfig",
    "SequentialRules",
    "VSKNN",
    "STAN",
    "VSTAN",
    "REGISTRY",
    "fit",
    "make_config",
    "save_model",
    "load_model",
]


def make_config(method: str, params: dict):
    """Builds the config dataclass for ``method`` from a plain mapping.

    Unknown keys are rejected so that typos in config files surface early.
    """
    if method not in REGISTRY:
        raise ConfigError(f"unknown algorithm {method!r}; known: {sorted(REGISTRY)}")
    cfg_cls = REGISTRY[method][1]
    names = {f.name for f in dataclasses.fields(cfg_cls)}
    unknown = set(params) - names
    if unknown:
        raise ConfigError(f"unknown hyperparameters for {method}: {sorted(unknown)}")
    return cfg_cls(**params)


def fit(train, config):
    """Fits the recommender matching the type of ``config``."""
    method = _CONFIG_TO_METHOD.get(type(config))
    if method is None:
        raise ConfigError(f"unsupported config type {type(config).__name__}")
    return REGISTRY[method][0].fit(train, config)


def save_model(model, path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "method": model.method,
        "config": dataclasses.asdict(model.config),
        "state": model.state(),
    }
    Path(path).write_text(json.dumps(payload, separators=(",", ":")))


def load_model(path):
    payload = json.loads(Path(path).read_text())
    major = str(payload.get("format_version", "")).split(".")[0]
    if major != MODEL_FORMAT_VERSION.split(".")[0]:
        raise ConfigError(f"unsupported model format {payload.get('format_version')!r}")
    model_cls, _ = REGISTRY[payload["method"]]
    config = make_config(payload["method"], payload["config"])
    return model_cls.from_state(config, payload["state"])
