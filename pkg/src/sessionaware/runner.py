"""Glue between algorithm names, fitted models, tuning objectives and reports."""

from __future__ import annotations

import time
from typing import Mapping, Optional

from sessionaware.algorithms import fit, make_config
from sessionaware.evaluate import MetricConfig, MetricReport, run_protocol
from sessionaware.extensions import SessionAwareRecommender, parse_algorithm_name, split_params
from sessionaware.hyperopt import config_key
from sessionaware.preprocess import SessionLog, SliceSplit

TUNING_CUTOFF = 20
REMIND_KEYS = ("remind_sessions_num", "weight_base")


def build_recommender(algorithm: str, params: Mapping, train: SessionLog) -> SessionAwareRecommender:
    base, flags = parse_algorithm_name(algorithm)
    base_params, ext = split_params(flags, params)
    return SessionAwareRecommender(fit(train, make_config(base, base_params)), ext)


def evaluate_algorithm(
    algorithm: str,
    params: Mapping,
    split: SliceSplit,
    eval_set: str = "test",
    cfg: Optional[MetricConfig] = None,
    threads: int = 1,
) -> MetricReport:
    """Fits on ``split.train`` and runs the reveal protocol, timing both phases."""
    start = time.perf_counter()
    rec = build_recommender(algorithm, params, split.train)
    train_time = time.perf_counter() - start
    return run_protocol(rec, split, eval_set, cfg, threads=threads, training_time_s=train_time, name=algorithm)


def make_objective(algorithm: str, split: SliceSplit, threads: int = 1):
    """MRR@20 on the validation sessions as a function of a hyperparameter dict.

    Reminder settings are only applied once present in the config, so the same
    objective serves the joint and the post-hoc phase. The last fitted base
    model is reused while only extension settings change.
    """
    base, flags = parse_algorithm_name(algorithm)
    metric_cfg = MetricConfig((TUNING_CUTOFF,))
    fitted: dict[str, object] = {}

    def objective(config: Mapping) -> float:
        active = flags if all(k in config for k in REMIND_KEYS) else flags.replace("r", "")
        base_params, ext = split_params(active, config)
        key = config_key(base_params)
        if key not in fitted:
            fitted.clear()
            fitted[key] = fit(split.train, make_config(base, base_params))
        rec = SessionAwareRecommender(fitted[key], ext)
        report = run_protocol(rec, split, "validation", metric_cfg, threads=threads)
        return report.metrics[TUNING_CUTOFF]["MRR"]

    return objective
