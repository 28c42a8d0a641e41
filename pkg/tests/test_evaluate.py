import json
import random
from fractions import Fraction

import pytest

import oracles
from sessionaware.algorithms import fit, make_config
from sessionaware.algorithms.base import ScoredList
from sessionaware.errors import ConfigError, DataError
from sessionaware.evaluate import (
    MetricAccumulator,
    MetricConfig,
    MetricReport,
    coverage_at_k,
    hr_at_k,
    mrr_at_k,
    popularity_at_k,
    precision_recall_map_at_k,
    prediction_events,
    run_protocol,
)
from sessionaware.extensions import SessionAwareRecommender
from sessionaware.preprocess import Session, SessionLog, SliceSplit

A, B, C, X = 1, 2, 3, 9


def test_hr_mrr_examples():
    ranked = [5, 6, A] + list(range(100, 130))
    assert hr_at_k(ranked, A, 20) == 1.0 and mrr_at_k(ranked, A, 20) == pytest.approx(1 / 3)
    late = list(range(100, 120)) + [A]
    assert hr_at_k(late, A, 20) == 0.0 and mrr_at_k(late, A, 20) == 0.0
    assert mrr_at_k([A], A, 20) == 1.0


def test_average_precision_example():
    p, r, ap = precision_recall_map_at_k([B, X, C], {B, C}, 3)
    assert p == pytest.approx(2 / 3) and r == 1.0 and ap == pytest.approx(5 / 6)
    assert precision_recall_map_at_k([X], {B}, 3) == (0.0, 0.0, 0.0)
    assert precision_recall_map_at_k([A, B], {A, B}, 2) == (1.0, 1.0, 1.0)


def test_coverage_examples():
    lists = [[1, 2], [3, 4], [1, 4]]
    assert coverage_at_k(lists, range(10), 2) == 0.4
    assert coverage_at_k([[0, 1, 2], [3, 4]], range(5), 3) == 1.0
    assert coverage_at_k([[1, 2, 3, 4, 5]], range(20), 5) == 0.25


def test_popularity_examples():
    counts = {A: 10, B: 6, C: 2}
    assert popularity_at_k([[A, B]], counts, 2) == 0.75
    assert popularity_at_k([[A], [A]], counts, 1) == 1.0
    assert popularity_at_k([[A, B]], {A: 3, B: 3}, 2) == 0.0


def test_metric_config_validation():
    assert MetricConfig((20, 5, 5)).cutoffs == (5, 20)
    with pytest.raises(ConfigError):
        MetricConfig((0,))


def random_metric_case(seed):
    rng = random.Random(seed)
    catalog = list(range(1, rng.randint(3, 25)))
    counts = {i: rng.randint(1, 6) for i in catalog}
    events = []
    for _ in range(rng.randint(1, 12)):
        ranked = rng.sample(catalog, rng.randint(0, len(catalog)))
        remaining = [rng.choice(catalog) for _ in range(rng.randint(1, 5))]
        events.append((ranked, remaining[0], remaining))
    return catalog, counts, events


@pytest.mark.parametrize("seed", range(100))
def test_metrics_match_oracle(seed):
    catalog, counts, events = random_metric_case(seed)
    for k in (1, 3, 5, 20):
        acc = MetricAccumulator((k,), catalog, counts)
        for ranked, nxt, remaining in events:
            acc.add(ranked, nxt, remaining)
        got = acc.results()[k]
        expected = oracles.naive_metrics(events, k, catalog, counts)
        for name, value in expected.items():
            assert got[name] == pytest.approx(value, abs=1e-12), name


def test_accumulator_is_order_independent():
    catalog, counts, events = random_metric_case(17)
    first = MetricAccumulator((3, 10), catalog, counts)
    for e in events:
        first.add(*e)
    second = MetricAccumulator((3, 10), catalog, counts)
    for e in reversed(events):
        second.add(*e)
    assert first.results() == second.results()


def test_mean_is_exactly_rounded():
    acc = MetricAccumulator((1,), [A, B], {A: 1, B: 2})
    for _ in range(3):
        acc.add([A], B, [B])
    acc.add([B], B, [B])
    assert Fraction(acc.results()[1]["HR"]) == Fraction(1, 4)


# -- protocol ------------------------------------------------------------------


def test_prediction_events_example():
    s = Session(1, 0, (A, B, C), (0, 1, 2))
    assert [(t, n, r) for t, n, r in prediction_events(s)] == [(1, B, (B, C)), (2, C, (C,))]


class _Perfect:
    """Recommends exactly the true next item of the single test session."""

    name = "perfect"

    def __init__(self, session):
        self.session = session

    def predict(self, ctx):
        t = len(ctx.current_session)
        return ScoredList.from_scores({self.session.items[t]: 1.0})


def _tiny_split(test_sessions):
    train = SessionLog([Session(1, 0, (A, B, C), (0, 1, 2))])
    return SliceSplit(0, train, SessionLog([]), SessionLog(test_sessions), frozenset({A, B, C}))


def test_perfect_recommender_hits_everything():
    test = Session(5, 0, (A, B, C), (100, 101, 102))
    report = run_protocol(_Perfect(test), _tiny_split([test]), cfg=MetricConfig((20,)))
    assert report.metrics[20]["HR"] == 1.0
    assert report.prediction_events == 2
    assert report.training_time_s == 0.0 and report.mean_prediction_time_ms >= 0.0


def test_protocol_rejects_empty_or_short_sessions():
    with pytest.raises(DataError):
        run_protocol(_Perfect(None), _tiny_split([]))
    with pytest.raises(DataError):
        run_protocol(_Perfect(None), _tiny_split([Session(5, 0, (A,), (1,))]))


def test_protocol_count_and_thread_invariance(small_split):
    model = fit(small_split.train, make_config("vsknn", {"k": 20}))
    rec = SessionAwareRecommender(model)
    one = run_protocol(rec, small_split)
    assert one.prediction_events == sum(len(s) - 1 for s in small_split.test)
    four = run_protocol(rec, small_split, threads=4)
    assert four.metrics == one.metrics


def test_protocol_shuffle_invariance(small_split):
    model = fit(small_split.train, make_config("sr", {}))
    rec = SessionAwareRecommender(model)
    base = run_protocol(rec, small_split).metrics
    sessions = list(small_split.test)
    random.Random(0).shuffle(sessions)

    class Shuffled(SessionLog):
        def __init__(self, ordered):
            super().__init__(ordered)
            self.sessions = tuple(ordered)

    shuffled = SliceSplit(0, small_split.train, small_split.validation, Shuffled(sessions), small_split.item_vocabulary)
    assert run_protocol(rec, shuffled).metrics == base


def test_report_roundtrip_and_csv(small_split):
    rec = SessionAwareRecommender(fit(small_split.train, make_config("sr", {})))
    report = run_protocol(rec, small_split, cfg=MetricConfig((5, 20)))
    again = MetricReport.from_dict(json.loads(report.to_json()))
    assert again == report
    lines = report.to_csv().strip().splitlines()
    assert len(lines) == 3 and lines[0].startswith("algorithm,slice,eval_set,cutoff,HR")


def test_same_config_twice_gives_same_quality(small_split):
    reports = [
        run_protocol(SessionAwareRecommender(fit(small_split.train, make_config("stan", {"k": 50}))), small_split)
        for _ in range(2)
    ]
    assert reports[0].metrics == reports[1].metrics
