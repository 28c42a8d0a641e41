"""Command-line front end: preprocess -> tune -> eval -> report.

One YAML (or JSON) config file describes a run; command-line flags override
its keys. Results land in ``<out>/<dataset>/slice_<i>/<algorithm>/``.

Exit codes: 0 success, 1 user/config/data error, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import yaml

from sessionaware import __version__, presets
from sessionaware.errors import ConfigError, DataError, SessionAwareError
from sessionaware.evaluate import METRICS, MetricConfig, MetricReport
from sessionaware.eventlog import ColumnFormat, load_events
from sessionaware.extensions import parse_algorithm_name
from sessionaware.hyperopt import SearchResult, SearchSpace, config_key, random_search, space_for
from sessionaware.preprocess import PreprocessConfig, run_preprocessing
from sessionaware.runner import evaluate_algorithm, make_objective
from sessionaware.storage import read_manifest, read_split, slice_dir, write_preprocessed

logger = logging.getLogger("sessionaware")

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2


@dataclasses.dataclass
class AlgorithmSpec:
    name: str
    params: Optional[dict] = None
    preset: Optional[str] = None
    space: Optional[dict] = None


@dataclasses.dataclass
class RunConfig:
    dataset: str
    data_path: Optional[Path]
    column_format: ColumnFormat
    preprocess: PreprocessConfig
    algorithms: list[AlgorithmSpec]
    metrics: MetricConfig
    seed: int = 0
    out: Path = Path("results")
    threads: int = 1
    trials: int = 100
    posthoc_trials: Optional[int] = None
    tuning_slice: Optional[int] = None

    @property
    def root(self) -> Path:
        return self.out / self.dataset


def _load_config_file(path: Optional[str]) -> tuple[dict, Path]:
    if path is None:
        return {}, Path.cwd()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    data = yaml.safe_load(p.read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    return data, p.parent


def build_run_config(args: argparse.Namespace) -> RunConfig:
    raw, base_dir = _load_config_file(args.config)
    ds = raw.get("dataset", {}) or {}
    name = str(ds.get("name", "dataset"))
    path = ds.get("path")
    data_path = None
    if path is not None:
        data_path = Path(path) if Path(path).is_absolute() else base_dir / path

    try:
        fmt = ColumnFormat(**(ds.get("format") or {}))
        pre = PreprocessConfig(**(raw.get("preprocess") or {}))
    except TypeError as exc:
        raise ConfigError(f"invalid config key: {exc}") from None

    algos = []
    for entry in raw.get("algorithms", []) or []:
        if isinstance(entry, str):
            entry = {"name": entry}
        unknown = set(entry) - {"name", "params", "preset", "space"}
        if unknown:
            raise ConfigError(f"unknown keys in algorithm entry: {sorted(unknown)}")
        algos.append(AlgorithmSpec(**entry))
    if getattr(args, "algorithms", None):
        wanted = args.algorithms.split(",")
        known = {a.name: a for a in algos}
        algos = [known.get(n, AlgorithmSpec(n)) for n in wanted]
    for a in algos:
        base, _ = parse_algorithm_name(a.name)
        if base not in presets.BASE_SPACES:
            raise ConfigError(f"unknown algorithm {a.name!r}")

    cutoffs = args.cutoffs or (raw.get("metrics", {}) or {}).get("cutoffs") or (5, 10, 20)
    if isinstance(cutoffs, str):
        cutoffs = [int(c) for c in cutoffs.split(",")]
    tuning = raw.get("tuning", {}) or {}
    out = Path(args.out) if args.out else Path(raw.get("out", "results"))
    if not out.is_absolute() and not args.out:
        out = base_dir / out
    return RunConfig(
        dataset=name,
        data_path=data_path,
        column_format=fmt,
        preprocess=pre,
        algorithms=algos,
        metrics=MetricConfig(tuple(cutoffs)),
        seed=int(args.seed if args.seed is not None else raw.get("seed", 0)),
        out=out,
        threads=int(args.threads if args.threads is not None else raw.get("threads", 1)),
        trials=int(getattr(args, "trials", None) or tuning.get("trials", 100)),
        posthoc_trials=tuning.get("posthoc_trials"),
        tuning_slice=args.slice if args.command == "tune" and args.slice is not None else tuning.get("slice"),
    )


# -- commands ----------------------------------------------------------------


def cmd_preprocess(cfg: RunConfig, args) -> int:
    if cfg.data_path is None:
        raise ConfigError("dataset.path is required for preprocess")
    log = load_events(cfg.data_path, cfg.column_format)
    result = run_preprocessing(log, cfg.preprocess, seed=cfg.seed)
    extra = {
        "dataset": cfg.dataset,
        "seed": cfg.seed,
        "source": log.source_meta,
        "duplicates": "exact duplicate events are kept",
    }
    manifest = write_preprocessed(result, cfg.root, cfg.preprocess, extra)
    (cfg.root / "id_map.json").write_text(json.dumps(log.id_mapping()))
    avg = manifest["averaged_stats"]
    print(
        f"{cfg.dataset}: {manifest['num_slices']} slices written to {cfg.root}; "
        + ", ".join(f"{k}={v:.2f}" for k, v in avg.items())
    )
    return EXIT_OK


def _tuning_slice(cfg: RunConfig) -> int:
    if cfg.tuning_slice is not None:
        return int(cfg.tuning_slice)
    return int(read_manifest(cfg.root)["tuning_slice"])


def cmd_tune(cfg: RunConfig, args) -> int:
    if not cfg.algorithms:
        raise ConfigError("no algorithms configured")
    t = _tuning_slice(cfg)
    split = read_split(slice_dir(cfg.root, t), t)
    for algo in cfg.algorithms:
        space = SearchSpace.from_dict(algo.space) if algo.space else space_for(algo.name)
        target = slice_dir(cfg.root, t) / algo.name
        target.mkdir(parents=True, exist_ok=True)
        path = target / "search.json"
        cache = {}
        if args.resume and path.is_file():
            for trial in SearchResult.load(path).trials:
                cache[config_key(trial.config)] = trial.score
            logger.info("%s: resuming with %d cached trials", algo.name, len(cache))
        objective = make_objective(algo.name, split, threads=1 if args.timing else cfg.threads)
        result = random_search(space, cfg.trials, objective, seed=cfg.seed, posthoc_trials=cfg.posthoc_trials, cache=cache)
        result.save(path)
        print(f"{algo.name}: best MRR@20={result.best_score:.4f} over {len(result.trials)} trials -> {path}")
    return EXIT_OK


def _resolve_params(cfg: RunConfig, algo: AlgorithmSpec) -> dict:
    if algo.params is not None:
        return dict(algo.params)
    try:
        tuned = slice_dir(cfg.root, _tuning_slice(cfg)) / algo.name / "search.json"
    except DataError:
        tuned = None
    if tuned is not None and tuned.is_file():
        return SearchResult.load(tuned).best_config
    if algo.preset:
        try:
            return presets.preset(algo.preset, algo.name)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError(f"{algo.name}: no params, no tuning result and no preset")


def cmd_eval(cfg: RunConfig, args) -> int:
    if not cfg.algorithms:
        raise ConfigError("no algorithms configured")
    manifest = read_manifest(cfg.root)
    threads = 1 if args.timing else cfg.threads
    slices = range(manifest["num_slices"]) if args.slice is None else [args.slice]
    for algo in cfg.algorithms:
        params = _resolve_params(cfg, algo)
        for i in slices:
            split = read_split(slice_dir(cfg.root, i), i)
            report = evaluate_algorithm(algo.name, params, split, args.eval_set, cfg.metrics, threads=threads)
            target = slice_dir(cfg.root, i) / algo.name
            target.mkdir(parents=True, exist_ok=True)
            (target / "report.json").write_text(report.to_json())
            (target / "report.csv").write_text(report.to_csv())
            (target / "params.json").write_text(json.dumps(params, indent=2, sort_keys=True))
            k = max(report.metrics)
            m = report.metrics[k]
            print(f"{algo.name} slice {i}: MAP@{k}={m['MAP']:.4f} HR@{k}={m['HR']:.4f} MRR@{k}={m['MRR']:.4f}")
    return EXIT_OK


def aggregate_reports(root: Path, cutoff: Optional[int] = None) -> tuple[list[dict], int]:
    """Slice-averaged rows per algorithm sorted by MAP@cutoff (descending).

    Returns the rows and the cutoff used.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"result directory not found: {root}")
    try:
        n_slices = int(read_manifest(root)["num_slices"])
    except DataError:
        n_slices = len(list(root.glob("slice_*")))
    reports: dict[str, dict[int, MetricReport]] = {}
    for path in sorted(root.glob("slice_*/*/report.json")):
        rep = MetricReport.from_dict(json.loads(path.read_text()))
        reports.setdefault(rep.algorithm, {})[rep.slice_index] = rep
    if not reports:
        raise DataError(f"no reports found under {root}")

    if cutoff is None:
        cutoff = max(max(r.metrics) for per in reports.values() for r in per.values())
    rows = []
    for name, per_slice in sorted(reports.items()):
        usable = [r for r in per_slice.values() if cutoff in r.metrics]
        row = {"algorithm": name, "cutoff": cutoff, "slices": len(usable)}
        missing = sorted(set(range(n_slices)) - {r.slice_index for r in usable})
        row["complete"] = not missing
        if missing:
            logger.warning("%s: missing slice reports %s", name, missing)
        for metric in METRICS:
            vals = [r.metrics[cutoff][metric] for r in usable]
            row[metric] = math.fsum(vals) / len(vals) if vals else float("nan")
        row["training_time_s"] = math.fsum(r.training_time_s for r in usable) / max(1, len(usable))
        row["mean_prediction_time_ms"] = math.fsum(r.mean_prediction_time_ms for r in usable) / max(1, len(usable))
        rows.append(row)
    rows.sort(key=lambda r: (-(r["MAP"] if not math.isnan(r["MAP"]) else -math.inf), r["algorithm"]))
    return rows, cutoff


def format_table(rows: list[dict], cutoff: int) -> str:
    header = ["algorithm"] + [f"{m}@{cutoff}" for m in METRICS] + ["train_s", "pred_ms", "note"]
    lines = [header]
    for r in rows:
        lines.append(
            [r["algorithm"]]
            + [f"{r[m]:.4f}" for m in METRICS]
            + [f"{r['training_time_s']:.2f}", f"{r['mean_prediction_time_ms']:.2f}", "" if r["complete"] else "incomplete"]
        )
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in lines) + "\n"


def cmd_report(cfg: RunConfig, args) -> int:
    root = Path(args.results) if args.results else cfg.root
    rows, cutoff = aggregate_reports(root, args.cutoff)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    (root / "report.csv").write_text(buf.getvalue())
    table = format_table(rows, cutoff)
    (root / "report.txt").write_text(table)
    print(table, end="")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def _common(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies use SUPPRESS so flags given before the subcommand survive
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=d(None), help="YAML/JSON run configuration")
    common.add_argument("--seed", type=int, default=d(None))
    common.add_argument("--out", default=d(None), help="output root directory")
    common.add_argument("--threads", type=int, default=d(None))
    common.add_argument("--cutoffs", default=d(None), help="comma separated list, e.g. 5,10,20")
    common.add_argument(
        "--timing", action="store_true", default=d(False), help="single worker so latencies are comparable"
    )
    common.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return common


def _parser() -> argparse.ArgumentParser:
    common = _common(suppress=True)
    parser = argparse.ArgumentParser(prog="sessionaware", description=__doc__.splitlines()[0], parents=[_common(False)])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("preprocess", parents=[common], help="sessionize, slice, filter and split a log")

    p = sub.add_parser("tune", parents=[common], help="random hyperparameter search on the tuning slice")
    p.add_argument("--algorithms", help="comma separated algorithm names, overrides the config")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--slice", type=int, default=None, help="tuning slice, default: most events")
    p.add_argument("--resume", action="store_true", help="reuse scores from an existing trial log")

    p = sub.add_parser("eval", parents=[common], help="evaluate algorithms on every slice")
    p.add_argument("--algorithms", help="comma separated algorithm names, overrides the config")
    p.add_argument("--slice", type=int, default=None)
    p.add_argument("--eval-set", choices=("test", "validation"), default="test")

    p = sub.add_parser("report", parents=[common], help="slice-averaged result table")
    p.add_argument("results", nargs="?", help="result directory, default <out>/<dataset>")
    p.add_argument("--cutoff", type=int, default=None, help="cutoff for the table, default the largest")
    return parser


COMMANDS = {"preprocess": cmd_preprocess, "tune": cmd_tune, "eval": cmd_eval, "report": cmd_report}


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = build_run_config(args)
        return COMMANDS[args.command](cfg, args)
    except (SessionAwareError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
