"""On-disk layout for preprocessed slices.

``<root>/slice_<i>/{train,validation,test}.csv`` with columns
``session_id,user_id,item_id,timestamp`` plus ``<root>/manifest.json``.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import pandas as pd

from sessionaware.errors import DataError
from sessionaware.preprocess import PreprocessConfig, PreprocessResult, Session, SessionLog, SliceSplit

ROLES = ("train", "validation", "test")
COLUMNS = ["session_id", "user_id", "item_id", "timestamp"]
MANIFEST = "manifest.json"


def slice_dir(root, index: int) -> Path:
    return Path(root) / f"slice_{index}"


def _to_frame(log: SessionLog) -> pd.DataFrame:
    rows = [(s.session_id, s.user_id, i, t) for s in log for i, t in zip(s.items, s.timestamps)]
    return pd.DataFrame(rows, columns=COLUMNS)


def _from_frame(frame: pd.DataFrame) -> SessionLog:
    sessions = []
    # events keep file order inside a session
    for (sid, uid), group in frame.groupby(["session_id", "user_id"], sort=False):
        sessions.append(
            Session(int(sid), int(uid), tuple(group["item_id"].tolist()), tuple(group["timestamp"].tolist()))
        )
    return SessionLog(sessions)


def write_split(split: SliceSplit, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for role in ROLES:
        _to_frame(getattr(split, role)).to_csv(directory / f"{role}.csv", index=False)


def read_split(directory, slice_index: int) -> SliceSplit:
    directory = Path(directory)
    logs = {}
    for role in ROLES:
        path = directory / f"{role}.csv"
        if not path.is_file():
            raise DataError(f"missing split file {path}")
        frame = pd.read_csv(path, dtype="int64")
        missing = set(COLUMNS) - set(frame.columns)
        if missing:
            raise DataError(f"{path}: missing columns {sorted(missing)}")
        logs[role] = _from_frame(frame)
    vocab = frozenset(logs["train"].items())
    return SliceSplit(slice_index, logs["train"], logs["validation"], logs["test"], vocab)


def write_preprocessed(result: PreprocessResult, root, cfg: PreprocessConfig, extra: dict) -> dict:
    """Writes every slice and a manifest; returns the manifest."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    slices = []
    for split, bounds, stats in zip(result.splits, result.boundaries, result.slice_stats):
        write_split(split, slice_dir(root, split.slice_index))
        slices.append(
            {
                "index": split.slice_index,
                "window": list(bounds),
                "stats": stats,
                "counts": split.counts(),
            }
        )
    manifest = {
        "config": dataclasses.asdict(cfg),
        "num_slices": len(result.splits),
        "slices": slices,
        "averaged_stats": result.averaged_stats(),
        "tuning_slice": result.most_events_slice(),
        "validation_merged_into_train": False,
        **extra,
    }
    (root / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def read_manifest(root) -> dict:
    path = Path(root) / MANIFEST
    if not path.is_file():
        raise DataError(f"missing manifest {path}; run preprocess first")
    return json.loads(path.read_text())
