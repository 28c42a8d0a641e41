"""Loading, validation and canonical ordering of raw interaction logs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from sessionaware.errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Event:
    user_id: int
    item_id: int
    timestamp: int

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"timestamp must be non-negative, got {self.timestamp}")


@dataclass(frozen=True)
class ColumnFormat:
    """Describes how a delimited event file maps onto events.

    Attributes:
        user: Name of the user id column.
        item: Name of the item id column.
        timestamp: Name of the timestamp column.
        unit: ``"s"`` or ``"ms"``; milliseconds are floored to seconds.
        delimiter: Field separator. ``None`` sniffs comma vs. tab from the header.
        type_column: Optional action-type column used together with ``keep_type``.
        keep_type: Only rows whose ``type_column`` equals this value are kept.
        max_malformed: Number of malformed rows that may be skipped before
            loading fails. 0 means strict.
    """

    user: str = "user_id"
    item: str = "item_id"
    timestamp: str = "timestamp"
    unit: str = "s"
    delimiter: Optional[str] = None
    type_column: Optional[str] = None
    keep_type: Optional[str] = None
    max_malformed: int = 0

    def __post_init__(self) -> None:
        if self.unit not in ("s", "ms"):
            raise ValueError(f"timestamp unit must be 's' or 'ms', got {self.unit!r}")
        if self.max_malformed < 0:
            raise ValueError("max_malformed must be >= 0")
        if (self.type_column is None) != (self.keep_type is None):
            raise ValueError("type_column and keep_type must be given together")


@dataclass(frozen=True, eq=False)
class EventLog:
    """Immutable event log sorted by (user, timestamp, item).

    The three columns are stored as read-only int64 arrays of equal length.
    """

    users: np.ndarray
    items: np.ndarray
    timestamps: np.ndarray
    source_meta: str = ""
    malformed_skipped: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if not (len(self.users) == len(self.items) == len(self.timestamps)):
            raise ValueError("column arrays must have equal length")
        for arr in (self.users, self.items, self.timestamps):
            arr.setflags(write=False)

    @classmethod
    def from_events(cls, events, source_meta: str = "") -> "EventLog":
        events = list(events)
        users = np.array([e.user_id for e in events], dtype=np.int64)
        items = np.array([e.item_id for e in events], dtype=np.int64)
        ts = np.array([e.timestamp for e in events], dtype=np.int64)
        return cls.from_arrays(users, items, ts, source_meta)

    @classmethod
    def from_arrays(cls, users, items, timestamps, source_meta: str = "") -> "EventLog":
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        timestamps = np.asarray(timestamps, dtype=np.int64)
        if len(timestamps) and timestamps.min() < 0:
            raise DataError("timestamps must be non-negative")
        # np.lexsort uses the last key as primary
        order = np.lexsort((items, timestamps, users))
        return cls(
            users=users[order].copy(),
            items=items[order].copy(),
            timestamps=timestamps[order].copy(),
            source_meta=source_meta,
        )

    def __len__(self) -> int:
        return len(self.users)

    def __iter__(self):
        for u, i, t in zip(self.users.tolist(), self.items.tolist(), self.timestamps.tolist()):
            yield Event(u, i, t)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return (
            np.array_equal(self.users, other.users)
            and np.array_equal(self.items, other.items)
            and np.array_equal(self.timestamps, other.timestamps)
        )

    def select(self, mask: np.ndarray, source_meta: Optional[str] = None) -> "EventLog":
        """Returns the events where ``mask`` holds; canonical order is kept."""
        return EventLog(
            users=self.users[mask].copy(),
            items=self.items[mask].copy(),
            timestamps=self.timestamps[mask].copy(),
            source_meta=self.source_meta if source_meta is None else source_meta,
        )

    def id_mapping(self) -> dict[str, list[int]]:
        """Dense index mapping: position in each list is the internal integer id."""
        return {
            "users": np.unique(self.users).tolist(),
            "items": np.unique(self.items).tolist(),
        }

    def duplicate_count(self) -> int:
        if len(self) < 2:
            return 0
        same = (
            (self.users[1:] == self.users[:-1])
            & (self.items[1:] == self.items[:-1])
            & (self.timestamps[1:] == self.timestamps[:-1])
        )
        return int(same.sum())


@dataclass(frozen=True)
class LogStats:
    events: int
    users: int
    items: int
    span: int


def log_stats(log: EventLog) -> LogStats:
    if len(log) == 0:
        return LogStats(0, 0, 0, 0)
    return LogStats(
        events=len(log),
        users=len(np.unique(log.users)),
        items=len(np.unique(log.items)),
        span=int(log.timestamps.max() - log.timestamps.min()),
    )


def _sniff_delimiter(path: Path) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
    if not header.strip():
        raise DataError(f"{path}: missing header line")
    return "\t" if header.count("\t") > header.count(",") else ","


def _parse_int_column(raw: pd.Series) -> tuple[np.ndarray, np.ndarray]:
    """Returns (values, bad_mask). Integral floats such as '12.0' are accepted."""
    num = pd.to_numeric(raw, errors="coerce")
    bad = num.isna().to_numpy()
    vals = num.to_numpy(dtype=np.float64, na_value=0.0)
    bad |= ~np.isfinite(vals)
    bad |= vals != np.floor(vals)
    return np.where(bad, 0, vals).astype(np.int64), bad


def load_events(path, fmt: Optional[ColumnFormat] = None) -> EventLog:
    """Reads a delimited event file into a canonically sorted ``EventLog``.

    Raises:
        DataError: on a missing file or column, malformed rows beyond
            ``fmt.max_malformed``, or when no event survives.
    """
    fmt = fmt or ColumnFormat()
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    delimiter = fmt.delimiter or _sniff_delimiter(path)
    frame = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False)

    wanted = [fmt.user, fmt.item, fmt.timestamp]
    if fmt.type_column:
        wanted.append(fmt.type_column)
    for col in wanted:
        if col not in frame.columns:
            raise DataError(f"{path}: missing column {col!r}")

    if fmt.type_column:
        frame = frame[frame[fmt.type_column] == fmt.keep_type]

    users, bad_u = _parse_int_column(frame[fmt.user])
    items, bad_i = _parse_int_column(frame[fmt.item])
    # timestamps may carry a fractional part; they are floored after unit conversion
    ts_num = pd.to_numeric(frame[fmt.timestamp], errors="coerce").to_numpy(
        dtype=np.float64, na_value=np.nan
    )
    bad_t = ~np.isfinite(ts_num) | (np.nan_to_num(ts_num, nan=0.0) < 0)
    bad = bad_u | bad_i | bad_t

    n_bad = int(bad.sum())
    if n_bad:
        # data rows are 1-based, the header is line 1 of the file
        first = int(np.flatnonzero(bad)[0])
        row_no = int(frame.index[first]) + 1
        if n_bad > fmt.max_malformed:
            raise DataError(
                f"{path}: malformed value in row {row_no} (line {row_no + 1}); "
                f"{n_bad} malformed rows, {fmt.max_malformed} allowed"
            )
        logger.warning("%s: skipped %d malformed rows (first at row %d)", path, n_bad, row_no)

    keep = ~bad
    ts = ts_num[keep]
    if fmt.unit == "ms":
        ts = ts / 1000.0
    ts = np.floor(ts).astype(np.int64)
    log = EventLog.from_arrays(users[keep], items[keep], ts)
    if len(log) == 0:
        raise DataError(f"{path}: empty result")

    dup = log.duplicate_count()
    meta = f"{path.name}; rows={len(log)}; malformed_skipped={n_bad}; duplicates_kept={dup}"
    logger.info("loaded %s", meta)
    return EventLog(log.users, log.items, log.timestamps, source_meta=meta, malformed_skipped=n_bad)


def write_events(log: EventLog, path, fmt: Optional[ColumnFormat] = None) -> None:
    """Writes ``log`` with the column names, delimiter and unit of ``fmt``."""
    fmt = fmt or ColumnFormat()
    ts = log.timestamps * 1000 if fmt.unit == "ms" else log.timestamps
    frame = pd.DataFrame({fmt.user: log.users, fmt.item: log.items, fmt.timestamp: ts})
    frame.to_csv(path, sep=fmt.delimiter or ",", index=False)
