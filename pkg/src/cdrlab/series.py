"""Regularly bucketed activity series and the differencing/splitting
primitives shared by clustering and forecasting.

The series is the interchange currency between modules: two-column CSV
`bucket_start_iso8601,value` on disk, an ActivitySeries in memory.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence, TextIO

from .errors import EmptyInput, MissingInitials, TooShort
from .ingest import ACTIVITY_FIELDS, AggregatedActivity, CdrEvent, Record
from .timefmt import format_iso_utc, parse_iso_utc

DEFAULT_EVENT_BUCKET_S = 3600   # hourly, for event-level weekly views
DEFAULT_GRID_BUCKET_S = 600     # the aggregated dataset's native 10 minutes


class Metric(str, Enum):
    EVENT_COUNT = "EventCount"
    TOTAL_DURATION_SECONDS = "TotalDurationSeconds"
    ACTIVITY_SUM = "ActivitySum"


@dataclass(frozen=True)
class ActivitySeries:
    start: int  # UTC epoch seconds of bucket 0
    bucket_width_s: int
    values: tuple[float, ...]
    metric: Metric = Metric.EVENT_COUNT
    label: str = ""

    def __post_init__(self):
        if self.bucket_width_s <= 0:
            raise ValueError("bucket_width_s must be positive")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    def bucket_start(self, index: int) -> int:
        return self.start + index * self.bucket_width_s

    def with_values(self, values: Sequence[float]) -> "ActivitySeries":
        return replace(self, values=tuple(float(v) for v in values))


@dataclass(frozen=True)
class DifferencedSeries:
    order_d: int
    initials: tuple[float, ...]  # first value of each successive difference level
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "initials", tuple(float(v) for v in self.initials))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


def bucketize(records: Sequence[Record], width_s: int | None = None,
              metric: Metric = Metric.EVENT_COUNT,
              activity_fields: Sequence[str] = ACTIVITY_FIELDS,
              label: str = "") -> ActivitySeries:
    """Aggregate time-sorted records into fixed-width buckets.

    Bucket 0 starts at the first record's timestamp floored to a width
    boundary, so bucket edges land on round wall-clock instants and
    active-hour windows line up with buckets. Gaps materialize as
    explicit zero buckets; the zero-activity anomaly rule depends on
    their presence.
    """
    if not records:
        raise EmptyInput("no records to bucketize")
    aggregated = isinstance(records[0], AggregatedActivity)
    if width_s is None:
        width_s = DEFAULT_GRID_BUCKET_S if aggregated else DEFAULT_EVENT_BUCKET_S
    if width_s <= 0:
        raise ValueError("width_s must be positive")
    if metric is Metric.ACTIVITY_SUM and not aggregated:
        raise ValueError("ActivitySum applies to aggregated records only")
    if metric is Metric.TOTAL_DURATION_SECONDS and aggregated:
        raise ValueError("TotalDurationSeconds applies to event records only")

    def at(record: Record) -> int:
        return record.timestamp_s if aggregated else record.timestamp

    start = (at(records[0]) // width_s) * width_s
    n_buckets = (at(records[-1]) - start) // width_s + 1
    values = [0.0] * n_buckets
    for record in records:
        index = (at(record) - start) // width_s
        if index < 0:
            raise ValueError("records not time-sorted")
        if metric is Metric.EVENT_COUNT:
            values[index] += 1.0
        elif metric is Metric.TOTAL_DURATION_SECONDS:
            values[index] += float(record.duration_s)
        else:
            values[index] += record.activity_sum(activity_fields)
    return ActivitySeries(start, width_s, tuple(values), metric, label)


def difference(values: Sequence[float], d: int) -> DifferencedSeries:
    """Apply first differencing d times, keeping the dropped leading
    value of each level so the operation inverts exactly."""
    if d < 0:
        raise ValueError("d must be >= 0")
    current = [float(v) for v in values]
    if len(current) <= d:
        raise TooShort(f"need more than d={d} values, got {len(current)}")
    initials = []
    for _ in range(d):
        initials.append(current[0])
        current = [current[i] - current[i - 1] for i in range(1, len(current))]
    return DifferencedSeries(d, tuple(initials), tuple(current))


def undifference(diff: DifferencedSeries) -> list[float]:
    """Invert difference(); exact round-trip by cumulative reconstruction."""
    if len(diff.initials) != diff.order_d:
        raise MissingInitials(
            f"order {diff.order_d} needs {diff.order_d} initials, "
            f"got {len(diff.initials)}"
        )
    current = list(diff.values)
    for level in range(diff.order_d - 1, -1, -1):
        rebuilt = [diff.initials[level]]
        for delta in current:
            rebuilt.append(rebuilt[-1] + delta)
        current = rebuilt
    return current


def split(series: ActivitySeries, train_fraction: float) -> tuple[ActivitySeries, ActivitySeries]:
    """Chronological prefix/suffix split. Train gets floor(n*fraction)
    buckets, clamped so both sides are non-empty."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(series.values)
    if n < 2:
        raise TooShort("need at least 2 buckets to split")
    n_train = int(n * train_fraction)
    n_train = max(1, min(n - 1, n_train))
    train = replace(series, values=series.values[:n_train])
    test = replace(
        series,
        start=series.start + n_train * series.bucket_width_s,
        values=series.values[n_train:],
    )
    return train, test


def write_series(series: ActivitySeries, fh: TextIO) -> None:
    fh.write("bucket_start_iso8601,value\n")
    for i, value in enumerate(series.values):
        fh.write(f"{format_iso_utc(series.bucket_start(i))},{value!r}\n")


def read_series(fh: TextIO, metric: Metric = Metric.EVENT_COUNT,
                label: str = "") -> ActivitySeries:
    """Load the two-column interchange CSV. Bucket width is inferred from
    the first two rows and must be uniform."""
    rows = []
    for line_no, line in enumerate(fh):
        if line_no == 0 and line.startswith("bucket_start"):
            continue
        line = line.strip()
        if not line:
            continue
        ts_tok, value_tok = line.split(",", 1)
        rows.append((parse_iso_utc(ts_tok), float(value_tok)))
    if not rows:
        raise EmptyInput("series file has no rows")
    if len(rows) == 1:
        return ActivitySeries(rows[0][0], DEFAULT_GRID_BUCKET_S,
                              (rows[0][1],), metric, label)
    width = rows[1][0] - rows[0][0]
    if width <= 0:
        raise ValueError("bucket starts must be strictly increasing")
    for i in range(1, len(rows)):
        if rows[i][0] - rows[i - 1][0] != width:
            raise ValueError(f"non-uniform bucket width at row {i}")
    return ActivitySeries(rows[0][0], width, tuple(v for _, v in rows),
                          metric, label)
