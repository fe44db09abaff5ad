"""Parsers for the three supported CDR dataset layouts plus the package's
canonical event CSV, and the preprocessing step that drops irregular rows.

Formats:

* crawdad  -- per-user event log: date, time, type, direction, duration.
* nodobo   -- smartphone study log: user, other, direction, duration,
  free-form timestamp ("Thu Sep 9 19:35:37 100 2010").
* telecom-italia -- grid-aggregated activity: grid id, timestamp (ms),
  four non-negative activity floats.
* canonical -- this package's normalized event CSV
  (user,other,direction,kind,duration_s,timestamp_iso8601).

All parsers raise MalformedRow with a short reason key; preprocess()
absorbs those into an IngestReport instead of failing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Iterator, Sequence, TextIO, Union

from .errors import MalformedRow
from .timefmt import format_iso_utc, parse_iso_utc


class Kind(str, Enum):
    VOICE = "Voice"
    SMS = "Sms"


class Direction(str, Enum):
    INCOMING = "Incoming"
    OUTGOING = "Outgoing"
    MISSED = "Missed"


@dataclass(frozen=True)
class CdrEvent:
    """One normalized event-level record."""

    user_id: str
    other_id: str | None
    timestamp: int  # UTC epoch seconds
    kind: Kind
    direction: Direction
    duration_s: int  # 0 for SMS and missed calls


@dataclass(frozen=True)
class AggregatedActivity:
    """One grid-aggregated activity record (telecom-italia layout)."""

    grid_id: int
    timestamp: int  # epoch milliseconds (treated as opaque ordered stamp)
    sms_in: float
    sms_out: float
    call_in: float
    call_out: float

    @property
    def timestamp_s(self) -> int:
        return self.timestamp // 1000

    def activity_sum(self, fields: Sequence[str] | None = None) -> float:
        names = fields if fields is not None else ACTIVITY_FIELDS
        return float(sum(getattr(self, name) for name in names))


ACTIVITY_FIELDS = ("sms_in", "sms_out", "call_in", "call_out")

Record = Union[CdrEvent, AggregatedActivity]
ParseResult = Union[Record, MalformedRow]


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_kept: int = 0
    rows_dropped: int = 0
    drop_reasons: dict[str, int] = field(default_factory=dict)

    def drop(self, reason: str) -> None:
        self.rows_dropped += 1
        self.drop_reasons[reason] = self.drop_reasons.get(reason, 0) + 1

    def summary(self) -> str:
        parts = [
            f"rows_read={self.rows_read}",
            f"rows_kept={self.rows_kept}",
            f"rows_dropped={self.rows_dropped}",
        ]
        for reason in sorted(self.drop_reasons):
            parts.append(f"drop[{reason}]={self.drop_reasons[reason]}")
        return " ".join(parts)


_MONTHS = {
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "may": 5, "jun": 6,
    "jul": 7, "aug": 8, "sep": 9, "oct": 10, "nov": 11, "dec": 12,
}

_DEFAULT_CRAWDAD_USER = "subscriber"


def _split(line: str, delimiter: str) -> list[str]:
    return [f.strip() for f in line.rstrip("\r\n").split(delimiter)]


def _parse_direction(token: str) -> Direction:
    try:
        return Direction(token.strip().capitalize())
    except ValueError:
        raise MalformedRow("bad_direction", token) from None


def _parse_kind(token: str) -> Kind:
    normalized = token.strip().lower()
    if normalized == "voice":
        return Kind.VOICE
    if normalized == "sms":
        return Kind.SMS
    raise MalformedRow("bad_kind", token)


def _parse_duration(token: str) -> int:
    try:
        duration = int(token)
    except ValueError:
        raise MalformedRow("bad_duration", token) from None
    if duration < 0:
        raise MalformedRow("bad_duration", f"negative: {token}")
    return duration


def parse_crawdad(line: str, delimiter: str = ",",
                  user_id: str = _DEFAULT_CRAWDAD_USER) -> CdrEvent:
    """Parse one crawdad-layout row: YYYYMMDD,hhmmss,type,direction,duration.

    The dataset carries no subscriber column (it is a single user's log),
    so `user_id` supplies one.
    """
    fields = _split(line, delimiter)
    if len(fields) != 5:
        raise MalformedRow("field_count", f"expected 5, got {len(fields)}")
    date_tok, time_tok, kind_tok, dir_tok, dur_tok = fields
    if len(date_tok) != 8 or not date_tok.isdigit():
        raise MalformedRow("bad_date", date_tok)
    if len(time_tok) != 6 or not time_tok.isdigit():
        raise MalformedRow("bad_time", time_tok)
    try:
        dt = datetime(
            int(date_tok[0:4]), int(date_tok[4:6]), int(date_tok[6:8]),
            int(time_tok[0:2]), int(time_tok[2:4]), int(time_tok[4:6]),
            tzinfo=timezone.utc,
        )
    except ValueError as exc:
        raise MalformedRow("bad_datetime", str(exc)) from None
    kind = _parse_kind(kind_tok)
    direction = _parse_direction(dir_tok)
    duration = _parse_duration(dur_tok)
    if kind is Kind.SMS or direction is Direction.MISSED:
        duration = 0
    return CdrEvent(user_id, None, int(dt.timestamp()), kind, direction, duration)


def parse_nodobo(line: str, delimiter: str = ",") -> CdrEvent:
    """Parse one nodobo-layout row: user,other,direction,duration,timestamp.

    The timestamp is 'Dow Mon D HH:MM:SS <n> YYYY'; the undocumented
    numeric token between seconds and year is validated and discarded.
    Rows are voice-call records (the layout has no activity-type column).
    """
    fields = _split(line, delimiter)
    if len(fields) != 5:
        raise MalformedRow("field_count", f"expected 5, got {len(fields)}")
    user_tok, other_tok, dir_tok, dur_tok, ts_tok = fields
    if not user_tok:
        raise MalformedRow("bad_user", "empty user id")
    direction = _parse_direction(dir_tok)
    duration = _parse_duration(dur_tok)
    if direction is Direction.MISSED:
        duration = 0
    tokens = ts_tok.split()
    if len(tokens) != 6:
        raise MalformedRow("bad_timestamp", ts_tok)
    _dow, mon_tok, day_tok, clock_tok, extra_tok, year_tok = tokens
    if not extra_tok.lstrip("+-").isdigit():
        raise MalformedRow("bad_timestamp", f"non-numeric token: {extra_tok}")
    month = _MONTHS.get(mon_tok.lower())
    if month is None:
        raise MalformedRow("bad_timestamp", f"unknown month: {mon_tok}")
    clock = clock_tok.split(":")
    if len(clock) != 3:
        raise MalformedRow("bad_timestamp", clock_tok)
    try:
        dt = datetime(
            int(year_tok), month, int(day_tok),
            int(clock[0]), int(clock[1]), int(clock[2]),
            tzinfo=timezone.utc,
        )
    except ValueError as exc:
        raise MalformedRow("bad_timestamp", str(exc)) from None
    other = other_tok or None
    return CdrEvent(user_tok, other, int(dt.timestamp()), Kind.VOICE,
                    direction, duration)


def parse_telecom_italia(line: str, delimiter: str = ",") -> AggregatedActivity:
    """Parse one telecom-italia row: grid,timestamp,4 activity floats.

    Extra trailing fields are ignored; empty activity fields mean no
    recorded activity and parse as 0.
    """
    fields = _split(line, delimiter)
    if len(fields) < 6:
        raise MalformedRow("field_count", f"expected >=6, got {len(fields)}")
    try:
        grid_id = int(fields[0])
    except ValueError:
        raise MalformedRow("bad_grid_id", fields[0]) from None
    if grid_id < 1:
        raise MalformedRow("bad_grid_id", f"must be >= 1: {fields[0]}")
    try:
        timestamp = int(fields[1])
    except ValueError:
        raise MalformedRow("bad_timestamp", fields[1]) from None
    activities = []
    for token in fields[2:6]:
        if token == "":
            activities.append(0.0)
            continue
        try:
            value = float(token)
        except ValueError:
            raise MalformedRow("bad_activity", token) from None
        if not value >= 0.0:
            raise MalformedRow("bad_activity", f"negative: {token}")
        activities.append(value)
    return AggregatedActivity(grid_id, timestamp, *activities)


def parse_canonical(line: str, delimiter: str = ",") -> CdrEvent:
    """Parse one row of the canonical event CSV this package emits."""
    fields = _split(line, delimiter)
    if len(fields) != 6:
        raise MalformedRow("field_count", f"expected 6, got {len(fields)}")
    user_tok, other_tok, dir_tok, kind_tok, dur_tok, ts_tok = fields
    if not user_tok:
        raise MalformedRow("bad_user", "empty user id")
    direction = _parse_direction(dir_tok)
    kind = _parse_kind(kind_tok)
    duration = _parse_duration(dur_tok)
    if kind is Kind.SMS or direction is Direction.MISSED:
        duration = 0
    try:
        timestamp = parse_iso_utc(ts_tok)
    except ValueError:
        raise MalformedRow("bad_timestamp", ts_tok) from None
    return CdrEvent(user_tok, other_tok or None, timestamp, kind, direction,
                    duration)


PARSERS = {
    "crawdad": parse_crawdad,
    "nodobo": parse_nodobo,
    "telecom-italia": parse_telecom_italia,
    "canonical": parse_canonical,
}

CANONICAL_HEADER = "user,other,direction,kind,duration_s,timestamp_iso8601"
AGGREGATED_HEADER = "grid_id,timestamp_ms,sms_in,sms_out,call_in,call_out"


def parse_lines(lines: Iterable[str], parser, delimiter: str = ",") -> Iterator[ParseResult]:
    """Map raw text rows to events, yielding MalformedRow objects in place
    of rows that fail to parse. Blank lines are skipped."""
    for line in lines:
        if not line.strip():
            continue
        try:
            yield parser(line, delimiter)
        except MalformedRow as exc:
            yield exc


def preprocess(results: Iterable[ParseResult]) -> tuple[list[Record], IngestReport]:
    """Drop malformed and duplicate rows, sort by timestamp, report counts.

    Duplicates are detected on the full normalized record, so formatting
    noise in the source cannot defeat deduplication. Idempotent: feeding
    the kept events back in drops nothing.
    """
    report = IngestReport()
    seen: set[Record] = set()
    kept: list[Record] = []
    for result in results:
        report.rows_read += 1
        if isinstance(result, MalformedRow):
            report.drop(result.reason)
            continue
        if result in seen:
            report.drop("duplicate")
            continue
        seen.add(result)
        kept.append(result)
    kept.sort(key=lambda r: r.timestamp)
    report.rows_kept = len(kept)
    return kept, report


def load_events(path, fmt: str, delimiter: str = ",", header: bool = True,
                **parser_kwargs) -> tuple[list[Record], IngestReport]:
    """Read a dataset file and return (events, report)."""
    parser = PARSERS[fmt]
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if header and lines:
        lines = lines[1:]
    if parser_kwargs:
        def bound(line, delim):
            return parser(line, delim, **parser_kwargs)
        return preprocess(parse_lines(lines, bound, delimiter))
    return preprocess(parse_lines(lines, parser, delimiter))


def canonical_row(event: CdrEvent) -> str:
    return ",".join([
        event.user_id,
        event.other_id or "",
        event.direction.value,
        event.kind.value,
        str(event.duration_s),
        format_iso_utc(event.timestamp),
    ])


def aggregated_row(row: AggregatedActivity) -> str:
    return ",".join([
        str(row.grid_id),
        str(row.timestamp),
        repr(row.sms_in),
        repr(row.sms_out),
        repr(row.call_in),
        repr(row.call_out),
    ])


def write_canonical(records: Sequence[Record], fh: TextIO) -> None:
    """Emit records in their canonical CSV form (header included)."""
    if records and isinstance(records[0], AggregatedActivity):
        fh.write(AGGREGATED_HEADER + "\n")
        for record in records:
            fh.write(aggregated_row(record) + "\n")
    else:
        fh.write(CANONICAL_HEADER + "\n")
        for record in records:
            fh.write(canonical_row(record) + "\n")


def convert_grid_timestamps(rows: Sequence[AggregatedActivity], epoch_s: int,
                            step_s: int) -> list[AggregatedActivity]:
    """Reinterpret opaque grid timestamps as ordered bucket indices.

    Some exports carry small ordinal stamps rather than epoch
    milliseconds; this maps stamp rank -> epoch_s + rank*step_s without
    guessing the true epoch.
    """
    distinct = sorted({row.timestamp for row in rows})
    rank = {stamp: i for i, stamp in enumerate(distinct)}
    return [
        AggregatedActivity(
            row.grid_id,
            (epoch_s + rank[row.timestamp] * step_s) * 1000,
            row.sms_in, row.sms_out, row.call_in, row.call_out,
        )
        for row in rows
    ]
