"""UTC timestamp formatting shared across modules.

All timestamps in this package are UTC epoch seconds; no input dataset
documents a timezone, so UTC is assumed throughout (a documented
simplification).
"""
from __future__ import annotations

from datetime import datetime, timezone


def format_iso_utc(epoch_s: int | float) -> str:
    """Epoch seconds -> 'YYYY-MM-DDTHH:MM:SSZ'."""
    dt = datetime.fromtimestamp(int(epoch_s), tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_iso_utc(text: str) -> int:
    """Inverse of format_iso_utc; accepts a trailing 'Z' or '+00:00'."""
    cleaned = text.strip()
    if cleaned.endswith("Z"):
        cleaned = cleaned[:-1] + "+00:00"
    dt = datetime.fromisoformat(cleaned)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def hour_of_day(epoch_s: int | float) -> int:
    return datetime.fromtimestamp(int(epoch_s), tz=timezone.utc).hour
