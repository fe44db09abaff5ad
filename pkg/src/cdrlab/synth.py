"""Seeded synthetic CDR corpora with known injected anomalies.

The real datasets behind this pipeline are proprietary or partially
available, so reproduction runs on generated corpora shaped like them:
a multi-day diurnal activity pattern with a handful of extreme spikes at
fixed wall-clock instants plus one forced zero-activity hour inside the
active window. The generator emits event-level records (so the full
ingest path is exercised) along with a ground-truth sidecar naming the
anomalous buckets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .cluster import Reason
from .ingest import CdrEvent, Direction, Kind
from .timefmt import format_iso_utc, parse_iso_utc

# 2010-09-16T00:00:00Z; the week profiles span Sep 16-24 inclusive
_WEEK_START = 1284595200
ACTIVE_WINDOW = (8, 22)

_USER_POOL = tuple(f"u{i:02d}" for i in range(12))


@dataclass(frozen=True)
class SynthProfile:
    name: str
    start: int
    bucket_width_s: int
    n_buckets: int
    spike_buckets: tuple[int, ...]
    zero_buckets: tuple[int, ...]

    def truth(self) -> list[tuple[int, Reason]]:
        flagged = [(b, Reason.HIGH_ACTIVITY_CLUSTER) for b in self.spike_buckets]
        flagged += [(b, Reason.ZERO_ACTIVITY) for b in self.zero_buckets]
        return sorted(flagged)

    def bucket_start(self, index: int) -> int:
        return self.start + index * self.bucket_width_s


def _bucket(day: int, hour: int) -> int:
    return day * 24 + hour


# anomaly instants echo the documented ground truth of the week under
# study: spikes on day 1 (17h), day 3 (17h), day 6 (12h), day 8 (21h),
# and a dead 17:00-18:00 hour on day 8
_WEEK_SPIKES = (_bucket(1, 17), _bucket(3, 17), _bucket(6, 12), _bucket(8, 21))
_WEEK_ZEROS = (_bucket(8, 17),)

PROFILES = {
    "week-default": SynthProfile("week-default", _WEEK_START, 3600, 9 * 24,
                                 _WEEK_SPIKES, _WEEK_ZEROS),
    "week-clean": SynthProfile("week-clean", _WEEK_START, 3600, 9 * 24,
                               (), ()),
    "day-trend": SynthProfile("day-trend", _WEEK_START, 600, 144, (), ()),
}


def profile(name: str) -> SynthProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; "
                         f"choose from {sorted(PROFILES)}") from None


def expected_rate(prof: SynthProfile, index: int) -> float:
    """Mean events per bucket before anomaly injection."""
    if prof.name == "day-trend":
        # one strongly trending day at 10-minute resolution
        frac = index / (prof.n_buckets - 1)
        return 10.0 + 170.0 * frac ** 1.5
    hour = (index * prof.bucket_width_s // 3600) % 24
    if hour < 8:
        return 8.0
    if hour in (8, 9, 22, 23):
        return {8: 75.0, 9: 105.0, 22: 95.0, 23: 80.0}[hour]
    # working hours 10-21: a gentle hump between 200 and 240
    return 200.0 + 40.0 * math.sin(math.pi * (hour - 10) / 11.0)


def generate_events(prof: SynthProfile, seed: int = 0
                    ) -> tuple[list[CdrEvent], list[tuple[int, Reason]]]:
    """Draw one corpus: Poisson bucket counts around the profile's rate,
    spikes added on top, zero buckets forced empty.

    The first and last buckets are kept non-empty so the bucketized
    series spans the whole profile and sidecar indices line up with
    detector indices.
    """
    rng = np.random.default_rng(seed)
    events: list[CdrEvent] = []
    zero_set = set(prof.zero_buckets)
    spike_set = set(prof.spike_buckets)
    for index in range(prof.n_buckets):
        count = int(rng.poisson(expected_rate(prof, index)))
        if index in spike_set:
            count += int(rng.integers(450, 551))
        if index in zero_set:
            count = 0
        elif count == 0 and index in (0, prof.n_buckets - 1):
            count = 1
        if count == 0:
            continue
        offsets = np.sort(rng.integers(0, prof.bucket_width_s, size=count))
        kinds = rng.random(count)
        direction_draw = rng.random(count)
        durations = rng.exponential(120.0, size=count)
        users = rng.integers(0, len(_USER_POOL), size=count)
        others = rng.integers(0, len(_USER_POOL) - 1, size=count)
        base = prof.bucket_start(index)
        for e in range(count):
            kind = Kind.VOICE if kinds[e] < 0.6 else Kind.SMS
            if direction_draw[e] < 0.45:
                direction = Direction.INCOMING
            elif direction_draw[e] < 0.90:
                direction = Direction.OUTGOING
            else:
                direction = Direction.MISSED
            user = _USER_POOL[users[e]]
            other_idx = others[e] if others[e] < users[e] else others[e] + 1
            duration = 0
            if kind is Kind.VOICE and direction is not Direction.MISSED:
                duration = int(durations[e]) + 1
            events.append(CdrEvent(user, _USER_POOL[other_idx],
                                   base + int(offsets[e]), kind, direction,
                                   duration))
    return events, prof.truth()


def write_truth(truth: Sequence[tuple[int, Reason]], prof: SynthProfile,
                fh: TextIO) -> None:
    fh.write("bucket_index,bucket_start_iso8601,reason\n")
    for index, reason in truth:
        fh.write(f"{index},{format_iso_utc(prof.bucket_start(index))},"
                 f"{reason.value}\n")


def read_truth(fh: TextIO) -> list[tuple[int, int, Reason]]:
    """Returns (bucket_index, bucket_start_epoch_s, reason) rows."""
    rows = []
    for line_no, line in enumerate(fh):
        if line_no == 0 and line.startswith("bucket_index"):
            continue
        line = line.strip()
        if not line:
            continue
        index_tok, ts_tok, reason_tok = line.split(",")
        rows.append((int(index_tok), parse_iso_utc(ts_tok), Reason(reason_tok)))
    return rows
