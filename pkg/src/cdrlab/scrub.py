"""Anomaly-free series preparation: replace every flagged bucket with the
mean of the unflagged ones.

Mean replacement (not interpolation) is deliberate; both anomaly reasons
are scrubbed identically, so zero-activity outages rise to the mean just
like spikes fall to it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, TextIO

from .cluster import AnomalyReport
from .errors import AllAnomalous
from .series import ActivitySeries


@dataclass(frozen=True)
class ScrubbedSeries:
    values: tuple[float, ...]
    replaced_indices: tuple[int, ...]
    replacement_value: float

    def as_series(self, source: ActivitySeries) -> ActivitySeries:
        return source.with_values(self.values)


def make_anomaly_free(series: ActivitySeries, report: AnomalyReport,
                      replacement_value: float | None = None) -> ScrubbedSeries:
    """Return a copy of the series with anomalous buckets set to the mean
    of the non-anomalous ones.

    `replacement_value` overrides the computed mean; the CLI uses this to
    share a cross-series mean when scrubbing several users at once.
    """
    values = list(series.values)
    replaced = report.indices()
    for index in replaced:
        if not 0 <= index < len(values):
            raise IndexError(f"anomaly index {index} outside series of "
                             f"length {len(values)}")
    keep = [values[i] for i in range(len(values)) if i not in set(replaced)]
    if replacement_value is None:
        if not keep:
            raise AllAnomalous("no non-anomalous bucket left to average")
        replacement_value = sum(keep) / len(keep)
    for index in replaced:
        values[index] = replacement_value
    return ScrubbedSeries(tuple(values), tuple(replaced), float(replacement_value))


def write_replaced_indices(scrubbed: ScrubbedSeries, series: ActivitySeries,
                           fh: TextIO) -> None:
    from .timefmt import format_iso_utc

    fh.write("bucket_index,bucket_start_iso8601,replacement_value\n")
    for index in scrubbed.replaced_indices:
        fh.write(f"{index},{format_iso_utc(series.bucket_start(index))},"
                 f"{scrubbed.replacement_value!r}\n")
