"""k-means clustering over activity levels and anomaly labeling.

The clustering loop is written out directly (assignment step, centroid
update, repeat until assignments stop changing) because its behavior
under ties, empty clusters, and seeding is part of this module's
contract. Anomalous buckets are the members of the cluster that has
both the highest centroid and strictly the fewest members; zero-valued
buckets inside the active-hours window are flagged separately.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, TextIO

import numpy as np

from .errors import DegenerateInput
from .series import ActivitySeries
from .timefmt import format_iso_utc, hour_of_day, parse_iso_utc

DEFAULT_K = 3
DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6


class Reason(str, Enum):
    HIGH_ACTIVITY_CLUSTER = "HighActivityCluster"
    ZERO_ACTIVITY = "ZeroActivity"


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray        # (k, n)
    assignments: np.ndarray      # (m,) cluster index per point
    inertia: float
    iterations: int
    seed: int
    inertia_trace: list[float] = field(default_factory=list)
    converged: bool = True

    def member_counts(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


@dataclass
class AnomalyReport:
    anomalous_buckets: list[tuple[int, Reason]]
    anomalous_cluster_index: int | None = None

    def indices(self, reason: Reason | None = None) -> list[int]:
        return sorted({i for i, r in self.anomalous_buckets
                       if reason is None or r is reason})


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise DegenerateInput("points must be a non-empty 1-D or 2-D array")
    return pts


def _assign(pts: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # argmin returns the lowest index on exact distance ties
    d2 = ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def kmeans(points, k: int, max_iter: int = DEFAULT_MAX_ITER,
           tol: float = DEFAULT_TOL, seed: int = 0) -> ClusterModel:
    """Lloyd-style k-means, deterministic for a given seed.

    Initial centroids are k distinct points sampled uniformly without
    replacement. The loop alternates assignment and mean updates until
    assignments stabilize, the relative inertia improvement drops below
    `tol`, or `max_iter` passes. A cluster emptied by reassignment is
    repaired by moving its centroid onto the point currently farthest
    from its own centroid.
    """
    pts = _as_points(points)
    if k < 1:
        raise DegenerateInput("k must be >= 1")
    distinct = np.unique(pts, axis=0)
    if k > len(distinct):
        raise DegenerateInput(
            f"k={k} exceeds the {len(distinct)} distinct points")

    rng = np.random.default_rng(seed)
    centroids = distinct[rng.choice(len(distinct), size=k, replace=False)]

    assignments = None
    trace: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new_assign = _assign(pts, centroids)
        if assignments is not None and np.array_equal(new_assign, assignments):
            # fixed point: centroids are already the means of new_assign
            iterations -= 1
            converged = True
            break
        assignments = new_assign
        updated = centroids.copy()
        for ci in range(k):
            members = pts[assignments == ci]
            if len(members):
                updated[ci] = members.mean(axis=0)
        centroids = updated
        for ci in range(k):
            if not np.any(assignments == ci):
                # repair: move the empty centroid onto the point farthest
                # from its own centroid (keeps k clusters alive)
                dist = ((pts - centroids[assignments]) ** 2).sum(axis=1)
                centroids[ci] = pts[int(dist.argmax())]
        inertia = float(((pts - centroids[assignments]) ** 2).sum())
        trace.append(inertia)
        if inertia == 0.0:
            converged = True
            break
        if len(trace) >= 2 and (trace[-2] - inertia) / trace[-2] < tol:
            converged = True
            break
    inertia = float(((pts - centroids[assignments]) ** 2).sum())
    return ClusterModel(k, centroids, assignments, inertia, iterations,
                        seed, trace, converged)


def best_of_restarts(points, k: int, restarts: int = DEFAULT_RESTARTS,
                     max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
                     seed: int = 0) -> ClusterModel:
    """Minimum-inertia model over `restarts` runs seeded seed, seed+1, ...

    restarts=1 is exactly kmeans(seed). Ties keep the earliest run.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = None
    for i in range(restarts):
        model = kmeans(points, k, max_iter=max_iter, tol=tol, seed=seed + i)
        if best is None or model.inertia < best.inertia:
            best = model
    return best


def detect_anomalies(series: ActivitySeries, k: int = DEFAULT_K,
                     restarts: int = DEFAULT_RESTARTS,
                     zero_window: tuple[int, int] | None = None,
                     seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
                     tol: float = DEFAULT_TOL) -> AnomalyReport:
    """Label anomalous buckets of a 1-D activity series.

    HighActivityCluster: members of the highest-centroid cluster, only
    when that cluster also has strictly the fewest members (both halves
    of the rule must agree; otherwise nothing is flagged). Needs k >= 2
    to be meaningful. ZeroActivity: buckets with value 0 whose start
    hour falls inside zero_window = (start_hour, end_hour).
    """
    if len(series.values) < k:
        raise DegenerateInput("series shorter than k")
    model = best_of_restarts(series.values, k, restarts=restarts,
                             max_iter=max_iter, tol=tol, seed=seed)
    flagged: list[tuple[int, Reason]] = []
    anomalous_cluster = None
    if k >= 2:
        top = int(model.centroids[:, 0].argmax())
        counts = model.member_counts()
        others = np.delete(counts, top)
        if counts[top] < others.min():
            anomalous_cluster = top
            for i in np.flatnonzero(model.assignments == top):
                flagged.append((int(i), Reason.HIGH_ACTIVITY_CLUSTER))
    if zero_window is not None:
        lo, hi = zero_window
        for i, value in enumerate(series.values):
            if value == 0.0 and lo <= hour_of_day(series.bucket_start(i)) < hi:
                flagged.append((i, Reason.ZERO_ACTIVITY))
    flagged.sort(key=lambda pair: (pair[0], pair[1].value))
    return AnomalyReport(flagged, anomalous_cluster)


def write_report(report: AnomalyReport, series: ActivitySeries, fh: TextIO) -> None:
    fh.write("bucket_index,bucket_start_iso8601,value,reason\n")
    for index, reason in report.anomalous_buckets:
        fh.write(f"{index},{format_iso_utc(series.bucket_start(index))},"
                 f"{series.values[index]!r},{reason.value}\n")


def read_report(fh: TextIO) -> AnomalyReport:
    flagged: list[tuple[int, Reason]] = []
    for line_no, line in enumerate(fh):
        if line_no == 0 and line.startswith("bucket_index"):
            continue
        line = line.strip()
        if not line:
            continue
        index_tok, _ts, _value, reason_tok = line.split(",")
        flagged.append((int(index_tok), Reason(reason_tok)))
    return AnomalyReport(flagged)
