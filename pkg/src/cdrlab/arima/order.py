"""ARIMA order suggestion from the correlogram cut-off heuristic.

An AR signature is a PACF that goes quiet right after some early lag
while the ACF keeps trailing; an MA signature is the mirror image. The
cut-off search looks for the smallest lag whose spike exceeds the
confidence bound while the following run of lags stays quiet. When both
correlograms show a cut-off, the sharper (earlier) one wins and the
model is treated as pure AR or pure MA; equal cut-offs keep both terms.
Nothing significant anywhere falls back to (1, d, 1).

The result is a suggestion: the CLI always accepts an explicit order.
"""
from __future__ import annotations

from dataclasses import dataclass

from .correlogram import AcfResult, PacfResult

MAX_SUGGESTED_ORDER = 10
QUIET_RUN = 3
# quiet lags are judged against a slightly widened bound: sampling noise
# sits above 1.96/sqrt(n) for MA-type series (Bartlett variance), and a
# run of 3 strict checks would misread a clean cut-off too often
QUIET_FACTOR = 1.5


@dataclass(frozen=True)
class ArimaSpec:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.d < 0 or self.q < 0:
            raise ValueError("orders must be non-negative")
        if self.p + self.q == 0 and self.d == 0:
            raise ValueError("need p + q >= 1 or d >= 1")

    def __str__(self) -> str:
        return f"({self.p},{self.d},{self.q})"


def _cutoff_lag(values: tuple[float, ...], conf_bound: float) -> int | None:
    """Smallest lag k with |values[k]| > conf_bound followed by QUIET_RUN
    lags inside the widened bound; None when no such pattern exists."""
    quiet = QUIET_FACTOR * conf_bound
    limit = min(MAX_SUGGESTED_ORDER, len(values) - 1 - QUIET_RUN)
    for k in range(1, limit + 1):
        if abs(values[k]) <= conf_bound:
            continue
        run = values[k + 1:k + 1 + QUIET_RUN]
        if all(abs(v) <= quiet for v in run):
            return k
    return None


def suggest_order(acf_res: AcfResult, pacf_res: PacfResult, d: int) -> ArimaSpec:
    """Suggest (p, d, q) from correlograms of the d-differenced series."""
    p_cut = _cutoff_lag(pacf_res.values, pacf_res.conf_bound)
    q_cut = _cutoff_lag(acf_res.values, acf_res.conf_bound)
    if p_cut is None and q_cut is None:
        return ArimaSpec(1, d, 1)
    if p_cut is None:
        return ArimaSpec(0, d, q_cut)
    if q_cut is None:
        return ArimaSpec(p_cut, d, 0)
    if p_cut < q_cut:
        return ArimaSpec(p_cut, d, 0)
    if q_cut < p_cut:
        return ArimaSpec(0, d, q_cut)
    return ArimaSpec(p_cut, d, q_cut)
