"""Sample autocorrelation and partial autocorrelation.

The ACF uses the 1/n (biased) normalization, which keeps the estimated
autocorrelation sequence positive semidefinite and therefore keeps the
Durbin-Levinson recursion for the PACF stable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import NumericalBreakdown, TooShort, ZeroVariance

_DL_DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class AcfResult:
    max_lag: int
    values: tuple[float, ...]  # lags 0..max_lag; values[0] == 1
    n: int
    conf_bound: float          # +-1.96/sqrt(n)


@dataclass(frozen=True)
class PacfResult:
    max_lag: int
    values: tuple[float, ...]  # lags 0..max_lag; values[0] == 1 by convention
    n: int
    conf_bound: float


def default_max_lag(n: int) -> int:
    """min(50, n // 4): correlogram displays are capped at 50 lags."""
    return max(1, min(50, n // 4))


def acf(values: Sequence[float], max_lag: int) -> AcfResult:
    y = np.asarray(values, dtype=float)
    n = len(y)
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if n <= max_lag:
        raise TooShort(f"need more than {max_lag} observations, got {n}")
    centered = y - y.mean()
    c0 = float(np.dot(centered, centered)) / n
    if c0 == 0.0:
        raise ZeroVariance("constant series has no autocorrelation")
    out = [1.0]
    for lag in range(1, max_lag + 1):
        ck = float(np.dot(centered[lag:], centered[:-lag])) / n
        out.append(ck / c0)
    return AcfResult(max_lag, tuple(out), n, float(1.96 / np.sqrt(n)))


def pacf_from_acf(r: Sequence[float], max_lag: int) -> list[float]:
    """Durbin-Levinson recursion on an autocorrelation sequence
    r[0..max_lag]; returns partial autocorrelations for lags 1..max_lag."""
    phi_prev = np.zeros(0)
    out = []
    for k in range(1, max_lag + 1):
        if k == 1:
            phi_kk = r[1]
            phi_curr = np.array([phi_kk])
        else:
            num = r[k] - float(np.dot(phi_prev, [r[k - j] for j in range(1, k)]))
            den = 1.0 - float(np.dot(phi_prev, [r[j] for j in range(1, k)]))
            if abs(den) < _DL_DENOM_FLOOR:
                raise NumericalBreakdown(
                    f"Durbin-Levinson denominator {den!r} at lag {k}")
            phi_kk = num / den
            phi_curr = np.empty(k)
            phi_curr[:k - 1] = phi_prev - phi_kk * phi_prev[::-1]
            phi_curr[k - 1] = phi_kk
        out.append(float(phi_kk))
        phi_prev = phi_curr
    return out


def pacf(values: Sequence[float], max_lag: int) -> PacfResult:
    res = acf(values, max_lag)
    partials = pacf_from_acf(res.values, max_lag)
    return PacfResult(max_lag, (1.0, *partials), res.n, res.conf_bound)
