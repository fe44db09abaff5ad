"""Augmented Dickey-Fuller unit-root test with Monte Carlo p-values.

The regression is the constant-only variant,

    dy_t = alpha + gamma*y_{t-1} + sum_i beta_i*dy_{t-i} + e_t,

and the test statistic is the t-ratio of gamma. Because the statistic's
null distribution is nonstandard, p-values come from a surrogate
quantile table simulated under the unit-root null (shipped with the
package; rebuildable via build_adf_table), linearly interpolated in both
statistic and sample size.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Sequence, TextIO

import numpy as np

from ..errors import SingularRegression, TooShort

ALPHA = 0.05
_MIN_N = 20
_TABLE_RESOURCE = "adf_quantiles_v1.txt"

DEFAULT_TABLE_SIZES = (25, 50, 100, 250, 500, 1000, 2500)
DEFAULT_TABLE_PROBS = (
    0.001, 0.0025, 0.005, 0.0075, 0.01, 0.015, 0.02, 0.025, 0.03, 0.04,
    0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.125, 0.15, 0.175, 0.20, 0.25,
    0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80,
    0.85, 0.90, 0.925, 0.95, 0.975, 0.99, 0.995, 0.999,
)


class Regression(str, Enum):
    CONSTANT_ONLY = "ConstantOnly"


class Conclusion(str, Enum):
    STATIONARY = "Stationary"
    NON_STATIONARY = "NonStationary"


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    lags_used: int
    regression: Regression
    conclusion: Conclusion

    def summary(self) -> str:
        return (f"statistic: {self.statistic:.4f}\n"
                f"p_value: {self.p_value:.4f}\n"
                f"lags_used: {self.lags_used}\n"
                f"conclusion: {self.conclusion.value}")


@dataclass(frozen=True)
class AdfQuantileTable:
    probs: tuple[float, ...]
    sizes: tuple[int, ...]
    quantiles: tuple[tuple[float, ...], ...]  # one row per size
    seed: int
    replications: int
    version: str = "1"

    def _row(self, n: int) -> np.ndarray:
        sizes = np.asarray(self.sizes, dtype=float)
        quants = np.asarray(self.quantiles, dtype=float)
        if n <= sizes[0]:
            return quants[0]
        if n >= sizes[-1]:
            return quants[-1]
        hi = int(np.searchsorted(sizes, n))
        lo = hi - 1
        frac = (n - sizes[lo]) / (sizes[hi] - sizes[lo])
        return quants[lo] + frac * (quants[hi] - quants[lo])

    def p_value(self, statistic: float, n: int) -> float:
        """Probability mass of the null distribution below the statistic,
        clamped to the table's probability grid at the tails."""
        row = self._row(n)
        return float(np.interp(statistic, row, np.asarray(self.probs)))

    def critical_value(self, alpha: float, n: int) -> float:
        row = self._row(n)
        return float(np.interp(alpha, np.asarray(self.probs), row))


def schwert_lag_order(n: int) -> int:
    """floor(12*(n/100)^(1/4)), capped so the regression keeps >=10
    residual degrees of freedom."""
    rule = int(np.floor(12.0 * (n / 100.0) ** 0.25))
    cap = max(0, (n - 13) // 2)
    return max(0, min(rule, cap))


def df_statistic(y: np.ndarray, lags: int) -> float:
    """t-ratio of the level coefficient in the ADF regression."""
    dy = np.diff(y)
    nobs = len(dy) - lags
    k = 2 + lags
    if nobs <= k:
        raise TooShort(f"{len(y)} observations cannot support {lags} lags")
    rows = np.empty((nobs, k))
    rows[:, 0] = 1.0
    rows[:, 1] = y[lags:len(y) - 1]
    for i in range(1, lags + 1):
        rows[:, 1 + i] = dy[lags - i:len(dy) - i]
    resp = dy[lags:]
    xtx = rows.T @ rows
    try:
        xtx_inv = np.linalg.inv(xtx)
    except np.linalg.LinAlgError:
        raise SingularRegression("ADF regressor matrix is singular") from None
    beta = xtx_inv @ (rows.T @ resp)
    resid = resp - rows @ beta
    sigma2 = float(resid @ resid) / (nobs - k)
    se = np.sqrt(sigma2 * xtx_inv[1, 1])
    if se == 0.0 or not np.isfinite(se):
        raise SingularRegression("zero standard error for the level term")
    return float(beta[1] / se)


def adf_test(values: Sequence[float], max_lag: int | None = None,
             table: AdfQuantileTable | None = None) -> AdfResult:
    """Run the ADF unit-root test at alpha=0.05.

    The null hypothesis is that the series has a unit root; p <= 0.05
    rejects it and concludes Stationary. `max_lag` overrides the Schwert
    default lag order.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    if n < _MIN_N:
        raise TooShort(f"ADF test needs >= {_MIN_N} observations, got {n}")
    lags = schwert_lag_order(n) if max_lag is None else int(max_lag)
    if lags < 0:
        raise ValueError("max_lag must be >= 0")
    stat = df_statistic(y, lags)
    if table is None:
        table = default_table()
    p = table.p_value(stat, n)
    conclusion = Conclusion.STATIONARY if p <= ALPHA else Conclusion.NON_STATIONARY
    return AdfResult(stat, p, lags, Regression.CONSTANT_ONLY, conclusion)


def build_adf_table(sample_sizes: Sequence[int] = DEFAULT_TABLE_SIZES,
                    replications: int = 100_000, seed: int = 0,
                    probs: Sequence[float] = DEFAULT_TABLE_PROBS,
                    batch: int = 10_000) -> AdfQuantileTable:
    """Simulate the Dickey-Fuller t-statistic under the unit-root null and
    tabulate its quantiles per sample size.

    Each replication draws a pure random walk and runs the constant-only
    regression of dy on y_{t-1} (no augmentation lags; the augmented
    statistic shares the same null distribution asymptotically).
    """
    if replications < 10_000:
        raise ValueError("replications must be >= 10000 for a usable table")
    rng = np.random.default_rng(seed)
    rows = []
    for n in sample_sizes:
        stats = np.empty(replications)
        done = 0
        while done < replications:
            b = min(batch, replications - done)
            walks = rng.standard_normal((b, n)).cumsum(axis=1)
            stats[done:done + b] = _df_stat_batch(walks)
            done += b
        rows.append(tuple(float(q) for q in np.quantile(stats, probs)))
    return AdfQuantileTable(tuple(probs), tuple(int(n) for n in sample_sizes),
                            tuple(rows), seed, replications)


def _df_stat_batch(walks: np.ndarray) -> np.ndarray:
    """Vectorized constant-only DF t-statistic, one walk per row."""
    x = walks[:, :-1]
    dy = walks[:, 1:] - x
    nobs = x.shape[1]
    mx = x.mean(axis=1, keepdims=True)
    my = dy.mean(axis=1, keepdims=True)
    xc = x - mx
    sxx = (xc ** 2).sum(axis=1)
    gamma = (xc * (dy - my)).sum(axis=1) / sxx
    alpha = my[:, 0] - gamma * mx[:, 0]
    resid = dy - alpha[:, None] - gamma[:, None] * x
    sigma2 = (resid ** 2).sum(axis=1) / (nobs - 2)
    return gamma / np.sqrt(sigma2 / sxx)


def write_table(table: AdfQuantileTable, fh: TextIO) -> None:
    fh.write(f"# ADF surrogate quantile table v{table.version}\n")
    fh.write("# regression=constant-only statistic=t(gamma) null=unit-root\n")
    fh.write(f"seed {table.seed}\n")
    fh.write(f"replications {table.replications}\n")
    fh.write("probs " + " ".join(repr(p) for p in table.probs) + "\n")
    for size, row in zip(table.sizes, table.quantiles):
        fh.write(f"{size} " + " ".join(f"{q:.6f}" for q in row) + "\n")


def read_table(fh: TextIO) -> AdfQuantileTable:
    seed = replications = None
    probs: tuple[float, ...] | None = None
    sizes: list[int] = []
    rows: list[tuple[float, ...]] = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "seed":
            seed = int(tokens[1])
        elif tokens[0] == "replications":
            replications = int(tokens[1])
        elif tokens[0] == "probs":
            probs = tuple(float(t) for t in tokens[1:])
        else:
            sizes.append(int(tokens[0]))
            rows.append(tuple(float(t) for t in tokens[1:]))
    if probs is None or seed is None or replications is None or not rows:
        raise ValueError("malformed ADF quantile table")
    return AdfQuantileTable(probs, tuple(sizes), tuple(rows), seed, replications)


_DEFAULT_TABLE: AdfQuantileTable | None = None


def default_table() -> AdfQuantileTable:
    """The package's shipped quantile table (loaded once per process)."""
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        source = resources.files("cdrlab.data").joinpath(_TABLE_RESOURCE)
        with source.open("r", encoding="utf-8") as fh:
            _DEFAULT_TABLE = read_table(fh)
    return _DEFAULT_TABLE
