"""ARIMA estimation by conditional sum of squares, plus forecasting.

The model for the d-differenced series z is

    z_t = c + sum_i phi_i*z_{t-i} + eps_t + sum_j theta_j*eps_{t-j}

with innovations eps computed recursively, conditioning on the first p
observations and zeroing pre-sample innovations. Estimation minimizes
the mean squared innovation by gradient descent with a backtracking
line search from five deterministic starts (all-zero coefficients plus
the four +-0.3 sign combinations on phi/theta). Full maximum likelihood
is deliberately out of scope: CSS is adequate at these sample sizes.

The inner recursions are numba-compiled; they run thousands of times
per fit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np
from numba import njit

from ..errors import TooShort
from .order import ArimaSpec

MAX_ITER = 500
GRAD_TOL = 1e-8
_ARMIJO = 1e-4
_MIN_STEP = 1e-18

WARN_NON_CONVERGENCE = "non_convergence"
WARN_NON_STATIONARY_AR = "non_stationary_ar_roots"
WARN_NON_INVERTIBLE_MA = "non_invertible_ma_roots"


@dataclass
class ArimaModel:
    spec: ArimaSpec
    c: float
    phi: np.ndarray
    theta: np.ndarray
    sigma2: float
    residuals: np.ndarray
    converged: bool = True
    warnings: list[str] = field(default_factory=list)


@njit(cache=True)
def _innovations(z, c, phi, theta):
    n = z.shape[0]
    p = phi.shape[0]
    q = theta.shape[0]
    eps = np.zeros(n)
    for t in range(p, n):
        e = z[t] - c
        for i in range(p):
            e -= phi[i] * z[t - 1 - i]
        for j in range(q):
            s = t - 1 - j
            if s >= 0:
                e -= theta[j] * eps[s]
        eps[t] = e
    return eps


@njit(cache=True)
def _css_loss_grad(z, params, p, q):
    """Mean squared innovation and its gradient w.r.t. [c, phi, theta].

    The gradient recursion mirrors the innovation recursion: each
    d(eps_t)/d(param) feeds back through the theta terms.
    """
    n = z.shape[0]
    m = n - p
    n_params = 1 + p + q
    c = params[0]
    eps = np.zeros(n)
    deps = np.zeros((n, n_params))
    loss = 0.0
    grad = np.zeros(n_params)
    for t in range(p, n):
        e = z[t] - c
        for i in range(p):
            e -= params[1 + i] * z[t - 1 - i]
        for j in range(q):
            s = t - 1 - j
            if s >= 0:
                e -= params[1 + p + j] * eps[s]
        eps[t] = e
        for comp in range(n_params):
            if comp == 0:
                v = -1.0
            elif comp <= p:
                v = -z[t - comp]
            else:
                s0 = t - 1 - (comp - 1 - p)
                v = -eps[s0] if s0 >= 0 else 0.0
            for l in range(q):
                s = t - 1 - l
                if s >= 0:
                    v -= params[1 + p + l] * deps[s, comp]
            deps[t, comp] = v
            grad[comp] += 2.0 * e * v
        loss += e * e
    return loss / m, grad / m


def css_objective(z: np.ndarray, params: np.ndarray, p: int, q: int
                  ) -> tuple[float, np.ndarray]:
    """Public wrapper over the compiled CSS loss/gradient kernel."""
    z = np.ascontiguousarray(z, dtype=float)
    params = np.ascontiguousarray(params, dtype=float)
    return _css_loss_grad(z, params, p, q)


def _gradient_descent(z: np.ndarray, p: int, q: int, x0: np.ndarray,
                      max_iter: int, gtol: float) -> tuple[np.ndarray, float, bool]:
    """Steepest descent with an Armijo backtracking line search.

    The trial step is the Barzilai-Borwein length from the last accepted
    move (plain fixed-step descent zigzags badly on these surfaces);
    backtracking keeps every accepted step a strict decrease.
    """
    x = x0.copy()
    f, g = _css_loss_grad(z, x, p, q)
    step = 1.0
    prev_x = prev_g = None
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= gtol * (1.0 + abs(f)):
            return x, f, True
        if prev_x is not None:
            s = x - prev_x
            yv = g - prev_g
            sy = float(s @ yv)
            step = float(s @ s) / sy if sy > 0 else step * 2.0
        step = float(np.clip(step, _MIN_STEP, 1e6))
        g2 = float(g @ g)
        while step >= _MIN_STEP:
            x_new = x - step * g
            f_new, g_new = _css_loss_grad(z, x_new, p, q)
            if np.isfinite(f_new) and f_new <= f - _ARMIJO * step * g2:
                break
            step *= 0.5
        else:
            return x, f, False
        prev_x, prev_g = x, g
        x, f, g = x_new, f_new, g_new
    return x, f, bool(np.max(np.abs(g)) <= gtol * (1.0 + abs(f)))


def _starts(z: np.ndarray, p: int, q: int) -> list[np.ndarray]:
    zbar = float(z.mean())
    offsets = [(0.0, 0.0), (0.3, 0.3), (-0.3, -0.3), (0.3, -0.3), (-0.3, 0.3)]
    starts: list[np.ndarray] = []
    for dphi, dtheta in offsets:
        phi = np.full(p, dphi)
        theta = np.full(q, dtheta)
        c = zbar * (1.0 - phi.sum())
        cand = np.concatenate([[c], phi, theta])
        if not any(np.array_equal(cand, s) for s in starts):
            starts.append(cand)
    return starts


def _root_warnings(phi: np.ndarray, theta: np.ndarray) -> list[str]:
    notes = []
    if len(phi):
        ar_poly = np.concatenate([-phi[::-1], [1.0]])
        if np.min(np.abs(np.roots(ar_poly))) <= 1.0:
            notes.append(WARN_NON_STATIONARY_AR)
    if len(theta):
        ma_poly = np.concatenate([theta[::-1], [1.0]])
        roots = np.roots(ma_poly)
        if len(roots) and np.min(np.abs(roots)) < 1.0:
            notes.append(WARN_NON_INVERTIBLE_MA)
    return notes


def fit(values: Sequence[float], spec: ArimaSpec, max_iter: int = MAX_ITER,
        gtol: float = GRAD_TOL) -> ArimaModel:
    """Fit an ARIMA(p,d,q) model by conditional sum of squares.

    Requires at least p+q+d+2 observations (10*(p+q+1) recommended for
    stable estimates). (0,d,0) degenerates to pure differencing: no free
    parameters, residuals are the differences themselves. A fit that
    stops on the iteration cap keeps its best iterate and carries a
    non-convergence warning rather than failing. The differenced series
    is standardized internally before optimization and the intercept is
    mapped back exactly.
    """
    y = np.asarray(values, dtype=float)
    p, d, q = spec.p, spec.d, spec.q
    minimum = p + q + d + 2
    if len(y) < minimum:
        raise TooShort(f"ARIMA{spec} needs >= {minimum} observations, "
                       f"got {len(y)}")
    z = np.ascontiguousarray(np.diff(y, n=d) if d else y, dtype=float)

    if p + q == 0:
        residuals = z.copy()
        sigma2 = float(np.mean(residuals ** 2))
        return ArimaModel(spec, 0.0, np.zeros(0), np.zeros(0), sigma2,
                          residuals)

    # optimize on the standardized series: phi and theta are invariant
    # under affine rescaling, and gradient descent conditioning is
    # hopeless when the raw mean dwarfs the spread
    mu = float(z.mean())
    scale = float(z.std()) or 1.0
    zs = np.ascontiguousarray((z - mu) / scale)

    best_x = best_f = None
    best_converged = False
    for x0 in _starts(zs, p, q):
        x, f, converged = _gradient_descent(zs, p, q, x0, max_iter, gtol)
        if best_f is None or f < best_f:
            best_x, best_f, best_converged = x, f, converged
    phi = best_x[1:1 + p].copy()
    theta = best_x[1 + p:].copy()
    c = float(scale * best_x[0] + mu * (1.0 - phi.sum()))
    eps = _innovations(z, c, phi, theta)
    residuals = eps[p:]
    sigma2 = float(np.mean(residuals ** 2))
    warnings = _root_warnings(phi, theta)
    if not best_converged:
        warnings.append(WARN_NON_CONVERGENCE)
    return ArimaModel(spec, c, phi, theta, sigma2, residuals,
                      best_converged, warnings)


def forecast(model: ArimaModel, history: Sequence[float], horizon: int
             ) -> list[float]:
    """Forecast `horizon` values past the end of `history`.

    Future innovations take their expectation (zero); AR terms consume
    earlier forecasts as the recursion walks forward. With d > 0 the
    recursion runs on the differenced series and the result is
    integrated back to original units using the tail of the history.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    y = np.asarray(history, dtype=float)
    p, d, q = model.spec.p, model.spec.d, model.spec.q
    if len(y) < p + d:
        raise TooShort(f"need at least p+d={p + d} history values, "
                       f"got {len(y)}")
    lasts = []
    level = y
    for _ in range(d):
        lasts.append(float(level[-1]))
        level = np.diff(level)
    z = list(np.ascontiguousarray(level, dtype=float))
    eps = list(_innovations(np.asarray(z), model.c, model.phi, model.theta)) \
        if (q and z) else [0.0] * len(z)
    forecasts_z: list[float] = []
    for _ in range(horizon):
        t_next = len(z)
        value = model.c
        for i in range(1, p + 1):
            value += model.phi[i - 1] * z[t_next - i]
        for j in range(1, q + 1):
            s = t_next - j
            if s >= 0:
                value += model.theta[j - 1] * eps[s]
        z.append(value)
        eps.append(0.0)
        forecasts_z.append(value)
    out = forecasts_z
    for level_idx in range(d - 1, -1, -1):
        acc = lasts[level_idx]
        integrated = []
        for delta in out:
            acc += delta
            integrated.append(acc)
        out = integrated
    return [float(v) for v in out]


def evaluate(model: ArimaModel, train: Sequence[float], test: Sequence[float]
             ) -> dict[str, float]:
    """Rolling one-step-ahead errors over the test span with parameters
    held fixed; each step's actual value joins the history."""
    history = [float(v) for v in train]
    errors = []
    for actual in test:
        pred = forecast(model, history, 1)[0]
        errors.append(float(actual) - pred)
        history.append(float(actual))
    err = np.asarray(errors)
    return {"mse": float(np.mean(err ** 2)), "mae": float(np.mean(np.abs(err)))}


def simulate_arma(n: int, phi: Sequence[float] = (), theta: Sequence[float] = (),
                  c: float = 0.0, sigma: float = 1.0, seed: int = 0,
                  burnin: int = 200) -> np.ndarray:
    """Generate an ARMA sample path (burn-in dropped); used by tests and
    the documentation examples."""
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    rng = np.random.default_rng(seed)
    total = n + burnin
    eps = rng.normal(0.0, sigma, size=total)
    y = np.zeros(total)
    for t in range(total):
        value = c + eps[t]
        for i in range(len(phi)):
            if t - 1 - i >= 0:
                value += phi[i] * y[t - 1 - i]
        for j in range(len(theta)):
            if t - 1 - j >= 0:
                value += theta[j] * eps[t - 1 - j]
        y[t] = value
    return y[burnin:]


def model_to_json(model: ArimaModel, fh: TextIO) -> None:
    payload = {
        "p": model.spec.p,
        "d": model.spec.d,
        "q": model.spec.q,
        "c": model.c,
        "phi": [float(v) for v in model.phi],
        "theta": [float(v) for v in model.theta],
        "sigma2": model.sigma2,
        "converged": model.converged,
        "warnings": list(model.warnings),
    }
    json.dump(payload, fh, indent=2, sort_keys=True)
    fh.write("\n")


def model_from_json(fh: TextIO) -> ArimaModel:
    payload = json.load(fh)
    spec = ArimaSpec(payload["p"], payload["d"], payload["q"])
    return ArimaModel(
        spec, float(payload["c"]),
        np.asarray(payload["phi"], dtype=float),
        np.asarray(payload["theta"], dtype=float),
        float(payload["sigma2"]), np.zeros(0),
        bool(payload.get("converged", True)),
        list(payload.get("warnings", [])),
    )
