"""Small feed-forward network used to measure how anomalous buckets
degrade training, by fitting the same next-bucket regression on raw and
scrubbed versions of a series and comparing test MSE.

One hidden tanh layer, linear output, full-batch gradient descent on
MSE. Everything is deterministic for a given seed so the raw/clean
comparison isolates the data, not the optimizer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyInput, LengthMismatch, NonFinite, TooShort
from .scrub import ScrubbedSeries
from .series import ActivitySeries


@dataclass(frozen=True)
class SupervisedSet:
    """Sliding-window regression set: inputs[i] = series[i:i+w],
    targets[i] = series[i+w]."""

    inputs: np.ndarray   # (rows, w)
    targets: np.ndarray  # (rows,)
    w: int


@dataclass
class TrainConfig:
    hidden: int = 10
    epochs: int = 500
    learning_rate: float = 0.05
    seed: int = 0
    patience: int = 50
    train_fraction: float = 0.70
    val_fraction: float = 0.15


@dataclass
class MlpModel:
    w: int
    hidden: int
    w1: np.ndarray      # (w, hidden)
    b1: np.ndarray      # (hidden,)
    w2: np.ndarray      # (hidden,)
    b2: float
    in_min: np.ndarray  # per-feature, from the training split
    in_max: np.ndarray
    t_min: float
    t_max: float

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        x = normalize(inputs, self.in_min, self.in_max)
        hidden = np.tanh(x @ self.w1 + self.b1)
        out = hidden @ self.w2 + self.b2
        return out * _span(self.t_max - self.t_min) + self.t_min


def make_supervised(values: Sequence[float] | ActivitySeries, w: int) -> SupervisedSet:
    if isinstance(values, ActivitySeries):
        values = values.values
    data = np.asarray(values, dtype=float)
    if w < 1:
        raise ValueError("window w must be >= 1")
    if len(data) <= w:
        raise TooShort(f"need more than w={w} values, got {len(data)}")
    rows = len(data) - w
    inputs = np.stack([data[i:i + w] for i in range(rows)])
    targets = data[w:].copy()
    return SupervisedSet(inputs, targets, w)


def mse(pred: Sequence[float], actual: Sequence[float]) -> float:
    p = np.asarray(pred, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape:
        raise LengthMismatch(f"{p.shape} vs {a.shape}")
    if p.size == 0:
        raise EmptyInput("mse of empty vectors")
    return float(np.mean((p - a) ** 2))


def _span(width: float) -> float:
    return width if width != 0.0 else 1.0


def normalize(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return (x - lo) / np.where(hi - lo == 0.0, 1.0, hi - lo)


def denormalize(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return x * np.where(hi - lo == 0.0, 1.0, hi - lo) + lo


def init_params(w: int, hidden: int, seed: int) -> np.ndarray:
    """Flat parameter vector [W1, b1, w2, b2], Xavier-uniform weights."""
    rng = np.random.default_rng(seed)
    r1 = np.sqrt(6.0 / (w + hidden))
    r2 = np.sqrt(6.0 / (hidden + 1))
    w1 = rng.uniform(-r1, r1, size=(w, hidden))
    w2 = rng.uniform(-r2, r2, size=hidden)
    return np.concatenate([w1.ravel(), np.zeros(hidden), w2, [0.0]])


def unpack(theta: np.ndarray, w: int, hidden: int):
    w1 = theta[:w * hidden].reshape(w, hidden)
    b1 = theta[w * hidden:w * hidden + hidden]
    w2 = theta[w * hidden + hidden:w * hidden + 2 * hidden]
    b2 = theta[-1]
    return w1, b1, w2, b2


def forward(theta: np.ndarray, x: np.ndarray, w: int, hidden: int) -> np.ndarray:
    w1, b1, w2, b2 = unpack(theta, w, hidden)
    return np.tanh(x @ w1 + b1) @ w2 + b2


def loss_and_gradient(theta: np.ndarray, x: np.ndarray, y: np.ndarray,
                      w: int, hidden: int) -> tuple[float, np.ndarray]:
    """MSE loss and its full-batch backpropagated gradient, as a flat
    vector matching theta's layout."""
    w1, b1, w2, b2 = unpack(theta, w, hidden)
    z1 = x @ w1 + b1
    a1 = np.tanh(z1)
    out = a1 @ w2 + b2
    resid = out - y
    n = len(y)
    loss = float(np.mean(resid ** 2))
    dout = 2.0 * resid / n
    g_b2 = float(dout.sum())
    g_w2 = a1.T @ dout
    da1 = np.outer(dout, w2)
    dz1 = da1 * (1.0 - a1 ** 2)
    g_w1 = x.T @ dz1
    g_b1 = dz1.sum(axis=0)
    grad = np.concatenate([g_w1.ravel(), g_b1, g_w2, [g_b2]])
    return loss, grad


@dataclass
class FitReport:
    mse_train: float
    mse_val: float
    mse_test: float
    best_epoch: int
    curve: list[tuple[float, float]] = field(default_factory=list)

    def write_csv(self, fh) -> None:
        fh.write("epoch,mse_train,mse_val\n")
        for epoch, (tr, va) in enumerate(self.curve, start=1):
            fh.write(f"{epoch},{tr!r},{va!r}\n")
        fh.write(f"# best_epoch={self.best_epoch} mse_train={self.mse_train!r} "
                 f"mse_val={self.mse_val!r} mse_test={self.mse_test!r}\n")


def _three_way_split(n: int, cfg: TrainConfig) -> tuple[slice, slice, slice]:
    n_train = int(n * cfg.train_fraction)
    n_val = int(n * cfg.val_fraction)
    n_test = n - n_train - n_val
    if n_train < 1 or n_val < 1 or n_test < 1:
        raise TooShort(f"{n} rows cannot fill a "
                       f"{cfg.train_fraction:.0%}/{cfg.val_fraction:.0%} split")
    return (slice(0, n_train), slice(n_train, n_train + n_val),
            slice(n_train + n_val, n))


def train(sset: SupervisedSet, cfg: TrainConfig) -> tuple[MlpModel, FitReport]:
    """Fit the network by full-batch gradient descent with early stopping
    on validation MSE.

    Rows are split chronologically train/val/test; inputs and targets are
    min-max normalized by training-split statistics only. Reported MSEs
    are in original (denormalized) units, and the returned model carries
    the parameters of the best validation epoch.
    """
    tr, va, te = _three_way_split(len(sset.targets), cfg)
    x_raw, y_raw = sset.inputs, sset.targets
    in_min = x_raw[tr].min(axis=0)
    in_max = x_raw[tr].max(axis=0)
    t_min = float(y_raw[tr].min())
    t_max = float(y_raw[tr].max())
    x = normalize(x_raw, in_min, in_max)
    y = normalize(y_raw, t_min, t_max)
    t_scale = _span(t_max - t_min)

    theta = init_params(sset.w, cfg.hidden, cfg.seed)
    best_theta = theta.copy()
    best_val = np.inf
    best_epoch = 0
    curve: list[tuple[float, float]] = []

    def denorm_mse(split: slice, params: np.ndarray) -> float:
        pred = forward(params, x[split], sset.w, cfg.hidden) * t_scale + t_min
        return float(np.mean((pred - y_raw[split]) ** 2))

    for epoch in range(1, cfg.epochs + 1):
        loss, grad = loss_and_gradient(theta, x[tr], y[tr], sset.w, cfg.hidden)
        if not np.isfinite(loss):
            raise NonFinite(f"training loss diverged at epoch {epoch}")
        theta = theta - cfg.learning_rate * grad
        if not np.all(np.isfinite(theta)):
            raise NonFinite(f"parameters diverged at epoch {epoch}")
        mse_tr = denorm_mse(tr, theta)
        mse_va = denorm_mse(va, theta)
        curve.append((mse_tr, mse_va))
        if mse_va < best_val:
            best_val = mse_va
            best_epoch = epoch
            best_theta = theta.copy()
        elif epoch - best_epoch >= cfg.patience:
            break

    w1, b1, w2, b2 = unpack(best_theta, sset.w, cfg.hidden)
    model = MlpModel(sset.w, cfg.hidden, w1.copy(), b1.copy(), w2.copy(),
                     float(b2), in_min, in_max, t_min, t_max)
    report = FitReport(
        mse_train=curve[best_epoch - 1][0],
        mse_val=curve[best_epoch - 1][1],
        mse_test=denorm_mse(te, best_theta),
        best_epoch=best_epoch,
        curve=curve,
    )
    return model, report


def compare_anomaly_effect(raw: ActivitySeries,
                           scrubbed: ScrubbedSeries | ActivitySeries,
                           w: int, cfg: TrainConfig) -> tuple[FitReport, FitReport]:
    """Train identical models on the raw and the scrubbed series and
    return both reports for side-by-side emission."""
    _, report_raw = train(make_supervised(raw.values, w), cfg)
    _, report_clean = train(make_supervised(scrubbed.values, w), cfg)
    return report_raw, report_clean
