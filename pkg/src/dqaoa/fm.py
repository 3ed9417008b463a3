"""Factorization-machine surrogate and its exact QUBO mapping.

The model is second order:

    y(x) = w0 + sum_i w_i x_i
         + 1/2 sum_f [ (sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2 ]

which for binary inputs equals w0 + w.x + sum_{i<j} <v_i, v_j> x_i x_j,
so a trained model maps exactly onto a QUBO (upper triangle holds the
pairwise terms, the diagonal the linear ones, and w0 becomes a constant
offset that solvers can ignore).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .qubo import QuboMatrix, check_bits


@dataclass(frozen=True)
class FmModel:
    """Trained factorization-machine parameters."""

    w0: float
    w: np.ndarray   # (n,)
    v: np.ndarray   # (n, m)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        if w.ndim != 1 or v.ndim != 2 or v.shape[0] != w.size:
            raise ValueError("w must be (n,), v must be (n, m)")
        if w.size < 1 or v.shape[1] < 1:
            raise ValueError("need n >= 1 and m >= 1")
        if not (np.isfinite(self.w0) and np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
            raise ValueError("model parameters must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def m(self) -> int:
        return self.v.shape[1]


@dataclass
class Dataset:
    """(binary structure, observed value) pairs with a uniform bit width."""

    x: np.ndarray   # (rows, n) of 0/1
    y: np.ndarray   # (rows,)

    def __post_init__(self):
        x = np.asarray(self.x)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.size:
            raise ValueError("x must be (rows, n) and y (rows,)")
        if np.any((x != 0) & (x != 1)):
            raise ValueError("x entries must be 0 or 1")
        if not np.all(np.isfinite(y)):
            raise ValueError("y values must be finite")
        self.x = x.astype(np.int8)
        self.y = y

    @property
    def rows(self) -> int:
        return self.y.size

    @property
    def n(self) -> int:
        return self.x.shape[1]


def fm_predict(model: FmModel, x) -> float:
    """Evaluate the model on one binary input."""
    xb = check_bits(x, model.n).astype(np.float64)
    s = model.v.T @ xb                        # (m,)
    sq = (model.v ** 2).T @ (xb ** 2)         # (m,)
    return float(model.w0 + model.w @ xb + 0.5 * (s @ s - sq.sum()))


@dataclass(frozen=True)
class FmTrainConfig:
    """SGD hyperparameters for :func:`fm_train`."""

    lr: float = 0.01
    epochs: int = 500
    l2: float = 1e-4
    seed: int = 0
    init_scale: float = 0.01  # stdev of the latent-factor init
    test_fraction: float = 0.2  # 4:1 train/test split


def fm_train(
    data: Dataset, m: int, hp: FmTrainConfig = FmTrainConfig()
) -> tuple[FmModel, dict]:
    """Fit an FM by per-sample SGD on squared error.

    The dataset is shuffled with the seed and split 4:1 into train and
    test sets; both mean squared errors are returned. L2 decay applies
    to w and v but not the bias. Deterministic for a fixed seed.
    """
    if data.rows < 5:
        raise ValueError("need at least 5 rows to split train/test")
    if m < 1:
        raise ValueError("latent size m must be >= 1")
    rng = np.random.default_rng(hp.seed)
    order = rng.permutation(data.rows)
    n_test = max(1, int(round(data.rows * hp.test_fraction)))
    test_idx = order[:n_test]
    train_idx = order[n_test:]
    x_train = data.x[train_idx].astype(np.float64)
    y_train = data.y[train_idx]
    x_test = data.x[test_idx].astype(np.float64)
    y_test = data.y[test_idx]

    n = data.n
    w0 = 0.0
    w = np.zeros(n)
    v = rng.normal(0.0, hp.init_scale, size=(n, m))

    lr, l2 = hp.lr, hp.l2
    n_train = len(train_idx)
    for _ in range(hp.epochs):
        for idx in rng.permutation(n_train):
            xb = x_train[idx]
            s = v.T @ xb
            pred = w0 + w @ xb + 0.5 * (s @ s - ((v ** 2).T @ xb).sum())
            err = pred - y_train[idx]
            w0 -= lr * err
            w -= lr * (err * xb + l2 * w)
            # d pred / d v_if = x_i * (s_f - v_if x_i)
            grad_v = np.outer(xb, s) - v * xb[:, None]
            v -= lr * (err * grad_v + l2 * v)

    model = FmModel(w0=w0, w=w, v=v)
    metrics = {
        "train_mse": _mse(model, x_train, y_train),
        "test_mse": _mse(model, x_test, y_test),
    }
    return model, metrics


def _predict_batch(model: FmModel, x: np.ndarray) -> np.ndarray:
    s = x @ model.v                       # (rows, m)
    sq = (x ** 2) @ (model.v ** 2)        # (rows, m)
    return model.w0 + x @ model.w + 0.5 * (np.sum(s ** 2, axis=1) - np.sum(sq, axis=1))


def _mse(model: FmModel, x: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean((_predict_batch(model, x) - y) ** 2))


def fm_to_qubo(model: FmModel) -> tuple[QuboMatrix, float]:
    """Exact QUBO form of the model: returns (matrix, offset).

    For every binary x, ``energy(Q, x) + offset == fm_predict(model, x)``.
    The matrix is upper triangular; the offset is the global bias and is
    irrelevant to the argmin.
    """
    gram = model.v @ model.v.T
    q = np.triu(gram, k=1)
    np.fill_diagonal(q, model.w)
    return QuboMatrix(q), float(model.w0)


def save_fm_model(model: FmModel, path) -> None:
    payload = {
        "n": model.n,
        "m": model.m,
        "w0": model.w0,
        "w": model.w.tolist(),
        "v": model.v.tolist(),
    }
    Path(path).write_text(json.dumps(payload))


def load_fm_model(path) -> FmModel:
    try:
        payload = json.loads(Path(path).read_text())
        return FmModel(w0=float(payload["w0"]), w=np.asarray(payload["w"]),
                       v=np.asarray(payload["v"]))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: not a valid FM model file ({exc})") from exc


def save_dataset(data: Dataset, path) -> None:
    """CSV rows ``bits,y`` with bits as a 0/1 string."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bits", "y"])
        for row, y in zip(data.x, data.y):
            writer.writerow(["".join(str(int(b)) for b in row), repr(float(y))])


def load_dataset(path) -> Dataset:
    p = Path(path)
    if not p.exists():
        raise DataError(f"dataset file not found: {p}")
    xs, ys = [], []
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["bits", "y"]:
            raise DataError(f"{p}: line 1: expected header 'bits,y'")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise DataError(f"{p}: line {lineno}: expected 'bits,y'")
            bits, ytxt = row
            if not bits or any(c not in "01" for c in bits):
                raise DataError(f"{p}: line {lineno}: bits must be a 0/1 string")
            try:
                ys.append(float(ytxt))
            except ValueError as exc:
                raise DataError(f"{p}: line {lineno}: bad y value {ytxt!r}") from exc
            xs.append([int(c) for c in bits])
    if not xs:
        raise DataError(f"{p}: no data rows")
    widths = {len(r) for r in xs}
    if len(widths) != 1:
        raise DataError(f"{p}: inconsistent bit widths {sorted(widths)}")
    return Dataset(x=np.asarray(xs, dtype=np.int8), y=np.asarray(ys))
