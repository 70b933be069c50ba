"""Trainable binary logistic regression shared by all predictors.

Deliberately small: dense numpy gradient descent over the regularized
log-loss, deterministic for a given seed, and a versioned JSON file
format whose weights are stored as decimal strings (Python float repr
round-trips exactly, so save/load is bit-identical).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ModelIoError, NonFiniteFeature, SchemaMismatch, VersionMismatch

MODEL_FILE_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    seed: int = 42
    batch_size: int | None = None  # None = full batch


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    bias: float
    schema_id: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if not (np.all(np.isfinite(w)) and math.isfinite(self.bias)):
            raise NonFiniteFeature("model parameters must be finite")

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])


@dataclass
class LabeledDataset:
    x: np.ndarray  # (n, d)
    y: np.ndarray  # (n,) in {0, 1}
    schema_id: str

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[Sequence[float], int]], schema_id: str):
        x = np.asarray([r[0] for r in rows], dtype=np.float64)
        y = np.asarray([r[1] for r in rows], dtype=np.float64)
        return cls(x, y, schema_id)

    def validate(self) -> None:
        if self.x.ndim != 2 or len(self.x) == 0:
            raise ValueError("dataset must be a nonempty (n, d) matrix")
        if len(self.x) != len(self.y):
            raise ValueError("feature/label count mismatch")
        if not np.all(np.isfinite(self.x)):
            raise NonFiniteFeature("dataset contains non-finite features")
        if not np.all((self.y == 0) | (self.y == 1)):
            raise ValueError("labels must be 0 or 1")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -35.0, 35.0)))


def loss_and_grad(
    w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, float]:
    """Mean regularized log-loss and its analytic gradient.

    L = mean(softplus(z) - y*z) + (l2/2)*||w||^2 with z = xw + b;
    the bias is not regularized.
    """
    z = x @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * float(w @ w))
    residual = _sigmoid(z) - y
    grad_w = x.T @ residual / len(y) + l2 * w
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def train(
    data: LabeledDataset,
    cfg: TrainConfig = TrainConfig(),
    on_epoch=None,
) -> LogisticModel:
    """Fit by gradient descent; identical seeds give identical weights.

    Rows are reshuffled every epoch with the seeded generator and
    consumed in mini-batches (the default is one full batch).
    ``on_epoch(epoch, w, b)`` is invoked after each epoch when given.
    """
    data.validate()
    n, d = data.x.shape
    rng = np.random.default_rng(cfg.seed)
    w = np.zeros(d)
    b = 0.0
    batch = n if cfg.batch_size is None else max(1, min(cfg.batch_size, n))
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            _, gw, gb = loss_and_grad(w, b, data.x[idx], data.y[idx], cfg.l2)
            w = w - cfg.lr * gw
            b = b - cfg.lr * gb
        if on_epoch is not None:
            on_epoch(epoch, w, b)
    meta = {
        "n_rows": n,
        "epochs": cfg.epochs,
        "lr": cfg.lr,
        "l2": cfg.l2,
        "seed": cfg.seed,
        "batch_size": cfg.batch_size,
    }
    return LogisticModel(weights=w, bias=b, schema_id=data.schema_id, meta=meta)


def _check_schema(model: LogisticModel, schema_id: str, dim: int) -> None:
    if model.schema_id != schema_id:
        raise SchemaMismatch(f"model schema {model.schema_id!r} != features {schema_id!r}")
    if model.dim != dim:
        raise SchemaMismatch(f"model dim {model.dim} != feature dim {dim}")


def predict_prob(model: LogisticModel, features) -> float:
    """Probability for one feature vector.

    ``features`` is anything with ``vector`` and ``schema_id``
    attributes (FrameFeatures and friends).  The dot product accumulates
    sequentially rather than through BLAS so that logged probabilities
    are bit-reproducible across platforms.
    """
    vec = features.vector
    _check_schema(model, features.schema_id, len(vec))
    z = model.bias
    for w, x in zip(model.weights.tolist(), vec):
        if not math.isfinite(x):
            raise NonFiniteFeature("feature vector contains non-finite values")
        z += w * x
    z = min(35.0, max(-35.0, z))
    return 1.0 / (1.0 + math.exp(-z))


def predict_prob_matrix(model: LogisticModel, x: np.ndarray, schema_id: str) -> np.ndarray:
    _check_schema(model, schema_id, x.shape[1])
    return _sigmoid(x @ model.weights + model.bias)


def save(model: LogisticModel, path) -> None:
    doc = {
        "version": MODEL_FILE_VERSION,
        "schema_id": model.schema_id,
        "bias": repr(float(model.bias)),
        "weights": [repr(float(v)) for v in model.weights],
        "meta": model.meta,
    }
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fp:
            json.dump(doc, fp, indent=1)
            fp.write("\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise ModelIoError(f"cannot write model file {path}: {exc}") from exc


def load(path) -> LogisticModel:
    try:
        with open(path, encoding="utf-8") as fp:
            doc = json.load(fp)
    except OSError as exc:
        raise ModelIoError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelIoError(f"corrupt model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != MODEL_FILE_VERSION:
        raise VersionMismatch(f"unsupported model file version in {path}")
    try:
        weights = np.asarray([float(v) for v in doc["weights"]], dtype=np.float64)
        bias = float(doc["bias"])
        schema_id = str(doc["schema_id"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelIoError(f"malformed model file {path}: {exc}") from exc
    return LogisticModel(weights=weights, bias=bias, schema_id=schema_id, meta=doc.get("meta", {}))
