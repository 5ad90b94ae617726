"""Weighted binary classifier over fixed embedding vectors.

A two-layer perceptron (tanh hidden layer, sigmoid output) trained by
mini-batch Adam on a weighted cross-entropy loss.  Everything is plain
numpy with analytic gradients: training must be bit-reproducible under a
fixed seed, and the gradients are checked against finite differences in
the test suite.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from trendweight.metrics import compute_metrics

logger = logging.getLogger(__name__)

LOGIT_CLIP = 30.0  # keeps sigmoid output strictly inside (0, 1) in float64
LOG_FLOOR = 1e-12

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 5
    seed: int = 0
    hidden: int = 128

    def __post_init__(self):
        for name in ("learning_rate", "batch_size", "max_epochs", "patience", "hidden"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ClassifierParams:
    w1: np.ndarray  # (dim, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float

    @property
    def dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), float(self.b2))


def init_params(dim: int, hidden: int, rng: np.random.Generator) -> ClassifierParams:
    """Seeded scaled-normal initialization, biases zero."""
    return ClassifierParams(
        w1=rng.standard_normal((dim, hidden)) / np.sqrt(dim),
        b1=np.zeros(hidden),
        w2=rng.standard_normal(hidden) / np.sqrt(hidden),
        b2=0.0,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -LOGIT_CLIP, LOGIT_CLIP)))


def _forward(params: ClassifierParams, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a1 = np.tanh(X @ params.w1 + params.b1)
    p = _sigmoid(a1 @ params.w2 + params.b2)
    return p, a1


def predict_proba(params: ClassifierParams, X: np.ndarray) -> np.ndarray:
    """Fake-news probabilities for a batch of embeddings."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.dim:
        raise ValueError(f"expected batch of dim-{params.dim} embeddings, got shape {X.shape}")
    p, _ = _forward(params, X)
    return p


def predict(params: ClassifierParams, embedding: np.ndarray) -> float:
    """Probability that a single instance is fake."""
    embedding = np.asarray(embedding, dtype=np.float64)
    if embedding.shape != (params.dim,):
        raise ValueError(f"embedding shape {embedding.shape} does not match dim {params.dim}")
    return float(predict_proba(params, embedding[None, :])[0])


def _cross_entropy(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    return -(y * np.log(np.maximum(p, LOG_FLOOR)) + (1 - y) * np.log(np.maximum(1 - p, LOG_FLOOR)))


def weighted_loss(
    params: ClassifierParams, X: np.ndarray, y: np.ndarray, w: np.ndarray | None = None
) -> float:
    """Weighted mean cross-entropy: (1/N) sum_i w_i * CE(y_i, p_i)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(X) == 0:
        raise ValueError("weighted_loss needs a nonempty batch")
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=np.float64)
    if np.any(w <= 0):
        raise ValueError("instance weights must be positive")
    p, _ = _forward(params, X)
    return float(np.mean(w * _cross_entropy(p, y)))


def loss_and_grads(
    params: ClassifierParams, X: np.ndarray, y: np.ndarray, w: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss plus analytic gradients for every parameter array."""
    n = len(X)
    p, a1 = _forward(params, X)
    loss = float(np.mean(w * _cross_entropy(p, y)))
    dz2 = w * (p - y) / n  # d loss / d logit
    dz1 = np.outer(dz2, params.w2) * (1 - a1**2)
    grads = {
        "w1": X.T @ dz1,
        "b1": dz1.sum(axis=0),
        "w2": a1.T @ dz2,
        "b2": np.array(dz2.sum()),
    }
    return loss, grads


class _Adam:
    """Adaptive moment estimation with the standard defaults."""

    def __init__(self, lr: float):
        self.lr = lr
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: ClassifierParams, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for name, g in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(g, dtype=np.float64)
                self.v[name] = np.zeros_like(g, dtype=np.float64)
            self.m[name] = ADAM_BETA1 * self.m[name] + (1 - ADAM_BETA1) * g
            self.v[name] = ADAM_BETA2 * self.v[name] + (1 - ADAM_BETA2) * g**2
            mhat = self.m[name] / (1 - ADAM_BETA1**self.t)
            vhat = self.v[name] / (1 - ADAM_BETA2**self.t)
            update = self.lr * mhat / (np.sqrt(vhat) + ADAM_EPS)
            if name == "b2":
                params.b2 = float(params.b2 - update)
            else:
                cur = getattr(params, name)
                setattr(params, name, cur - update)


@dataclass
class LogRow:
    epoch: int
    train_loss: float
    val_macro_f1: float


@dataclass
class TrainResult:
    params: ClassifierParams
    log: list[LogRow] = field(default_factory=list)
    best_epoch: int = 0
    best_val_macro_f1: float = 0.0


def train(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    config: TrainConfig,
    weights: np.ndarray | None = None,
    batch_guard=None,
) -> TrainResult:
    """Mini-batch Adam on the weighted loss with early stopping.

    After each epoch the validation macro-F1 (decision threshold 0.5) is
    computed; training stops once it has not improved for ``patience``
    epochs, and the best-scoring parameters are returned.  With
    ``weights=None`` every instance weighs 1, which makes the loss the
    plain mean cross-entropy.  ``batch_guard``, when given, is called with
    the instance indices of every batch before it is used; the rolling
    harness uses it to assert temporal hygiene.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    X_val = np.asarray(X_val, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.int64)
    if len(X_train) == 0 or len(X_val) == 0:
        raise ValueError("training and validation sets must be nonempty")
    w = np.ones(len(y_train)) if weights is None else np.asarray(weights, dtype=np.float64)
    if len(w) != len(y_train):
        raise ValueError(f"{len(y_train)} training instances but {len(w)} weights")
    if np.any(w <= 0):
        raise ValueError("instance weights must be positive")

    rng = np.random.default_rng(config.seed)
    params = init_params(X_train.shape[1], config.hidden, rng)
    optimizer = _Adam(config.learning_rate)

    result = TrainResult(params=params.copy())
    best = -np.inf
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(X_train))
        batch_losses = []
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            if batch_guard is not None:
                batch_guard(idx)
            loss, grads = loss_and_grads(params, X_train[idx], y_train[idx], w[idx])
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"training diverged: non-finite loss at epoch {epoch}, batch start {start}"
                )
            optimizer.step(params, grads)
            batch_losses.append(loss)

        val_pred = (predict_proba(params, X_val) >= 0.5).astype(np.int64)
        val_f1 = compute_metrics(y_val, val_pred)["macro_f1"]
        result.log.append(LogRow(epoch, float(np.mean(batch_losses)), val_f1))

        if val_f1 > best:
            best = val_f1
            stale = 0
            result.params = params.copy()
            result.best_epoch = epoch
            result.best_val_macro_f1 = val_f1
        else:
            stale += 1
            if stale >= config.patience:
                logger.debug("early stop at epoch %d (best %.4f at %d)", epoch, best, result.best_epoch)
                break
    return result


def save_checkpoint(path: str | Path, params: ClassifierParams, config: TrainConfig) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "dim": params.dim,
        "hidden": params.hidden,
        "activation": "tanh",
        "w1": params.w1.tolist(),
        "b1": params.b1.tolist(),
        "w2": params.w2.tolist(),
        "b2": params.b2,
        "config": {
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "max_epochs": config.max_epochs,
            "patience": config.patience,
            "seed": config.seed,
            "hidden": config.hidden,
        },
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[ClassifierParams, TrainConfig]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    params = ClassifierParams(
        w1=np.array(payload["w1"], dtype=np.float64),
        b1=np.array(payload["b1"], dtype=np.float64),
        w2=np.array(payload["w2"], dtype=np.float64),
        b2=float(payload["b2"]),
    )
    return params, TrainConfig(**payload["config"])


def write_training_log(path: str | Path, log: list[LogRow]) -> None:
    lines = ["epoch,train_loss,val_macro_f1"]
    lines += [f"{r.epoch},{r.train_loss!r},{r.val_macro_f1!r}" for r in log]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


__all__ = [
    "ClassifierParams",
    "TrainConfig",
    "TrainResult",
    "LogRow",
    "init_params",
    "predict",
    "predict_proba",
    "weighted_loss",
    "loss_and_grads",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "write_training_log",
]
