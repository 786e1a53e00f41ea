"""Desk-scale trainable models sharing one contract: fit, predict_proba, embed.

Two learners: softmax (multinomial logistic) regression and a one-hidden-layer
ReLU network. Both train with mini-batch SGD on mean cross-entropy at a fixed
learning rate, shuffling with a seeded permutation each epoch, and record a
per-epoch correctness log with accuracy observed on the forward pass of each
gradient step, before the parameter update.

Determinism contract: fit is a pure function of (spec, features, labels,
n_classes). The logistic learner initializes at zero, so with epochs=0 its
predictions are exactly uniform. The network initializes weights uniformly in
[-1/sqrt(fan_in), +1/sqrt(fan_in)] from the seeded stream (W1 row-major, then
W2 row-major) and biases at zero.

All training math runs in float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .forgetting import ForgettingScores
from .rng import SplitMix64, derive_seed

KINDS = ("logistic", "mlp")


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    epochs: int
    learning_rate: float
    batch_size: int
    seed: int
    hidden_units: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be nonnegative, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if not (np.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.kind == "mlp":
            if self.hidden_units is None or self.hidden_units < 1:
                raise ValueError("mlp requires hidden_units >= 1")
        elif self.hidden_units is not None:
            raise ValueError("hidden_units applies only to mlp")

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }
        if self.kind == "mlp":
            d["hidden_units"] = self.hidden_units
        return d

    @staticmethod
    def from_dict(d: dict) -> "LearnerSpec":
        allowed = {"kind", "epochs", "learning_rate", "batch_size", "seed", "hidden_units"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown learner fields: {sorted(unknown)}")
        return LearnerSpec(
            kind=d["kind"],
            epochs=int(d["epochs"]),
            learning_rate=float(d["learning_rate"]),
            batch_size=int(d["batch_size"]),
            seed=int(d["seed"]),
            hidden_units=(int(d["hidden_units"]) if "hidden_units" in d else None),
        )


@dataclass
class TrainedModel:
    spec: LearnerSpec
    n_classes: int
    n_features: int
    params: dict
    train_log: Optional[np.ndarray]  # (n, epochs) bool; None when epochs == 0
    online_forgetting: Optional[ForgettingScores]
    loss_history: np.ndarray  # mean cross-entropy per epoch


def _check_xy(features, labels, n_classes: Optional[int]) -> tuple[np.ndarray, np.ndarray, int]:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got ndim={x.ndim}")
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-D, got ndim={y.ndim}")
    if x.shape[0] == 0:
        raise ValueError("empty dataset")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"features rows {x.shape[0]} != labels {y.shape[0]}")
    if not np.isfinite(x).all():
        raise ValueError("features contain non-finite values")
    if (y < 0).any():
        raise ValueError("labels must be nonnegative")
    if n_classes is None:
        c = int(y.max()) + 1
        if c < 2:
            raise ValueError("need at least 2 classes; pass n_classes for single-class data")
    else:
        c = int(n_classes)
        if c < 2:
            raise ValueError(f"n_classes must be at least 2, got {c}")
        if (y >= c).any():
            raise ValueError(f"label {int(y.max())} outside [0, {c})")
    return x, y, c


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def init_params(spec: LearnerSpec, n_features: int, n_classes: int) -> dict:
    if spec.kind == "logistic":
        return {
            "W": np.zeros((n_features, n_classes)),
            "b": np.zeros(n_classes),
        }
    h = spec.hidden_units
    rng = SplitMix64(derive_seed(spec.seed, "init"))
    w1_bound = 1.0 / np.sqrt(n_features)
    w2_bound = 1.0 / np.sqrt(h)
    w1 = (rng.doubles(n_features * h) * 2.0 - 1.0) * w1_bound
    w2 = (rng.doubles(h * n_classes) * 2.0 - 1.0) * w2_bound
    return {
        "W1": w1.reshape(n_features, h),
        "b1": np.zeros(h),
        "W2": w2.reshape(h, n_classes),
        "b2": np.zeros(n_classes),
    }


def forward_logits(kind: str, params: dict, x: np.ndarray) -> np.ndarray:
    if kind == "logistic":
        return x @ params["W"] + params["b"]
    hidden = np.maximum(x @ params["W1"] + params["b1"], 0.0)
    return hidden @ params["W2"] + params["b2"]


def loss_and_grads(kind: str, params: dict, x: np.ndarray, y: np.ndarray) -> tuple[float, dict, np.ndarray]:
    """Mean cross-entropy, its parameter gradients, and the batch logits."""
    m = x.shape[0]
    if kind == "logistic":
        logits = x @ params["W"] + params["b"]
        probs = _softmax(logits)
        loss = -np.mean(np.log(probs[np.arange(m), y]))
        dlogits = probs.copy()
        dlogits[np.arange(m), y] -= 1.0
        dlogits /= m
        grads = {"W": x.T @ dlogits, "b": dlogits.sum(axis=0)}
        return float(loss), grads, logits
    z1 = x @ params["W1"] + params["b1"]
    hidden = np.maximum(z1, 0.0)
    logits = hidden @ params["W2"] + params["b2"]
    probs = _softmax(logits)
    loss = -np.mean(np.log(probs[np.arange(m), y]))
    dlogits = probs.copy()
    dlogits[np.arange(m), y] -= 1.0
    dlogits /= m
    dhidden = dlogits @ params["W2"].T
    dz1 = dhidden * (z1 > 0.0)
    grads = {
        "W1": x.T @ dz1,
        "b1": dz1.sum(axis=0),
        "W2": hidden.T @ dlogits,
        "b2": dlogits.sum(axis=0),
    }
    return float(loss), grads, logits


def fit(spec: LearnerSpec, features, labels, n_classes: Optional[int] = None) -> TrainedModel:
    """Train from scratch; deterministic given (spec, data, n_classes)."""
    x, y, c = _check_xy(features, labels, n_classes)
    n = x.shape[0]
    params = init_params(spec, x.shape[1], c)

    train_log = np.zeros((n, spec.epochs), dtype=np.bool_) if spec.epochs > 0 else None
    prev_acc = np.zeros(n, dtype=np.bool_)
    online_counts = np.zeros(n, dtype=np.int64)
    losses = np.zeros(spec.epochs)

    for epoch in range(spec.epochs):
        perm = SplitMix64(derive_seed(spec.seed, f"shuffle-{epoch}")).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, spec.batch_size):
            idx = perm[start : start + spec.batch_size]
            loss, grads, logits = loss_and_grads(spec.kind, params, x[idx], y[idx])
            correct = logits.argmax(axis=1) == y[idx]
            train_log[idx, epoch] = correct
            online_counts[idx] += prev_acc[idx] & ~correct
            prev_acc[idx] = correct
            for key, grad in grads.items():
                params[key] -= spec.learning_rate * grad
            epoch_loss += loss * idx.shape[0]
        losses[epoch] = epoch_loss / n

    if spec.epochs > 0:
        online = ForgettingScores(
            never_learned=(online_counts == 0) & ~prev_acc,
            counts=online_counts,
        )
    else:
        online = None
    return TrainedModel(
        spec=spec,
        n_classes=c,
        n_features=x.shape[1],
        params=params,
        train_log=train_log,
        online_forgetting=online,
        loss_history=losses,
    )


def _check_dims(model: TrainedModel, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got ndim={x.ndim}")
    if x.shape[1] != model.n_features:
        raise ValueError(f"feature dim {x.shape[1]} != model dim {model.n_features}")
    return x


def predict_proba(model: TrainedModel, features) -> np.ndarray:
    """Softmax class probabilities, rows summing to 1."""
    x = _check_dims(model, features)
    return _softmax(forward_logits(model.spec.kind, model.params, x))


def predict(model: TrainedModel, features) -> np.ndarray:
    x = _check_dims(model, features)
    return forward_logits(model.spec.kind, model.params, x).argmax(axis=1)


def embed(model: TrainedModel, features) -> np.ndarray:
    """Final-hidden-layer representation; identity for the linear model."""
    x = _check_dims(model, features)
    if model.spec.kind == "logistic":
        return x
    return np.maximum(x @ model.params["W1"] + model.params["b1"], 0.0)


def error_rate(model: TrainedModel, features, labels) -> float:
    y = np.asarray(labels, dtype=np.int64)
    return float(np.mean(predict(model, features) != y))


@dataclass(frozen=True)
class SynthParams:
    classes: int
    dim: int
    separation: float
    noise: float
    n_train: int
    n_test: int
    seed: int

    def __post_init__(self):
        if self.classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.classes}")
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("train and test sizes must be positive")
        if not (np.isfinite(self.separation) and np.isfinite(self.noise)):
            raise ValueError("separation and noise must be finite")
        if self.noise < 0 or self.separation < 0:
            raise ValueError("separation and noise must be nonnegative")


@dataclass
class SyntheticDataset:
    params: SynthParams
    features: np.ndarray  # (n_train, dim) float64
    labels: np.ndarray  # (n_train,) int64
    test_features: np.ndarray
    test_labels: np.ndarray
    means: np.ndarray  # (classes, dim) blob centers actually used


def make_synthetic(params: SynthParams, means: Optional[np.ndarray] = None) -> SyntheticDataset:
    """Gaussian blobs with round-robin labels; byte-identical per seed.

    One stream seeded from (seed, "synth") supplies, in order: blob means
    (skipped when explicit means are given), train noise, test noise.
    Labels are round-robin (i mod classes), so class counts are balanced
    within 1.
    """
    rng = SplitMix64(derive_seed(params.seed, "synth"))
    if means is None:
        means = params.separation * rng.normals((params.classes, params.dim))
    else:
        means = np.asarray(means, dtype=np.float64)
        if means.shape != (params.classes, params.dim):
            raise ValueError(f"means must be {(params.classes, params.dim)}, got {means.shape}")

    def split(n: int) -> tuple[np.ndarray, np.ndarray]:
        y = np.arange(n, dtype=np.int64) % params.classes
        x = means[y] + params.noise * rng.normals((n, params.dim))
        return x, y

    x_train, y_train = split(params.n_train)
    x_test, y_test = split(params.n_test)
    return SyntheticDataset(
        params=params,
        features=x_train,
        labels=y_train,
        test_features=x_test,
        test_labels=y_test,
        means=means,
    )
