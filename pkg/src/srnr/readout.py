"""Spike-count features and the trainable readouts.

The primary readout is a single-layer softmax classifier trained online
with the delta rule ``W += alpha * (y - p) x^T``, which is exactly a
gradient step on the cross-entropy loss. A one-vs-rest linear SVM trained
by subgradient descent serves as the baseline.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .raster import SpikeRaster

__all__ = [
    "FeatureVector",
    "bin_spike_counts",
    "bin_counts_array",
    "softmax",
    "cross_entropy",
    "SoftmaxModel",
    "predict",
    "delta_update",
    "train_delta_softmax",
    "LinearSvmModel",
    "train_linear_svm",
]


@dataclass
class FeatureVector:
    counts: np.ndarray
    n_bins: int
    label: Optional[int] = None


def bin_counts_array(spikes, n_bins: int) -> np.ndarray:
    """Per-bin spike counts for ``(..., rows, L)``, flattened row-major per sample."""
    s = np.asarray(spikes)
    steps = s.shape[-1]
    if n_bins < 1 or steps % n_bins:
        raise ValueError(f"raster length {steps} is not divisible into {n_bins} bins")
    per = s.reshape(*s.shape[:-1], n_bins, steps // n_bins).sum(axis=-1, dtype=np.int64)
    return per.reshape(*s.shape[:-2], -1)


def bin_spike_counts(raster: SpikeRaster, n_bins: int = 1, label: Optional[int] = None) -> FeatureVector:
    return FeatureVector(bin_counts_array(raster.spikes, n_bins), n_bins, label)


def softmax(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(p, y_idx) -> np.ndarray:
    p = np.atleast_2d(p)
    return -np.log(np.maximum(p[np.arange(len(p)), y_idx], 1e-300))


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, FeatureVector):
        x = x.counts
    elif isinstance(x, (list, tuple)) and x and isinstance(x[0], FeatureVector):
        x = np.stack([f.counts for f in x])
    return np.asarray(x, dtype=np.float64)


@dataclass
class SoftmaxModel:
    weights: np.ndarray
    bias: np.ndarray
    alpha: float = 0.005
    classes: Optional[List[int]] = None

    @classmethod
    def zeros(cls, n_classes: int, n_features: int, alpha: float = 0.005, classes=None):
        return cls(np.zeros((n_classes, n_features)), np.zeros(n_classes), alpha, classes)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    def logits(self, x) -> np.ndarray:
        x = _as_matrix(x)
        if x.shape[-1] != self.weights.shape[1]:
            raise ValueError(
                f"feature dimension {x.shape[-1]} does not match model dimension {self.weights.shape[1]}"
            )
        return x @ self.weights.T + self.bias

    def predict_proba(self, x) -> np.ndarray:
        return softmax(self.logits(x))

    def predict(self, x) -> np.ndarray:
        """Class index per sample; ties go to the lowest index."""
        return np.argmax(self.logits(x), axis=-1)

    def loss(self, x, y_idx) -> float:
        return float(cross_entropy(self.predict_proba(x), np.asarray(y_idx)).mean())

    def copy(self) -> "SoftmaxModel":
        return SoftmaxModel(self.weights.copy(), self.bias.copy(), self.alpha, self.classes)

    def config_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.weights).tobytes())
        h.update(np.ascontiguousarray(self.bias).tobytes())
        h.update(repr(self.alpha).encode())
        return h.hexdigest()[:16]

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "softmax",
                "weights": self.weights.tolist(),
                "bias": self.bias.tolist(),
                "alpha": self.alpha,
                "classes": self.classes,
                "config_hash": self.config_hash(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SoftmaxModel":
        d = json.loads(text)
        m = cls(np.array(d["weights"], dtype=np.float64), np.array(d["bias"], dtype=np.float64),
                d["alpha"], d.get("classes"))
        if d.get("config_hash") and d["config_hash"] != m.config_hash():
            raise ValueError("model hash mismatch; file is corrupt or was edited")
        return m


def predict(model, x) -> int:
    """Predicted class index for a single feature vector."""
    return int(model.predict(_as_matrix(x).reshape(1, -1))[0])


def delta_update(model: SoftmaxModel, x, y) -> SoftmaxModel:
    """Return a new model after one delta-rule step on ``(x, y)``.

    ``y`` is a one-hot vector (or a class index).
    """
    x = _as_matrix(x).ravel()
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 0:
        y = np.eye(model.n_classes)[int(y)]
    p = model.predict_proba(x)
    err = model.alpha * (y - p)
    return SoftmaxModel(model.weights + np.outer(err, x), model.bias + err, model.alpha, model.classes)


def _labels_to_index(y, n_classes: Optional[int]) -> Tuple[np.ndarray, int]:
    y = np.asarray(y, dtype=np.int64)
    k = n_classes if n_classes is not None else int(y.max()) + 1
    if y.min() < 0 or y.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")
    missing = sorted(set(range(k)) - set(np.unique(y).tolist()))
    if missing:
        raise ValueError(f"training set has no samples of classes {missing}")
    return y, k


def train_delta_softmax(
    x,
    y,
    epochs: int = 200,
    alpha: float = 0.005,
    batch: int = 1,
    seed: int = 0,
    n_classes: Optional[int] = None,
) -> Tuple[SoftmaxModel, List[float]]:
    """Online delta-rule training from zero weights.

    The sample order is reshuffled every epoch from ``seed``. The returned
    curve holds the mean cross-entropy over the training set after each epoch.
    """
    x = _as_matrix(x)
    y, k = _labels_to_index(y, n_classes)
    if batch < 1:
        raise ValueError("batch must be >= 1")
    model = SoftmaxModel.zeros(k, x.shape[1], alpha)
    rng = np.random.default_rng(seed)
    curve = []
    x = np.ascontiguousarray(x)
    for _ in range(epochs):
        order = rng.permutation(len(x))
        if batch == 1:
            _kernels.delta_epoch(model.weights, model.bias, x, y, order, float(alpha))
        else:
            for start in range(0, len(order), batch):
                idx = order[start : start + batch]
                p = softmax(x[idx] @ model.weights.T + model.bias)
                err = alpha * (np.eye(k)[y[idx]] - p)
                model.weights += err.T @ x[idx]
                model.bias += err.sum(axis=0)
        curve.append(model.loss(x, y))
    return model, curve


@dataclass
class LinearSvmModel:
    """One-vs-rest linear classifier; rows of ``weights`` are per-class hyperplanes."""

    weights: np.ndarray
    bias: np.ndarray
    reg_c: float = 1.0
    classes: Optional[List[int]] = None

    def decision_function(self, x) -> np.ndarray:
        x = _as_matrix(x)
        if x.shape[-1] != self.weights.shape[1]:
            raise ValueError("feature dimension does not match model")
        return x @ self.weights.T + self.bias

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.decision_function(x), axis=-1)

    def to_json(self) -> str:
        return json.dumps({"kind": "linear_svm", "weights": self.weights.tolist(),
                           "bias": self.bias.tolist(), "reg_c": self.reg_c, "classes": self.classes})

    @classmethod
    def from_json(cls, text: str) -> "LinearSvmModel":
        d = json.loads(text)
        return cls(np.array(d["weights"], dtype=np.float64), np.array(d["bias"], dtype=np.float64),
                   d["reg_c"], d.get("classes"))


def train_linear_svm(
    x,
    y,
    reg_c: float = 1.0,
    epochs: int = 50,
    seed: int = 0,
    n_classes: Optional[int] = None,
) -> LinearSvmModel:
    """Pegasos-style subgradient descent on the one-vs-rest hinge loss.

    Features are standardised internally and the scaling is folded back into
    the returned weights. The sample order depends on ``seed`` only, so
    relabelling the classes permutes the learned rows and nothing else.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    x = _as_matrix(x)
    y, k = _labels_to_index(y, n_classes)
    n, d = x.shape
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    xs = (x - mean) / scale
    lam = 1.0 / (reg_c * n)
    targets = np.where(y[:, None] == np.arange(k)[None, :], 1.0, -1.0)  # (n, k)

    xa = np.hstack([xs, np.ones((n, 1))])  # bias as a (regularised) constant feature
    w = np.zeros((k, d + 1))
    w_avg = np.zeros_like(w)
    rng = np.random.default_rng(seed)
    step = 0
    for epoch in range(epochs):
        for s in rng.permutation(n):
            step += 1
            eta = 1.0 / (lam * step)
            margin = targets[s] * (w @ xa[s])
            active = margin < 1.0
            w *= 1.0 - eta * lam
            w[active] += eta * targets[s, active, None] * xa[s]
        if epoch >= epochs // 2:
            w_avg += w
    w = w_avg / (epochs - epochs // 2)
    w_raw = w[:, :d] / scale
    b_raw = w[:, d] - w_raw @ mean
    return LinearSvmModel(w_raw, b_raw, reg_c)
