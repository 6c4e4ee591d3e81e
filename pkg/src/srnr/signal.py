"""Core time-series types and the preprocessing protocol.

Recordings are normalised per channel, split into constant-label runs,
trimmed at both ends, cut into non-overlapping windows and class balanced.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

__all__ = [
    "RawRecording",
    "Window",
    "SplitSpec",
    "min_max_normalize",
    "normalize_recording",
    "split_runs",
    "trim_repetition",
    "segment_windows",
    "balance_classes",
    "split_indices",
    "split_train_test",
]


@dataclass
class RawRecording:
    """Multichannel signal with per-sample gesture and repetition labels.

    ``samples`` is ``(channels, T)``; label 0 is rest.
    """

    samples: np.ndarray
    sample_rate: float
    gesture_label: np.ndarray
    repetition_id: np.ndarray
    subject_id: int = 0

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        self.gesture_label = np.asarray(self.gesture_label, dtype=np.int64)
        self.repetition_id = np.asarray(self.repetition_id, dtype=np.int64)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.shape[0] < 1:
            raise ValueError("recording needs at least one channel")
        n = self.samples.shape[1]
        if self.gesture_label.shape != (n,) or self.repetition_id.shape != (n,):
            raise ValueError(
                f"label streams must have length {n}, got "
                f"{self.gesture_label.shape} and {self.repetition_id.shape}"
            )

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_ms(self) -> float:
        return 1000.0 * self.n_samples / self.sample_rate

    def slice(self, start: int, stop: int) -> "RawRecording":
        return RawRecording(
            self.samples[:, start:stop],
            self.sample_rate,
            self.gesture_label[start:stop],
            self.repetition_id[start:stop],
            self.subject_id,
        )


@dataclass
class Window:
    samples: np.ndarray
    label: int
    subject_id: int
    window_len_ms: float
    repetition_id: int = -1


@dataclass(frozen=True)
class SplitSpec:
    """Stratified split protocol.

    ``mode`` is ``"kfold"`` (disjoint test folds) or ``"shuffle"``
    (independent reshuffles, each with its own test draw).
    """

    train_fraction: float = 0.8
    n_folds: int = 5
    rng_seed: int = 0
    mode: str = "kfold"

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.n_folds < 1:
            raise ValueError(f"n_folds must be >= 1, got {self.n_folds}")
        if self.mode not in ("kfold", "shuffle"):
            raise ValueError(f"unknown split mode {self.mode!r}")


def _samples_for(ms: float, sample_rate: float, what: str) -> int:
    n = ms * sample_rate / 1000.0
    if abs(n - round(n)) > 1e-9:
        raise ValueError(f"{what} of {ms} ms is not a whole number of samples at {sample_rate} Hz")
    return int(round(n))


def min_max_normalize(signal) -> np.ndarray:
    """Scale to [0, 1]; a constant signal maps to zeros."""
    x = np.asarray(signal, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot normalise an empty signal")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def normalize_recording(rec: RawRecording) -> RawRecording:
    """Min-max normalise each channel over the full recording."""
    out = np.vstack([min_max_normalize(ch) for ch in rec.samples])
    return RawRecording(out, rec.sample_rate, rec.gesture_label, rec.repetition_id, rec.subject_id)


def split_runs(rec: RawRecording) -> List[RawRecording]:
    """Cut a recording into maximal runs of constant (label, repetition)."""
    key = rec.gesture_label * (2**31) + rec.repetition_id
    edges = np.flatnonzero(np.diff(key)) + 1
    bounds = np.concatenate(([0], edges, [rec.n_samples]))
    return [rec.slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def trim_repetition(rep: RawRecording, trim_ms: float) -> RawRecording:
    """Drop ``trim_ms`` from both ends of one repetition segment."""
    n = _samples_for(trim_ms, rep.sample_rate, "trim")
    if rep.n_samples <= 2 * n:
        rid = int(rep.repetition_id[0]) if rep.n_samples else -1
        raise ValueError(
            f"repetition {rid} lasts {rep.duration_ms:g} ms, too short to trim "
            f"{trim_ms:g} ms from each end"
        )
    if n == 0:
        return rep
    return rep.slice(n, rep.n_samples - n)


def segment_windows(rec: RawRecording, window_len_ms: float, balance: bool = True) -> List[Window]:
    """Non-overlapping windows; windows spanning a label change are dropped.

    Trailing partial windows are discarded. With ``balance`` every class is
    truncated to the smallest per-class window count.
    """
    length = _samples_for(window_len_ms, rec.sample_rate, "window")
    if length < 1:
        raise ValueError("window must contain at least one sample")
    windows = []
    for k in range(rec.n_samples // length):
        sl = slice(k * length, (k + 1) * length)
        labels = rec.gesture_label[sl]
        if labels.min() != labels.max():
            continue
        windows.append(
            Window(
                samples=rec.samples[:, sl],
                label=int(labels[0]),
                subject_id=rec.subject_id,
                window_len_ms=window_len_ms,
                repetition_id=int(rec.repetition_id[sl][0]),
            )
        )
    return balance_classes(windows) if balance else windows


def balance_classes(windows: Sequence[Window]) -> List[Window]:
    """Keep the first ``m`` windows of each class, ``m`` the rarest class count."""
    by_class = defaultdict(list)
    for w in windows:
        by_class[w.label].append(w)
    if not by_class:
        return []
    m = min(len(v) for v in by_class.values())
    keep = {id(w) for v in by_class.values() for w in v[:m]}
    return [w for w in windows if id(w) in keep]


def split_indices(labels: Sequence[int], spec: SplitSpec) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Index form of :func:`split_train_test`: ``(train_idx, test_idx)`` per fold."""
    labels = np.asarray(labels)
    by_class = defaultdict(list)
    for i, lab in enumerate(labels.tolist()):
        by_class[lab].append(i)
    short = sorted(c for c, idx in by_class.items() if len(idx) < 5)
    if short:
        raise ValueError(f"classes with fewer than 5 windows: {short}")

    rng = np.random.default_rng(spec.rng_seed)
    test_sets = [[] for _ in range(spec.n_folds)]
    for c in sorted(by_class):
        idx = np.asarray(by_class[c])
        if spec.n_folds > 1 and spec.mode == "kfold":
            perm = rng.permutation(idx)
            for f, block in enumerate(np.array_split(perm, spec.n_folds)):
                test_sets[f].extend(block.tolist())
        else:
            n_test = int(round((1.0 - spec.train_fraction) * len(idx)))
            if n_test < 1 or n_test >= len(idx):
                raise ValueError(f"class {c}: split leaves an empty train or test set")
            for f in range(spec.n_folds):
                test_sets[f].extend(rng.permutation(idx)[:n_test].tolist())

    folds = []
    for test in test_sets:
        mask = np.zeros(len(labels), dtype=bool)
        mask[test] = True
        folds.append((np.flatnonzero(~mask), np.flatnonzero(mask)))
    return folds


def split_train_test(
    windows: Sequence[Window], spec: SplitSpec
) -> List[Tuple[List[Window], List[Window]]]:
    """Stratified train/test folds, deterministic in ``spec.rng_seed``.

    A single fold (or ``shuffle`` mode) draws ``round((1 - f) * n_c)`` test
    windows per class. ``kfold`` mode partitions each class into ``n_folds``
    near-equal disjoint test blocks.
    """
    folds = split_indices([w.label for w in windows], spec)
    return [([windows[i] for i in tr], [windows[i] for i in te]) for tr, te in folds]
