"""Classification metrics: accuracy, PP, Sp, Se, F1 and the confusion matrix.

Per-class counts are one-vs-rest; the reported PP/Sp/Se/F1 are macro
averages in percent. A class whose denominator is zero contributes 0 and is
listed in ``degenerate``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

__all__ = ["MetricsReport", "binary_metrics", "confusion_matrix", "compute_metrics"]


def _ratio(num, den):
    return 100.0 * num / den if den else 0.0


def binary_metrics(tp: int, fp: int, tn: int, fn: int) -> Dict[str, float]:
    return {
        "pp": _ratio(tp, tp + fp),
        "sp": _ratio(tn, tn + fp),
        "se": _ratio(tp, tp + fn),
        "f1": _ratio(2 * tp, 2 * tp + fn + fp),
    }


def confusion_matrix(predictions, truths, n_classes: int) -> np.ndarray:
    """``cm[t, p]`` counts samples of true class ``t`` predicted as ``p``."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(truths), np.asarray(predictions)), 1)
    return cm


@dataclass
class MetricsReport:
    accuracy: float
    pp: float
    sp: float
    se: float
    f1: float
    confusion: np.ndarray
    per_class: Dict[str, List[float]] = field(default_factory=dict)
    degenerate: Dict[str, List[int]] = field(default_factory=dict)

    def summary(self) -> Dict[str, float]:
        return {k: getattr(self, k) for k in ("accuracy", "pp", "sp", "se", "f1")}

    def to_dict(self) -> dict:
        d = self.summary()
        d["confusion"] = self.confusion.tolist()
        d["per_class"] = self.per_class
        d["degenerate"] = self.degenerate
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def confusion_csv(self, labels=None) -> str:
        k = len(self.confusion)
        labels = list(labels) if labels is not None else list(range(k))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true\\pred"] + labels)
        for lab, row in zip(labels, self.confusion):
            w.writerow([lab] + row.tolist())
        return buf.getvalue()


def compute_metrics(predictions, truths, n_classes: int) -> MetricsReport:
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(truths, dtype=np.int64)
    if pred.shape != true.shape:
        raise ValueError(f"{pred.size} predictions but {true.size} truths")
    for name, arr in (("prediction", pred), ("truth", true)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ValueError(f"{name} labels must lie in [0, {n_classes})")
    cm = confusion_matrix(pred, true, n_classes)
    total = cm.sum()
    tp = np.diag(cm)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    tn = total - tp - fp - fn

    per_class = {k: [] for k in ("pp", "sp", "se", "f1")}
    degenerate = {k: [] for k in ("pp", "sp", "se", "f1")}
    dens = {"pp": tp + fp, "sp": tn + fp, "se": tp + fn, "f1": 2 * tp + fn + fp}
    for c in range(n_classes):
        vals = binary_metrics(tp[c], fp[c], tn[c], fn[c])
        for k, v in vals.items():
            per_class[k].append(float(v))
            if dens[k][c] == 0:
                degenerate[k].append(c)
    macro = {k: float(np.mean(v)) if v else 0.0 for k, v in per_class.items()}
    acc = 100.0 * float(tp.sum()) / total if total else 0.0
    return MetricsReport(acc, macro["pp"], macro["sp"], macro["se"], macro["f1"], cm,
                         per_class, {k: v for k, v in degenerate.items() if v})
