import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srnr.metrics import binary_metrics, compute_metrics, confusion_matrix


def brute_force(pred, true, k):
    """Loop-based one-vs-rest counts and macro metrics in percent."""
    per = {"pp": [], "sp": [], "se": [], "f1": []}
    for c in range(k):
        tp = fp = tn = fn = 0
        for p, t in zip(pred, true):
            if p == c and t == c:
                tp += 1
            elif p == c:
                fp += 1
            elif t == c:
                fn += 1
            else:
                tn += 1
        per["pp"].append(100 * tp / (tp + fp) if tp + fp else 0.0)
        per["sp"].append(100 * tn / (tn + fp) if tn + fp else 0.0)
        per["se"].append(100 * tp / (tp + fn) if tp + fn else 0.0)
        per["f1"].append(100 * 2 * tp / (2 * tp + fn + fp) if 2 * tp + fn + fp else 0.0)
    acc = 100 * sum(p == t for p, t in zip(pred, true)) / len(pred)
    return acc, {m: sum(v) / k for m, v in per.items()}, per


def test_single_class_example():
    m = binary_metrics(3, 1, 10, 2)
    assert m["pp"] == pytest.approx(75.0)
    assert round(m["sp"], 1) == 90.9
    assert m["se"] == pytest.approx(60.0)
    assert round(m["f1"], 1) == 66.7


def test_perfect_predictions():
    y = np.repeat(np.arange(5), 4)
    r = compute_metrics(y, y, 5)
    assert all(v == 100.0 for v in r.summary().values())
    np.testing.assert_array_equal(r.confusion, 4 * np.eye(5, dtype=int))
    assert r.degenerate == {}


@given(st.integers(2, 8), st.integers(1, 200), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_matches_brute_force(k, n, seed):
    rng = np.random.default_rng(seed)
    pred, true = rng.integers(0, k, n), rng.integers(0, k, n)
    r = compute_metrics(pred, true, k)
    acc, macro, per = brute_force(pred.tolist(), true.tolist(), k)
    assert r.accuracy == pytest.approx(acc, abs=1e-12)
    for m in macro:
        assert getattr(r, m) == pytest.approx(macro[m], abs=1e-9)
        np.testing.assert_allclose(r.per_class[m], per[m], atol=1e-9)
    assert r.accuracy == pytest.approx(100 * np.trace(r.confusion) / n)
    np.testing.assert_array_equal(r.confusion.sum(axis=1), np.bincount(true, minlength=k))
    for c in range(k):
        row = r.confusion[c].sum()
        assert r.per_class["se"][c] == pytest.approx(100 * r.confusion[c, c] / row if row else 0.0)
    assert all(0.0 <= v <= 100.0 for v in r.summary().values())


def test_degenerate_classes_flagged():
    r = compute_metrics([0, 0, 0], [0, 0, 1], 3)
    assert 2 in r.degenerate["pp"] and 1 in r.degenerate["pp"]
    assert 2 in r.degenerate["se"]
    assert r.per_class["pp"][2] == 0.0


def test_confusion_orientation():
    cm = confusion_matrix([1, 1, 0], [0, 1, 1], 2)
    np.testing.assert_array_equal(cm, [[0, 1], [1, 1]])


def test_errors():
    with pytest.raises(ValueError):
        compute_metrics([0, 1], [0], 2)
    with pytest.raises(ValueError):
        compute_metrics([0, 2], [0, 1], 2)


def test_serialisation():
    r = compute_metrics([0, 1, 1], [0, 1, 0], 2)
    d = json.loads(r.to_json())
    assert d["confusion"] == [[1, 1], [0, 1]]
    csv = r.confusion_csv(["rest", "fist"])
    assert csv.splitlines() == ["true\\pred,rest,fist", "rest,1,1", "fist,0,1"]
