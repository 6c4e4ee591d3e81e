import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.svm import LinearSVC

from srnr.raster import SpikeRaster
from srnr.readout import (
    FeatureVector,
    LinearSvmModel,
    SoftmaxModel,
    bin_counts_array,
    bin_spike_counts,
    cross_entropy,
    delta_update,
    predict,
    softmax,
    train_delta_softmax,
    train_linear_svm,
)


def fd_delta_check(rng, k, d, alpha=0.005, h=1e-6):
    """Relative error between delta_update and -alpha * central-difference CE gradient."""
    w = rng.standard_normal((k, d))
    b = rng.standard_normal(k)
    x = rng.standard_normal(d)
    y = int(rng.integers(k))
    model = SoftmaxModel(w, b, alpha)
    new = delta_update(model, x, y)

    def loss(wf, bf):
        return cross_entropy(softmax(wf @ x + bf), [y])[0]

    gw = np.zeros_like(w)
    for i in range(k):
        for j in range(d):
            wp, wm = w.copy(), w.copy()
            wp[i, j] += h
            wm[i, j] -= h
            gw[i, j] = (loss(wp, b) - loss(wm, b)) / (2 * h)
    gb = np.zeros(k)
    for i in range(k):
        bp, bm = b.copy(), b.copy()
        bp[i] += h
        bm[i] -= h
        gb[i] = (loss(w, bp) - loss(w, bm)) / (2 * h)
    want = np.concatenate([(-alpha * gw).ravel(), -alpha * gb])
    got = np.concatenate([(new.weights - w).ravel(), new.bias - b])
    return np.linalg.norm(got - want) / np.linalg.norm(want)


def test_delta_update_is_ce_gradient(rng):
    errs = [fd_delta_check(rng, int(rng.integers(2, 6)), int(rng.integers(1, 8))) for _ in range(20)]
    assert max(errs) < 1e-6


def test_delta_update_example():
    m = SoftmaxModel(np.zeros((2, 2)), np.array([-1000.0, 1000.0]), 0.005)  # p = [0, 1]
    new = delta_update(m, [1.0, 0.0], np.array([1.0, 0.0]))
    np.testing.assert_allclose(new.weights, [[0.005, 0.0], [-0.005, 0.0]])
    assert m.weights.sum() == 0  # original untouched


def test_delta_update_fixed_point():
    m = SoftmaxModel(np.zeros((2, 1)), np.array([0.0, 1e6]), 0.5)
    new = delta_update(m, [3.0], 1)
    np.testing.assert_array_equal(new.weights, m.weights)


def test_softmax_examples():
    np.testing.assert_allclose(softmax(np.zeros(50)), np.full(50, 0.02))
    p = softmax([1000.0, 0.0])
    assert np.isfinite(p).all() and p[0] == pytest.approx(1.0) and p[1] < 1e-300 + 1e-12


@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(-700, 700)), st.floats(-1e3, 1e3))
def test_softmax_normalised_and_shift_invariant(z, c):
    p = softmax(z)
    assert np.all(p >= 0) and abs(p.sum() - 1.0) < 1e-12
    np.testing.assert_allclose(softmax(z + c), p, atol=1e-12)


def test_predict_tie_break_and_bias():
    m = SoftmaxModel.zeros(4, 3)
    assert predict(m, np.zeros(3)) == 0
    m.bias[2] += 10
    assert predict(m, np.zeros(3)) == 2
    with pytest.raises(ValueError, match="dimension"):
        m.predict(np.zeros((1, 5)))


def test_predict_invariant_to_monotone_logit_transform(rng):
    m = SoftmaxModel(rng.standard_normal((5, 4)), rng.standard_normal(5))
    x = rng.standard_normal((50, 4))
    scaled = SoftmaxModel(3.0 * m.weights, 3.0 * m.bias + 7.0)
    np.testing.assert_array_equal(m.predict(x), scaled.predict(x))


def test_bin_counts():
    assert not bin_counts_array(np.zeros((480, 400), np.uint8), 1).any()
    np.testing.assert_array_equal(bin_counts_array(np.ones((480, 400), np.uint8), 1), np.full(480, 400))
    with pytest.raises(ValueError):
        bin_counts_array(np.ones((2, 10)), 3)


@given(arrays(np.uint8, (6, 40), elements=st.integers(0, 1)), st.sampled_from([1, 2, 4, 5, 8]))
def test_bin_counts_brute_force(s, n_bins):
    fv = bin_spike_counts(SpikeRaster(s, 1e-3), n_bins, label=2)
    L = 40 // n_bins
    want = [int(s[r, b * L : (b + 1) * L].sum()) for r in range(6) for b in range(n_bins)]
    assert fv.counts.tolist() == want
    assert fv.counts.sum() == s.sum() and fv.label == 2
    assert fv.counts.max(initial=0) <= L


def _blobs(rng, k=3, n=40, d=5, sep=6.0):
    centres = rng.standard_normal((k, d)) * sep
    x = np.concatenate([c + rng.standard_normal((n, d)) for c in centres])
    y = np.repeat(np.arange(k), n)
    return x, y


def test_delta_separable_blobs(rng, backend):
    x, y = _blobs(rng)
    assert LinearSVC().fit(x, y).score(x, y) == 1.0  # oracle: separable
    model, curve = train_delta_softmax(x, y, epochs=50, alpha=0.005)
    assert np.mean(model.predict(x) == y) == 1.0
    assert len(curve) == 50 and curve[-1] < curve[0]


def test_delta_zero_alpha_flat(rng):
    x, y = _blobs(rng)
    model, curve = train_delta_softmax(x, y, epochs=5, alpha=0.0)
    assert not model.weights.any() and not model.bias.any()
    assert np.allclose(curve, np.log(3))


def test_delta_deterministic_and_backend_agnostic(rng):
    x, y = _blobs(rng, n=30)
    a, ca = train_delta_softmax(x, y, epochs=10, seed=4)
    b, cb = train_delta_softmax(x, y, epochs=10, seed=4)
    np.testing.assert_array_equal(a.weights, b.weights)
    assert ca == cb


def test_delta_batch_mode(rng):
    x, y = _blobs(rng)
    model, curve = train_delta_softmax(x, y, epochs=50, alpha=0.01, batch=8)
    assert np.mean(model.predict(x) == y) == 1.0


def test_delta_batch_one_matches_reference_loop(rng):
    x, y = _blobs(rng, n=10)
    model, _ = train_delta_softmax(x, y, epochs=3, alpha=0.05, seed=1)
    ref = SoftmaxModel.zeros(3, x.shape[1], 0.05)
    order_rng = np.random.default_rng(1)
    for _ in range(3):
        for s in order_rng.permutation(len(x)):
            ref = delta_update(ref, x[s], int(y[s]))
    np.testing.assert_allclose(model.weights, ref.weights, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(model.bias, ref.bias, rtol=1e-10, atol=1e-12)


def test_missing_class_rejected():
    with pytest.raises(ValueError, match=r"\[1\]"):
        train_delta_softmax(np.zeros((4, 2)), [0, 0, 2, 2], epochs=1)
    with pytest.raises(ValueError):
        train_linear_svm(np.zeros((4, 2)), [0, 0, 2, 2], n_classes=3)


def test_model_json_roundtrip(rng):
    m = SoftmaxModel(rng.standard_normal((3, 4)), rng.standard_normal(3), 0.01, [1, 2, 3])
    back = SoftmaxModel.from_json(m.to_json())
    np.testing.assert_array_equal(back.weights, m.weights)
    assert back.config_hash() == m.config_hash() and back.classes == [1, 2, 3]
    tampered = m.to_json().replace('"alpha": 0.01', '"alpha": 0.02')
    with pytest.raises(ValueError, match="hash"):
        SoftmaxModel.from_json(tampered)
    s = LinearSvmModel(m.weights, m.bias, 2.0)
    np.testing.assert_array_equal(LinearSvmModel.from_json(s.to_json()).weights, s.weights)


def test_feature_vector_input(rng):
    m = SoftmaxModel(rng.standard_normal((3, 4)), np.zeros(3))
    fv = FeatureVector(rng.integers(0, 5, 4), 1)
    assert predict(m, fv) == int(np.argmax(m.weights @ fv.counts))


def test_svm_1d_separable():
    x = np.r_[np.linspace(-3, -1, 20), np.linspace(1, 3, 20)][:, None]
    y = np.r_[np.zeros(20), np.ones(20)].astype(int)
    assert np.all(train_linear_svm(x, y).predict(x) == y)


def test_svm_blobs_and_permutation(rng):
    x, y = _blobs(rng, k=4)
    m = train_linear_svm(x, y, epochs=30, seed=2)
    assert np.mean(m.predict(x) == y) == 1.0
    perm = np.array([2, 0, 3, 1])
    mp = train_linear_svm(x, perm[y], epochs=30, seed=2)
    np.testing.assert_allclose(mp.weights[perm], m.weights, atol=1e-12)
    np.testing.assert_array_equal(mp.predict(x), perm[m.predict(x)])


def test_svm_needs_epochs(rng):
    x, y = _blobs(rng)
    with pytest.raises(ValueError):
        train_linear_svm(x, y, epochs=0)
