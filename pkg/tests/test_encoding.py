import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from srnr.encoding import (
    LifParams,
    LifState,
    calibrate_encoder,
    corpus_rate,
    encode_channel,
    encode_rows,
    encode_window,
    firing_rate,
    lif_step,
)

NOMINAL = LifParams.nominal()  # R=5, C=3e-3, dt=1e-3, v_thr=0.5
ENC = LifParams.encoder_default(2000.0)


def _first_spike_step(i_in, params, steps=200):
    s = LifState(params.v_rest)
    for t in range(steps):
        s, spk = lif_step(s, i_in, params)
        if spk:
            return t
    return None


def test_nominal_values():
    assert (NOMINAL.r, NOMINAL.c, NOMINAL.dt, NOMINAL.v_thr) == (5.0, 3e-3, 1e-3, 0.5)
    assert NOMINAL.tau == pytest.approx(0.015)
    assert ENC.dt == 5e-4 and ENC.tau == NOMINAL.tau


def test_params_validation():
    with pytest.raises(ValueError):
        LifParams(r=-1)
    with pytest.raises(ValueError):
        LifParams(v_thr=0.0)
    with pytest.raises(ValueError):
        LifParams(dt=0.02)  # dt/tau > 1
    with pytest.raises(ValueError):
        LifParams(dt=0)


def test_rest_fixed_point():
    s = LifState(0.0)
    for _ in range(100):
        s, spk = lif_step(s, 0.0, NOMINAL)
        assert s.v == 0.0 and spk == 0


def test_subthreshold_steady_state_never_spikes():
    i_in = 0.25 / NOMINAL.r
    assert _first_spike_step(i_in, NOMINAL, steps=2000) is None
    s = LifState()
    for _ in range(2000):
        s, _ = lif_step(s, i_in, NOMINAL)
    assert s.v == pytest.approx(0.25, rel=1e-6)


def test_first_spike_matches_charging_curve():
    i_in = 1.0 / NOMINAL.r
    t_spike_ms = (_first_spike_step(i_in, NOMINAL) + 1) * NOMINAL.dt * 1e3
    analytic_ms = NOMINAL.tau * math.log(2) * 1e3
    assert analytic_ms == pytest.approx(10.4, abs=0.01)
    assert abs(t_spike_ms - analytic_ms) <= NOMINAL.dt * 1e3


def test_periodic_train_interval(backend):
    i_in = 1.0 / NOMINAL.r
    train = encode_channel(np.full(400, i_in), NOMINAL)
    isi = np.diff(np.flatnonzero(train))
    assert len(isi) > 10 and np.all(isi == isi[0])
    analytic = NOMINAL.tau * math.log(1.0 / (1.0 - NOMINAL.v_thr / (i_in * NOMINAL.r))) / NOMINAL.dt
    assert abs(isi[0] - analytic) <= 1


def test_zero_signal_zero_train(backend):
    assert not encode_channel(np.zeros(400), ENC).any()


def test_negative_input_rejected():
    with pytest.raises(ValueError, match="rectified"):
        encode_channel([0.1, -0.2], ENC)


@given(arrays(np.float64, 60, elements=st.floats(0, 1)), st.floats(0.0, 3.0))
@settings(max_examples=50, deadline=None)
def test_kernel_equals_lif_step_iteration(x, gain):
    p = LifParams(dt=5e-4, input_gain=gain)
    s, want = LifState(), []
    for v in x:
        s, spk = lif_step(s, v, p)
        want.append(spk)
    np.testing.assert_array_equal(encode_channel(x, p), want)


def test_count_monotone_in_gain(rng, backend):
    burst = np.abs(rng.standard_normal(400)) * np.hanning(400)
    counts = [encode_channel(burst, LifParams(dt=5e-4, input_gain=g)).sum() for g in np.geomspace(1e-3, 1.0, 60)]
    assert np.all(np.diff(counts) >= 0)
    assert counts[-1] > counts[0]


@given(arrays(np.float64, 200, elements=st.floats(0, 0.1)), arrays(np.float64, 200, elements=st.floats(0, 0.1)))
@settings(max_examples=50, deadline=None)
def test_pointwise_larger_input_never_fewer_spikes(x, extra):
    p = LifParams(dt=5e-4, input_gain=0.01)
    assert encode_channel(x + extra, p).sum() >= encode_channel(x, p).sum()


def test_reset_discipline_and_state_bound(rng):
    p = LifParams(dt=5e-4, input_gain=0.02)
    s = LifState()
    for v in np.abs(rng.standard_normal(2000)):
        s, spk = lif_step(s, v, p)
        if spk:
            assert s.v == p.v_reset
        assert s.v < p.v_thr


def test_rate_ceiling(backend):
    train = encode_channel(np.full(400, 1e6), ENC)
    assert train.all()
    assert firing_rate(train, ENC.dt) == pytest.approx(1.0 / ENC.dt)


@pytest.mark.parametrize("count, want", [(60, 300.0), (0, 0.0), (400, 2000.0)])
def test_firing_rate_examples(count, want):
    train = np.zeros(400, dtype=np.uint8)
    train[:count] = 1
    assert firing_rate(train, 5e-4) == pytest.approx(want)


def test_firing_rate_empty():
    with pytest.raises(ValueError):
        firing_rate([], 5e-4)


def test_encode_rows_shape_and_raster(rng):
    x = np.abs(rng.standard_normal((3, 48, 400)))
    out = encode_rows(x, LifParams(dt=5e-4, input_gain=0.005))
    assert out.shape == x.shape and out.dtype == np.uint8
    r = encode_window(x[0], LifParams(dt=5e-4, input_gain=0.005))
    assert r.row_meaning == "encoder-channel" and r.rows == 48
    np.testing.assert_array_equal(r.spikes, out[0])
    np.testing.assert_array_equal(encode_rows(x, LifParams(dt=5e-4, input_gain=0.005)), out)


def _corpus(seed, scale=1.0, windows=20):
    rng = np.random.default_rng(seed)
    amp = rng.uniform(0.1, 1.0, size=(1, 8, 1))
    return scale * amp * np.abs(rng.standard_normal((windows, 8, 400)))


@pytest.mark.parametrize("seed", range(5))
def test_calibration_cap_and_floor(seed, backend):
    x = _corpus(seed, scale=10 ** (seed - 2))
    cal = calibrate_encoder(x, ENC, rate_cap=300.0)
    rate = corpus_rate(x, cal.params, "window")
    assert rate == cal.max_rate
    assert rate <= 300.0
    assert rate >= 150.0
    assert cal.warning is None
    # the cap translates to at most 60 spikes per 200 ms window per channel
    assert encode_rows(x, cal.params).sum(axis=-1).max() <= 60


def test_calibration_mean_statistic():
    x = _corpus(1)
    cal = calibrate_encoder(x, ENC, 300.0, statistic="mean")
    assert 150.0 <= corpus_rate(x, cal.params, "mean") <= 300.0


def test_calibration_deterministic():
    x = _corpus(3)
    assert calibrate_encoder(x, ENC) == calibrate_encoder(x, ENC)


@given(st.integers(0, 10_000), st.sampled_from([50.0, 100.0, 200.0, 300.0]))
@settings(max_examples=20, deadline=None)
def test_doubling_cap_never_lowers_gain(seed, cap):
    x = _corpus(seed, windows=4)
    g1 = calibrate_encoder(x, ENC, cap).params.input_gain
    g2 = calibrate_encoder(x, ENC, 2 * cap).params.input_gain
    assert g2 >= g1


def test_already_under_cap_keeps_or_raises_gain():
    x = _corpus(0)
    base = LifParams(dt=5e-4, input_gain=1e-6)
    assert corpus_rate(x, base) < 300
    cal = calibrate_encoder(x, base)
    assert cal.params.input_gain >= base.input_gain
    assert cal.max_rate <= 300


def test_all_zero_corpus_warns_and_keeps_params():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        cal = calibrate_encoder(np.zeros((2, 3, 400)), ENC)
    assert cal.params == ENC and cal.warning
    assert any("all zeros" in str(m.message) for m in w)


def test_unreachable_floor_is_flagged():
    # a single spike-sized blip cannot reach half the cap at any gain
    x = np.zeros((1, 1, 400))
    x[0, 0, 0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cal = calibrate_encoder(x, ENC)
    assert cal.max_rate <= 300 and cal.warning


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        calibrate_encoder(np.zeros((0, 400)), ENC)
