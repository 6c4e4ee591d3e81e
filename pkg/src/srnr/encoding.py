"""LIF spike encoding of rectified band signals.

One explicit-Euler LIF neuron per band row converts the rectified signal
into a binary spike train. A single input gain, shared by every channel of
a subject, is calibrated so that no channel fires faster than a rate cap.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, replace
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .raster import SpikeRaster

__all__ = [
    "LifParams",
    "LifState",
    "lif_step",
    "encode_channel",
    "encode_rows",
    "firing_rate",
    "Calibration",
    "calibrate_encoder",
    "corpus_rate",
]

# Reservoir neuron constants: R, C, time step, threshold.
NOMINAL_R = 5.0
NOMINAL_C = 3e-3
NOMINAL_DT = 1e-3
NOMINAL_V_THR = 0.5


@dataclass(frozen=True)
class LifParams:
    r: float = NOMINAL_R
    c: float = NOMINAL_C
    dt: float = NOMINAL_DT
    v_thr: float = NOMINAL_V_THR
    v_reset: float = 0.0
    v_rest: float = 0.0
    input_gain: float = 1.0

    def __post_init__(self):
        if self.r <= 0 or self.c <= 0:
            raise ValueError("r and c must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not self.v_thr > self.v_reset:
            raise ValueError("v_thr must exceed v_reset")
        if not self.dt / self.tau < 1.0:
            raise ValueError(f"dt/tau = {self.dt / self.tau:g} >= 1; Euler step unstable")

    @property
    def tau(self) -> float:
        return self.r * self.c

    @classmethod
    def nominal(cls, **overrides) -> "LifParams":
        return cls(**overrides)

    @classmethod
    def encoder_default(cls, sample_rate: float = 2000.0, **overrides) -> "LifParams":
        """Nominal neuron clocked at the sampling period."""
        return cls(dt=1.0 / sample_rate, **overrides)

    def kernel_args(self) -> Tuple[float, ...]:
        return (self.dt, self.tau, self.c, self.input_gain, self.v_thr, self.v_reset, self.v_rest)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LifState:
    v: float = 0.0


def lif_step(state: LifState, i_in: float, params: LifParams) -> Tuple[LifState, int]:
    drive = (params.input_gain * i_in) / params.c
    v = state.v + params.dt * (drive - (state.v - params.v_rest) / params.tau)
    if v >= params.v_thr:
        return LifState(params.v_reset), 1
    return LifState(v), 0


def _check_rectified(x: np.ndarray):
    if x.size and x.min() < 0:
        raise ValueError(
            f"encoder input must be rectified (non-negative); min sample is {x.min():g}"
        )


def encode_channel(signal, params: LifParams) -> np.ndarray:
    x = np.asarray(signal, dtype=np.float64)
    _check_rectified(x)
    return _kernels.lif_encode_rows(x.reshape(1, -1), *params.kernel_args())[0]


def encode_rows(signals, params: LifParams) -> np.ndarray:
    """Encode ``(..., T)`` rectified rows into a uint8 raster of the same shape."""
    x = np.asarray(signals, dtype=np.float64)
    _check_rectified(x)
    out = _kernels.lif_encode_rows(x.reshape(-1, x.shape[-1]), *params.kernel_args())
    return out.reshape(x.shape)


def encode_window(bands, params: LifParams) -> SpikeRaster:
    return SpikeRaster(encode_rows(bands, params), params.dt, "encoder-channel")


def firing_rate(train, dt: float) -> float:
    t = np.asarray(train)
    if t.size == 0:
        raise ValueError("cannot compute the rate of an empty spike train")
    return float(t.sum()) / (t.size * dt)


def corpus_rate(signals, params: LifParams, statistic: str = "window") -> float:
    """Largest firing rate over the corpus ``(windows, channels, T)``.

    ``"window"`` takes the max over every (window, channel) train;
    ``"mean"`` averages each channel over windows first.
    """
    x = np.asarray(signals, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    counts = _kernels.lif_count_rows(x.reshape(-1, x.shape[-1]), *params.kernel_args())
    rates = counts.reshape(x.shape[:-1]) / (x.shape[-1] * params.dt)
    if statistic == "window":
        return float(rates.max())
    if statistic == "mean":
        return float(rates.mean(axis=0).max())
    raise ValueError(f"unknown rate statistic {statistic!r}")


@dataclass(frozen=True)
class Calibration:
    params: LifParams
    max_rate: float
    evaluations: int
    warning: Optional[str] = None


def calibrate_encoder(
    signals,
    params: LifParams,
    rate_cap: float = 300.0,
    statistic: str = "window",
    tol_hz: float = 5.0,
    max_iter: int = 40,
    span_log2: float = 24.0,
) -> Calibration:
    """Pick the shared input gain so the corpus rate sits just under ``rate_cap``.

    Bisection runs on the log2 offset over ``input_gain * 2**[-span, +span]`` and
    stops once the rate is within ``tol_hz`` of the cap or after ``max_iter``
    halvings. The returned rate never exceeds the cap.
    """
    x = np.asarray(signals, dtype=np.float64)
    if x.size == 0:
        raise ValueError("calibration corpus is empty")
    _check_rectified(x)
    if not np.any(x):
        msg = "calibration corpus is all zeros; encoder parameters left unchanged"
        warnings.warn(msg)
        return Calibration(params, 0.0, 0, msg)

    evals = 0

    def gain(offset):
        return params.input_gain * 2.0**offset

    def rate(offset):
        nonlocal evals
        evals += 1
        return corpus_rate(x, replace(params, input_gain=gain(offset)), statistic)

    r0 = rate(0.0)
    lo, hi = -span_log2, span_log2
    r_lo, r_hi = rate(lo), rate(hi)
    if r_lo > rate_cap:
        raise ValueError(f"rate {r_lo:g} Hz exceeds the cap even at gain {gain(lo):g}")
    if r_hi <= rate_cap:
        lo, r_lo = hi, r_hi
    else:
        for _ in range(max_iter):
            if rate_cap - r_lo <= tol_hz:
                break
            mid = 0.5 * (lo + hi)
            r_mid = rate(mid)
            if r_mid <= rate_cap:
                lo, r_lo = mid, r_mid
            else:
                hi = mid
    if r0 <= rate_cap and lo < 0.0:
        lo, r_lo = 0.0, r0

    warning = None
    if r_lo <= rate_cap / 2:
        warning = f"calibrated rate {r_lo:g} Hz is not above half the cap ({rate_cap / 2:g} Hz)"
        warnings.warn(warning)
    return Calibration(replace(params, input_gain=gain(lo)), r_lo, evals, warning)
