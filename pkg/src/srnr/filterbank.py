"""Butterworth band filters realised as biquad cascades, plus rectification.

Each band is a 4th-order digital filter obtained from the analog Butterworth
prototype by a bilinear transform prewarped at the band edges. A band that
starts at DC becomes a lowpass; a band that ends at Nyquist becomes a
highpass. The 12 input channels expand to ``4 * 12`` rectified band rows,
band-major.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "DEFAULT_CUTOFFS_HZ",
    "BandSpec",
    "BiquadCascade",
    "bands_from_cutoffs",
    "design_butterworth_bandpass",
    "apply_filter",
    "full_wave_rectify",
    "FilterBank",
    "expand_channels",
]

DEFAULT_CUTOFFS_HZ = (0.0, 100.0, 250.0, 500.0, 1000.0)


@dataclass(frozen=True)
class BandSpec:
    low_cut: float
    high_cut: float
    order: int = 4
    sample_rate: float = 2000.0

    def __post_init__(self):
        nyq = self.sample_rate / 2.0
        if not 0.0 <= self.low_cut < self.high_cut <= nyq:
            raise ValueError(
                f"band ({self.low_cut}, {self.high_cut}) Hz must satisfy "
                f"0 <= low < high <= {nyq} (Nyquist)"
            )
        if self.order < 2 or self.order % 2:
            raise ValueError(f"order must be even and >= 2, got {self.order}")
        if self.low_cut == 0.0 and self.high_cut == nyq:
            raise ValueError("band covering DC to Nyquist is an all-pass, not a filter")

    @property
    def kind(self) -> str:
        if self.low_cut == 0.0:
            return "lowpass"
        if self.high_cut == self.sample_rate / 2.0:
            return "highpass"
        return "bandpass"


@dataclass
class BiquadCascade:
    """Second-order sections, one ``(b0, b1, b2, a1, a2)`` row each (``a0 = 1``)."""

    sections: np.ndarray
    band: BandSpec | None = None
    state: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.sections = np.atleast_2d(np.asarray(self.sections, dtype=np.float64))
        if self.sections.shape[1] != 5:
            raise ValueError("each section needs 5 coefficients (b0, b1, b2, a1, a2)")
        self.reset()

    def reset(self):
        self.state = np.zeros((len(self.sections), 2))

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots([1.0, a1, a2]) for _, _, _, a1, a2 in self.sections])

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def frequency_response(self, freqs_hz, sample_rate: float | None = None) -> np.ndarray:
        """Complex response ``H(e^{jw})`` at the given frequencies."""
        fs = sample_rate or (self.band.sample_rate if self.band else None)
        if fs is None:
            raise ValueError("sample_rate required for a cascade without a band")
        z1 = np.exp(-2j * np.pi * np.asarray(freqs_hz, dtype=np.float64) / fs)
        h = np.ones_like(z1)
        for b0, b1, b2, a1, a2 in self.sections:
            h = h * (b0 + b1 * z1 + b2 * z1**2) / (1.0 + a1 * z1 + a2 * z1**2)
        return h

    def to_dict(self) -> dict:
        d = {"sections": [dict(zip(("b0", "b1", "b2", "a1", "a2"), map(float, s))) for s in self.sections]}
        if self.band is not None:
            d["band"] = {
                "low_cut": self.band.low_cut,
                "high_cut": self.band.high_cut,
                "order": self.band.order,
                "sample_rate": self.band.sample_rate,
                "kind": self.band.kind,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BiquadCascade":
        sections = [[s[k] for k in ("b0", "b1", "b2", "a1", "a2")] for s in d["sections"]]
        band = None
        if "band" in d:
            b = d["band"]
            band = BandSpec(b["low_cut"], b["high_cut"], b["order"], b["sample_rate"])
        return cls(np.array(sections), band)


def bands_from_cutoffs(cutoffs: Sequence[float] = DEFAULT_CUTOFFS_HZ, order: int = 4,
                       sample_rate: float = 2000.0) -> List[BandSpec]:
    return [BandSpec(lo, hi, order, sample_rate) for lo, hi in zip(cutoffs[:-1], cutoffs[1:])]


def _prewarp(f_hz: float, fs: float) -> float:
    return 2.0 * fs * np.tan(np.pi * f_hz / fs)


def _pair_conjugates(poles: np.ndarray) -> List[np.ndarray]:
    # complex poles pair with their conjugate, real poles pair with each other
    upper = sorted((p for p in poles if p.imag > 1e-12), key=lambda p: np.angle(p))
    real = sorted(p.real for p in poles if abs(p.imag) <= 1e-12)
    pairs = [np.array([p, np.conj(p)]) for p in upper]
    pairs += [np.array(real[i : i + 2], dtype=complex) for i in range(0, len(real), 2)]
    return pairs


def design_butterworth_bandpass(spec: BandSpec) -> BiquadCascade:
    """Design the band as a cascade of ``order / 2`` stable biquads.

    Total digital order is ``spec.order``; for a true bandpass the lowpass
    prototype has order ``spec.order / 2``. Gain is unity at DC (lowpass),
    Nyquist (highpass) or the warped geometric centre (bandpass).
    """
    fs = spec.sample_rate
    kind = spec.kind
    k = 2.0 * fs
    n_proto = spec.order // 2 if kind == "bandpass" else spec.order
    m = np.arange(n_proto)
    proto = np.exp(1j * np.pi * (2 * m + n_proto + 1) / (2 * n_proto))

    if kind == "lowpass":
        wc = _prewarp(spec.high_cut, fs)
        s_poles = wc * proto
        zero_pair = (1.0, 2.0, 1.0)  # double zero at z = -1
        w_ref = 0.0
    elif kind == "highpass":
        wc = _prewarp(spec.low_cut, fs)
        s_poles = wc / proto
        zero_pair = (1.0, -2.0, 1.0)  # double zero at z = +1
        w_ref = np.pi
    else:
        w1, w2 = _prewarp(spec.low_cut, fs), _prewarp(spec.high_cut, fs)
        bw, w0sq = w2 - w1, w1 * w2
        half = proto * bw / 2.0
        disc = np.sqrt(half**2 - w0sq)
        s_poles = np.concatenate([half + disc, half - disc])
        zero_pair = (1.0, 0.0, -1.0)  # zeros at z = +1 and z = -1
        w_ref = 2.0 * np.arctan(np.sqrt(w0sq) / k)

    z_poles = (k + s_poles) / (k - s_poles)
    z_ref = np.exp(1j * w_ref)
    sections = []
    for pair in _pair_conjugates(z_poles):
        a = np.real(np.poly(pair))
        b = np.array(zero_pair)
        num = b[0] + b[1] / z_ref + b[2] / z_ref**2
        den = a[0] + a[1] / z_ref + a[2] / z_ref**2
        b = b / abs(num / den)
        sections.append([b[0], b[1], b[2], a[1], a[2]])
    return BiquadCascade(np.array(sections), spec)


def apply_filter(cascade: BiquadCascade, signal) -> np.ndarray:
    """Causal filtering from zero state. Accepts a vector or a (rows, T) matrix."""
    x = np.asarray(signal, dtype=np.float64)
    y = _kernels.sosfilt_rows(cascade.sections, np.atleast_2d(x))
    return y.reshape(x.shape)


def full_wave_rectify(signal) -> np.ndarray:
    return np.abs(np.asarray(signal, dtype=np.float64))


class FilterBank:
    """A fixed set of band cascades applied channel-wise."""

    def __init__(self, bands: Sequence[BandSpec]):
        self.bands = list(bands)
        self.cascades = [design_butterworth_bandpass(b) for b in self.bands]

    @classmethod
    def standard(cls, sample_rate: float = 2000.0, cutoffs=DEFAULT_CUTOFFS_HZ, order: int = 4):
        return cls(bands_from_cutoffs(cutoffs, order, sample_rate))

    def __len__(self):
        return len(self.cascades)

    def expand(self, samples) -> np.ndarray:
        """Rectified band signals for ``(..., channels, T)``; rows band-major.

        Output shape is ``(..., n_bands * channels, T)`` with row
        ``b * channels + c`` holding band ``b`` of channel ``c``.
        """
        x = np.asarray(samples, dtype=np.float64)
        lead, (ch, steps) = x.shape[:-2], x.shape[-2:]
        flat = x.reshape(-1, steps)
        per_band = [full_wave_rectify(_kernels.sosfilt_rows(c.sections, flat)) for c in self.cascades]
        stacked = np.stack([p.reshape(-1, ch, steps) for p in per_band], axis=1)
        return stacked.reshape(*lead, len(self.cascades) * ch, steps)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps({"cascades": [c.to_dict() for c in self.cascades]}, indent=indent)


def expand_channels(window, bands: Sequence[BandSpec]) -> np.ndarray:
    """Rectified band rows for one window (or a raw ``(channels, T)`` matrix)."""
    samples = getattr(window, "samples", window)
    return FilterBank(bands).expand(samples)
