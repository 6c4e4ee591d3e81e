"""Desk-scale synthetic sEMG recordings.

Every gesture class gets its own per-channel amplitude and spectral
signature over four frequency bands. Each repetition is 5 s of movement with
soft onset/offset ramps followed by 3 s of low-level rest noise, mirroring
the acquisition protocol of the real benchmark. Repetitions add amplitude
jitter and a slow tremor so windows are not trivially identical.
"""
from __future__ import annotations

import numpy as np

from .signal import RawRecording

__all__ = ["synthesize_dataset", "synthesize_subjects"]

_BAND_EDGES_HZ = (10.0, 100.0, 250.0, 500.0, 900.0)


def _band_noise(rng, n, sample_rate, band_gains):
    """White noise shaped to piecewise-constant band gains."""
    spec = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    shape = np.zeros_like(freqs)
    for g, lo, hi in zip(band_gains, _BAND_EDGES_HZ[:-1], _BAND_EDGES_HZ[1:]):
        shape[(freqs >= lo) & (freqs < hi)] = g
    x = np.fft.irfft(spec * shape, n)
    return x / (np.std(x) + 1e-12)


def _envelope(n, ramp):
    env = np.ones(n)
    r = min(ramp, n // 2)
    if r:
        up = 0.5 - 0.5 * np.cos(np.linspace(0.0, np.pi, r))
        env[:r] = up
        env[n - r :] = up[::-1]
    return env


def synthesize_dataset(
    n_classes: int,
    reps: int = 6,
    seed: int = 0,
    n_channels: int = 12,
    sample_rate: float = 2000.0,
    move_s: float = 5.0,
    rest_s: float = 3.0,
    subject_id: int = 0,
    rep_jitter: float = 0.15,
    rest_level: float = 0.05,
) -> RawRecording:
    """One subject with ``n_classes * reps`` movement segments.

    Gestures are labelled ``1..n_classes``; rest is 0. Movement segments
    carry their repetition number, rest segments repetition 0.
    """
    if n_classes < 2:
        raise ValueError("need at least two gesture classes")
    rng = np.random.default_rng(seed)
    n_bands = len(_BAND_EDGES_HZ) - 1
    amp = rng.uniform(0.2, 1.0, size=(n_classes, n_channels))
    gains = rng.dirichlet(np.full(n_bands, 0.7), size=(n_classes, n_channels))
    n_move = int(round(move_s * sample_rate))
    n_rest = int(round(rest_s * sample_rate))
    ramp = int(0.3 * sample_rate)
    t = np.arange(n_move) / sample_rate

    chunks, labels, rep_ids = [], [], []
    for rep in range(1, reps + 1):
        for c in range(n_classes):
            jitter = 1.0 + rep_jitter * rng.standard_normal(n_channels)
            tremor = 1.0 + 0.2 * np.sin(2 * np.pi * rng.uniform(0.5, 2.0) * t + rng.uniform(0, 2 * np.pi))
            env = _envelope(n_move, ramp) * tremor
            move = np.stack(
                [
                    amp[c, ch] * jitter[ch] * env * _band_noise(rng, n_move, sample_rate, gains[c, ch])
                    for ch in range(n_channels)
                ]
            )
            rest = rest_level * rng.standard_normal((n_channels, n_rest))
            chunks += [move, rest]
            labels += [np.full(n_move, c + 1), np.zeros(n_rest, dtype=int)]
            rep_ids += [np.full(n_move, rep), np.zeros(n_rest, dtype=int)]
    return RawRecording(
        np.hstack(chunks),
        sample_rate,
        np.concatenate(labels),
        np.concatenate(rep_ids),
        subject_id,
    )


def synthesize_subjects(n_subjects: int, n_classes: int, reps: int = 6, seed: int = 0, **kw):
    seeds = np.random.SeedSequence(seed).generate_state(n_subjects)
    return [
        synthesize_dataset(n_classes, reps, int(s), subject_id=i + 1, **kw)
        for i, s in enumerate(seeds)
    ]
