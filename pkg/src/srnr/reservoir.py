"""Spiking rotating-neuron reservoir.

Each input spike train drives its own bank of ``N`` LIF neurons through a
binary mask. The mask-to-neuron assignment rotates one position per step:
neuron ``i`` at step ``t`` sees mask entry ``(i - t) mod N``. All ``N``
outputs are read every step, so 48 inputs with ``N = 10`` yield 480 rows,
bank-major.

:func:`ring_reference` simulates the equivalent fixed-mask reservoir whose
state is shifted by the cyclic ring matrix each step. It is kept as an
independent check on the rotating implementation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .encoding import LifParams, LifState, lif_step
from .raster import SpikeRaster

__all__ = [
    "InputMask",
    "ReservoirConfig",
    "ReservoirBankState",
    "init_mask",
    "rotation_offset",
    "effective_weight",
    "bank_step",
    "run_bank",
    "run_parallel_reservoirs",
    "run_reservoir_batch",
    "make_bank_configs",
    "ring_matrix",
    "ring_reference",
]


@dataclass(frozen=True)
class InputMask:
    weights: Tuple[int, ...]
    rng_seed: Optional[int] = None
    density: Optional[float] = None

    def __post_init__(self):
        w = tuple(int(v) for v in self.weights)
        if not w or any(v not in (0, 1) for v in w):
            raise ValueError("mask weights must be a non-empty 0/1 vector")
        if not any(w):
            raise ValueError("mask has no connections; the bank would be disconnected")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)

    def as_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=np.uint8)


def init_mask(n: int, density: float, seed: int) -> InputMask:
    """Bernoulli(density) mask, redrawn until at least one entry is set."""
    if n < 1:
        raise ValueError("mask length must be >= 1")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must be in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    while True:
        w = rng.random(n) < density
        if w.any():
            return InputMask(tuple(w.astype(int)), seed, density)


def rotation_offset(t: int, n: int) -> int:
    return t % n


def effective_weight(mask: InputMask, neuron_i: int, t: int) -> int:
    n = len(mask)
    if not 0 <= neuron_i < n:
        raise IndexError(f"neuron index {neuron_i} out of range for N={n}")
    return mask.weights[(neuron_i - rotation_offset(t, n)) % n]


def _reservoir_neuron(dt: float) -> LifParams:
    # tau = RC kept at its nominal value; only the clock follows the raster
    return LifParams(dt=dt)


@dataclass(frozen=True)
class ReservoirConfig:
    mask: InputMask
    neuron: LifParams = field(default_factory=lambda: _reservoir_neuron(5e-4))
    spike_current: float = 1.0

    def __post_init__(self):
        if self.n_neurons < 1:
            raise ValueError("n_neurons must be >= 1")

    @property
    def n_neurons(self) -> int:
        return len(self.mask)

    def to_dict(self) -> dict:
        return {
            "n_neurons": self.n_neurons,
            "mask": list(self.mask.weights),
            "mask_seed": self.mask.rng_seed,
            "mask_density": self.mask.density,
            "neuron": self.neuron.to_dict(),
            "spike_current": self.spike_current,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReservoirConfig":
        mask = InputMask(tuple(d["mask"]), d.get("mask_seed"), d.get("mask_density"))
        if len(mask) != d.get("n_neurons", len(mask)):
            raise ValueError("n_neurons does not match mask length")
        return cls(mask, LifParams(**d["neuron"]), d.get("spike_current", 1.0))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ReservoirConfig":
        return cls.from_dict(json.loads(text))


def make_bank_configs(
    n_banks: int,
    n_neurons: int = 10,
    density: float = 0.5,
    seed: int = 0,
    dt: float = 5e-4,
    spike_current: float = 1.0,
    shared_mask: bool = False,
) -> List[ReservoirConfig]:
    """One config per bank; mask seeds derive from ``seed``."""
    seeds = np.random.SeedSequence(seed).generate_state(n_banks)
    if shared_mask:
        seeds[:] = seeds[0]
    neuron = _reservoir_neuron(dt)
    return [
        ReservoirConfig(init_mask(n_neurons, density, int(s)), neuron, spike_current)
        for s in seeds
    ]


@dataclass(frozen=True)
class ReservoirBankState:
    v: Tuple[LifState, ...]
    t: int = 0

    @classmethod
    def zeros(cls, cfg: ReservoirConfig) -> "ReservoirBankState":
        return cls(tuple(LifState(cfg.neuron.v_rest) for _ in range(cfg.n_neurons)), 0)


def bank_step(
    state: ReservoirBankState, in_spike: int, cfg: ReservoirConfig
) -> Tuple[ReservoirBankState, np.ndarray]:
    """Advance one bank by one step; reference implementation of the kernel."""
    if len(state.v) != cfg.n_neurons:
        raise ValueError("state size does not match config")
    new_v, out = [], np.zeros(cfg.n_neurons, dtype=np.uint8)
    for i, s in enumerate(state.v):
        w = float(effective_weight(cfg.mask, i, state.t))
        i_in = w * float(in_spike) * cfg.spike_current
        s, out[i] = lif_step(s, i_in, cfg.neuron)
        new_v.append(s)
    return ReservoirBankState(tuple(new_v), state.t + 1), out


def _kernel_args(cfg: ReservoirConfig):
    p = cfg.neuron
    return (p.dt, p.tau, p.c, p.input_gain, cfg.spike_current, p.v_thr, p.v_reset, p.v_rest)


def run_bank(spikes, cfg: ReservoirConfig) -> np.ndarray:
    """(N, L) output raster for one input train."""
    s = np.asarray(spikes, dtype=np.uint8).reshape(1, -1)
    return _kernels.rotating_reservoir(s, cfg.mask.as_array()[None], *_kernel_args(cfg))[0]


def _group_by_dynamics(configs: Sequence[ReservoirConfig]):
    n = {c.n_neurons for c in configs}
    args = {_kernel_args(c) for c in configs}
    if len(n) != 1 or len(args) != 1:
        return None
    return n.pop(), args.pop()


def run_reservoir_batch(spikes, configs: Sequence[ReservoirConfig]) -> np.ndarray:
    """Batched banks: ``spikes`` is ``(..., banks, L)``, output ``(..., banks * N, L)``."""
    s = np.asarray(spikes, dtype=np.uint8)
    if s.shape[-2] != len(configs):
        raise ValueError(
            f"input has {s.shape[-2]} rows but {len(configs)} reservoir configs were given"
        )
    lead, (banks, steps) = s.shape[:-2], s.shape[-2:]
    flat = s.reshape(-1, banks, steps)
    grouped = _group_by_dynamics(configs)
    if grouped is None:
        blocks = [
            run_reservoir_batch(flat[:, b : b + 1], [cfg]).reshape(flat.shape[0], -1, steps)
            for b, cfg in enumerate(configs)
        ]
        return np.concatenate(blocks, axis=1).reshape(*lead, -1, steps)
    n, args = grouped
    masks = np.stack([c.mask.as_array() for c in configs])
    masks = np.broadcast_to(masks, (flat.shape[0], banks, n)).reshape(-1, n)
    out = _kernels.rotating_reservoir(flat.reshape(-1, steps), masks, *args)
    return out.reshape(*lead, banks * n, steps)


def run_parallel_reservoirs(raster: SpikeRaster, configs: Sequence[ReservoirConfig]) -> SpikeRaster:
    """Project ``banks`` input rows to ``banks * N`` reservoir rows, bank-major."""
    if raster.rows != len(configs):
        raise ValueError(
            f"input raster has {raster.rows} rows but {len(configs)} reservoir configs were given"
        )
    out = run_reservoir_batch(raster.spikes, configs)
    return SpikeRaster(out, raster.dt, "reservoir-neuron")


def ring_matrix(n: int) -> np.ndarray:
    """Cyclic ring matrix: ``W[i, i-1] = 1`` and ``W[0, n-1] = 1``."""
    return np.roll(np.eye(n), 1, axis=0)


def ring_reference(spikes, masks, neuron: LifParams, spike_current: float = 1.0) -> np.ndarray:
    """Fixed-mask reservoir whose state is shifted by :func:`ring_matrix` each step.

    ``spikes`` is ``(R, L)``, ``masks`` ``(R, N)``. Virtual unit ``j`` holds
    the state of rotating neuron ``i = (t - j) mod N`` and is always driven
    by mask entry ``(-j) mod N``. Returns the raster in rotating-neuron
    order, ``(R, N, L)``.
    """
    spikes = np.asarray(spikes, dtype=np.uint8)
    masks = np.asarray(masks, dtype=np.uint8)
    rows, steps = spikes.shape
    n = masks.shape[1]
    w_ring = ring_matrix(n)
    fixed = masks[:, (-np.arange(n)) % n].astype(np.float64)
    v = np.full((rows, n), neuron.v_rest)
    virt = np.zeros((rows, n, steps), dtype=np.uint8)
    p = neuron
    for t in range(steps):
        if t:
            v = v @ w_ring.T
        i_in = fixed * spikes[:, t : t + 1] * spike_current
        drive = (p.input_gain * i_in) / p.c
        v = v + p.dt * (drive - (v - p.v_rest) / p.tau)
        fired = v >= p.v_thr
        v[fired] = p.v_reset
        virt[:, :, t] = fired
    # relabel: rotating neuron i at step t is virtual unit (t - i) mod N
    i = np.arange(n)[:, None]
    t = np.arange(steps)[None, :]
    return virt[:, (t - i) % n, t]
