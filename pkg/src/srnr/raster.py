"""Binary spike rasters and their on-disk formats.

Binary layout::

    b"SRST"                 magic
    uint32 little-endian    header length H
    H bytes                 UTF-8 JSON header {version, dt, rows, steps, row_meaning}
    rows * ceil(steps / 8)  np.packbits(spikes, axis=1, bitorder="little")
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"SRST"
FORMAT_VERSION = 1
ROW_MEANINGS = ("encoder-channel", "reservoir-neuron")


@dataclass
class SpikeRaster:
    spikes: np.ndarray
    dt: float
    row_meaning: str = "encoder-channel"

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.spikes))
        if s.size and not np.isin(s, (0, 1)).all():
            raise ValueError("spike raster entries must be 0 or 1")
        self.spikes = s.astype(np.uint8, copy=False)
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.row_meaning not in ROW_MEANINGS:
            raise ValueError(f"row_meaning must be one of {ROW_MEANINGS}")

    @property
    def rows(self) -> int:
        return self.spikes.shape[0]

    @property
    def steps(self) -> int:
        return self.spikes.shape[1]

    def rates(self) -> np.ndarray:
        """Mean firing rate of every row in Hz."""
        return self.spikes.sum(axis=1) / (self.steps * self.dt)

    def __eq__(self, other):
        if not isinstance(other, SpikeRaster):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.row_meaning == other.row_meaning
            and np.array_equal(self.spikes, other.spikes)
        )

    def to_bytes(self) -> bytes:
        header = json.dumps(
            {
                "version": FORMAT_VERSION,
                "dt": self.dt,
                "rows": self.rows,
                "steps": self.steps,
                "row_meaning": self.row_meaning,
            },
            sort_keys=True,
        ).encode("utf-8")
        packed = np.packbits(self.spikes, axis=1, bitorder="little")
        return MAGIC + struct.pack("<I", len(header)) + header + packed.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "SpikeRaster":
        if data[:4] != MAGIC:
            raise ValueError("not a spike raster (bad magic)")
        (hlen,) = struct.unpack("<I", data[4:8])
        head = json.loads(data[8 : 8 + hlen].decode("utf-8"))
        if head.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported raster format version {head.get('version')}")
        rows, steps = head["rows"], head["steps"]
        nbytes = (steps + 7) // 8
        body = np.frombuffer(data, dtype=np.uint8, offset=8 + hlen)
        if body.size != rows * nbytes:
            raise ValueError(f"raster body has {body.size} bytes, expected {rows * nbytes}")
        bits = np.unpackbits(body.reshape(rows, nbytes), axis=1, count=steps, bitorder="little")
        return cls(bits, head["dt"], head["row_meaning"])

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "SpikeRaster":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def to_csv(self) -> str:
        buf = io.StringIO()
        np.savetxt(buf, self.spikes, fmt="%d", delimiter=",")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, dt: float, row_meaning: str = "encoder-channel") -> "SpikeRaster":
        arr = np.loadtxt(io.StringIO(text), delimiter=",", dtype=np.uint8, ndmin=2)
        return cls(arr, dt, row_meaning)


def downsample_raster(raster: SpikeRaster, factor: int) -> SpikeRaster:
    """Merge each group of ``factor`` steps into one (logical OR).

    Trailing steps that do not fill a group are dropped.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return raster
    steps = raster.steps // factor
    grouped = raster.spikes[:, : steps * factor].reshape(raster.rows, steps, factor)
    return SpikeRaster(grouped.max(axis=2), raster.dt * factor, raster.row_meaning)
