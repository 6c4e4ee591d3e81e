"""Kernel backend selection.

The compiled ``_core`` extension is used when it imports; otherwise the numpy
fallback. Set ``SRNR_KERNELS=python`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("SRNR_KERNELS", "").lower() != "python":
    try:
        from . import _core as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback

sosfilt_rows = _impl.sosfilt_rows
lif_encode_rows = _impl.lif_encode_rows
lif_count_rows = _impl.lif_count_rows
rotating_reservoir = _impl.rotating_reservoir
delta_epoch = _impl.delta_epoch


def available_backends():
    """Map backend name to module for every backend importable here."""
    found = {"python": _fallback}
    try:
        from . import _core
        found["cython"] = _core
    except ImportError:
        pass
    return found
