"""Spiking rotating-neuron reservoir pipeline for sEMG gesture classification."""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND  # noqa: E402
