import numpy as np
import pytest

from srnr import _kernels

BACKENDS = sorted(_kernels.available_backends())
KERNEL_NAMES = ("sosfilt_rows", "lif_encode_rows", "lif_count_rows", "rotating_reservoir", "delta_epoch")


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route every kernel call through one backend for the duration of a test."""
    mod = _kernels.available_backends()[request.param]
    for name in KERNEL_NAMES:
        monkeypatch.setattr(_kernels, name, getattr(mod, name))
    monkeypatch.setattr(_kernels, "BACKEND", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
