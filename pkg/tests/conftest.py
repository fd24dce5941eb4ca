import numpy as np
import pytest

from antifuse_pvc.memory import FuseMemory


def random_memory(rng, density=0.5):
    bits = rng.random((4096, 24)) < density
    return FuseMemory.from_bits(bits)


def half_a_memory(rng, density=0.5):
    """Random memory with data only in words 0..31 of every page."""
    bits = rng.random((4096, 24)) < density
    bits[(np.arange(4096) & 32) != 0] = False
    return FuseMemory.from_bits(bits)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
