import numpy as np
import pytest

from fluortoa.units import SPECIES
from fluortoa.wavepacket import GaussianPacketSpec, Grid

CS = SPECIES["Cs133"]
HOM = CS.hbar_over_m
GAMMA = CS.gamma_internal

_ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    """Collect one acceptance verdict for the terminal summary."""
    _ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def reference_packet():
    return GaussianPacketSpec(x0=-1.05, v_mean=0.1, dv=0.098e-2, hbar_over_m=HOM)


@pytest.fixture
def small_grid():
    return Grid.from_extent(-8.0, 8.0, 4096)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)
