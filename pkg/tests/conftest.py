import numpy as np
import pytest

from rydparity import gates, model
from rydparity.model import mhz


@pytest.fixture(scope="session")
def pe_x_setup():
    cfg = model.SystemConfig(omega_c=mhz(3.533), parity="even")
    pulse = model.TargetPulse(omega_f=mhz(0.5069), alpha=0.529, gamma=np.pi)
    return cfg, pulse, gates.PE_X


@pytest.fixture(scope="session")
def po_sqrtx_setup():
    cfg = model.SystemConfig(omega_c=mhz(2.3455), parity="odd")
    pulse = model.TargetPulse(omega_f=mhz(0.3699), alpha=0.7584, gamma=np.pi / 2)
    return cfg, pulse, gates.PO_SQRT_X


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running physics check")


def pytest_terminal_summary(terminalreporter):
    import sys
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance"):
            lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
