import numpy as np
import pytest

from cavitysim import SystemParams, build_sector, parse_state_expr
from cavitysim.hamiltonian import OMEGA_DEFAULT

OMEGA = 62.831853
LAM = 6.2831853
J_HOP = 0.31415927
K0 = 0.62831853

ENTANGLED = "(|00100>+|01001>)/sqrt(2)"


@pytest.fixture(scope="session")
def chi2_space():
    return build_sector(2, 1, 2)


@pytest.fixture(scope="session")
def single_space():
    return build_sector(1, 0, 1)


@pytest.fixture(scope="session")
def default_params():
    return SystemParams.from_ratios(OMEGA_DEFAULT)


@pytest.fixture(scope="session")
def pump_state(chi2_space):
    return parse_state_expr("|00100>", chi2_space)


@pytest.fixture(scope="session")
def entangled_state(chi2_space):
    return parse_state_expr(ENTANGLED, chi2_space)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
