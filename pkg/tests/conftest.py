import numpy as np
import pytest

import _acceptance_report
from gamecap import (
    ChannelParams,
    build_game_channel,
    make_chsh,
    make_magic_square,
    make_parity,
)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_report.LINES:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_report.LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def chsh():
    return make_chsh()


@pytest.fixture(scope="session")
def magic_square():
    return make_magic_square()


@pytest.fixture(scope="session")
def parity3():
    return make_parity(3)


@pytest.fixture(scope="session")
def parity4():
    return make_parity(4)


@pytest.fixture(scope="session")
def chsh_noiseless(chsh):
    return build_game_channel(chsh, ChannelParams.from_noise(0.0))


@pytest.fixture(scope="session")
def chsh_eta02(chsh):
    return build_game_channel(chsh, ChannelParams.from_noise(0.2))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
