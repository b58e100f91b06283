import numpy as np
import pytest

from mptrap.params import SchwParams, BlackHoleParams
from mptrap.multiplier import build_profiles
from mptrap.chart import ingoing_chart
from mptrap.quadform import MultiplierTriple
from mptrap.sos import SchwSos


@pytest.fixture(scope="session")
def sp():
    return SchwParams(1.0, 1)


@pytest.fixture(scope="session")
def profile(sp):
    return build_profiles(sp)


@pytest.fixture(scope="session")
def chart(sp):
    return ingoing_chart(sp, 0.95, 60.0)


@pytest.fixture(scope="session")
def triple(profile, chart):
    return MultiplierTriple(profile=profile, chart=chart)


@pytest.fixture(scope="session")
def sos(profile):
    return SchwSos(profile=profile)


@pytest.fixture(scope="session")
def bh_small():
    return BlackHoleParams(1.0, 0.05, 0.03)


@pytest.fixture(scope="session")
def bh_static():
    return BlackHoleParams(1.0, 0.0, 0.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260808)
