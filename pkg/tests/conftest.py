import pytest

from msf_lab import build_ball, build_quotient, power_multiset, standard_multiset
from msf_lab.groups import FreeAbelian, FreeGroup, FreeProduct

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def F2():
    return FreeGroup(2)


@pytest.fixture(scope="session")
def S_free(F2):
    return standard_multiset(F2)


@pytest.fixture(scope="session")
def S_free2(S_free):
    return power_multiset(S_free, 2)


@pytest.fixture(scope="session")
def S_z2():
    return standard_multiset(FreeAbelian(2))


@pytest.fixture(scope="session")
def S_z1():
    return standard_multiset(FreeAbelian(1))


@pytest.fixture(scope="session")
def S_free_product():
    return standard_multiset(FreeProduct((2, 3)))


@pytest.fixture(scope="session")
def ball_free2_r4(S_free2):
    return build_ball(S_free2, 4)


@pytest.fixture(scope="session")
def torus44(S_z2):
    return build_quotient(S_z2, (4, 4))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
