import pytest

from rigdens.cli import parse_map

TRIPLING = "linear 3 mod 1"

EQ6 = "linear 17/5 mod 1"

EQ4 = """
poly [0, 1/4]   : 1/8 + 3x + 2x^2
poly [1/4, 1/2] : 4(x - 1/4)
poly [1/2, 3/4] : 4(x - 1/2)
poly [3/4, 1]   : 7/8 + 3(x - 1) - 2(x - 1)^2
"""

EQ7 = """
poly [0, 5/17]      : 17/5 x
poly [5/17, 10/17]  : 34/25 (x - 5/17)^2 + 3(x - 5/17)
poly [10/17, 15/17] : 34/25 (x - 10/17)^2 + 3(x - 10/17)
poly [15/17, 1]     : 17/5 (x - 15/17)
"""

LANFORD = "poly [0,1] : 2x + (1/2)x(1-x) mod 1"

LANFORD2 = LANFORD + "; iterate 2"

SINMAP = "circle\npoly [0,1] : 4x + 0.01 sin(8 pi x) mod 1"

QUADRUPLING = "circle\nlinear 4 mod 1"


@pytest.fixture(scope="session")
def tripling():
    return parse_map(TRIPLING).build()


@pytest.fixture(scope="session")
def eq4():
    return parse_map(EQ4).build()


@pytest.fixture(scope="session")
def eq6():
    return parse_map(EQ6).build()


@pytest.fixture(scope="session")
def eq7():
    return parse_map(EQ7).build()


@pytest.fixture(scope="session")
def lanford():
    return parse_map(LANFORD).build()


@pytest.fixture(scope="session")
def lanford2():
    return parse_map(LANFORD2).build()


@pytest.fixture(scope="session")
def sinmap():
    return parse_map(SINMAP).build()


@pytest.fixture(scope="session")
def quadrupling():
    return parse_map(QUADRUPLING).build()
