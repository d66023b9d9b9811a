import math
import sys

import pytest

from infweb.domains import make_disk, make_polygon, make_stadium

S2 = math.sqrt(2)
S3 = math.sqrt(3)


@pytest.fixture(scope="session")
def square():
    return make_polygon([(0, S2), (2 * S2, -S2), (0, -3 * S2), (-2 * S2, -S2)], "square")


@pytest.fixture(scope="session")
def triangle():
    return make_polygon([(1, S3 / 3), (-1, S3 / 3), (0, -2 * S3 / 3)], "triangle")


@pytest.fixture(scope="session")
def disk():
    return make_disk((0, 0), 1.0)


@pytest.fixture(scope="session")
def stadium():
    return make_stadium((-1, 0), (1, 0), 1.0)


@pytest.fixture(scope="session")
def corpus(square, triangle, disk, stadium):
    return {"square": square, "triangle": triangle, "disk": disk, "stadium": stadium}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
