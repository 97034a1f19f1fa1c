from pathlib import Path

import numpy as np
import pytest

from geoinv import parse_system

DATA = Path(__file__).resolve().parent.parent / "data"

OCTICS = "vars: x\nx^8 - x^4 - 2\nx^8 - 3*x^4 + 2\n"
P2 = "vars: x y\n(y^2 - 1)^2\n(y^2 - 1)*(x^2 - 1)\n"
# second generator with leading term x*y^3: the variant whose table matches the published one
P2_XY = "vars: x y\n(y^2 - 1)^2\n(y^2 - 1)*(x*y - 1)\n"
P3 = (DATA / "p3.txt").read_text()
CARTAN = "vars: x1 x2\nx2^2 - 1\n2*x1*x2 - 3*x1\n"


@pytest.fixture
def octics():
    return parse_system(OCTICS)


@pytest.fixture
def p2():
    return parse_system(P2)


@pytest.fixture
def p2_xy():
    return parse_system(P2_XY)


@pytest.fixture(scope="session")
def p3():
    return parse_system(P3)


@pytest.fixture
def cartan_sys():
    return parse_system(CARTAN)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
