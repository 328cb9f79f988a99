import numpy as np
import pytest

from skpsolve import NonlinearitySpec, Problem, build_domain, eigenbasis

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def dom1023():
    return build_domain(1, 1023)


@pytest.fixture(scope="session")
def dom255():
    return build_domain(1, 255)


@pytest.fixture(scope="session")
def basis1023(dom1023):
    return eigenbasis(dom1023, 32)


@pytest.fixture(scope="session")
def basis255(dom255):
    return eigenbasis(dom255, 32)


@pytest.fixture(scope="session")
def default_problem(dom1023):
    return Problem(dom1023, NonlinearitySpec(), a=1.0, b=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def record_acceptance():
    """Store a one-line verdict for the terminal summary of the acceptance run."""

    def record(number, passed, text):
        ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {text}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
