import numpy as np
import pytest

from srlab.dictionary import Dictionary, random_dictionary


@pytest.fixture
def two_atoms():
    """{(1,0), (sqrt2/2, sqrt2/2)} in R^2."""
    h = np.sqrt(0.5)
    return Dictionary(np.array([[1.0, 0.0], [h, h]]))


@pytest.fixture
def small_dict():
    return random_dictionary(8, 32, seed=7)


def close(a, b, rel=1e-9, scale=1.0):
    """|a - b| <= rel * max(|b|, 1e-3 * scale): relative, with a floor tied to
    the problem scale for values that are zero in exact arithmetic."""
    return abs(a - b) <= rel * max(abs(b), 1e-3 * scale)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    def record(label, ok, detail=""):
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
