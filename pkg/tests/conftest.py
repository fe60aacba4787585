import numpy as np
import pytest

from snowcert.metric import validate


def line_points(xs):
    x = np.asarray(xs, dtype=float)
    return validate(np.abs(x[:, None] - x[None, :]))


@pytest.fixture
def line3():
    return line_points([0, 1, 2])


@pytest.fixture
def unit_square():
    pts = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    return validate(np.linalg.norm(pts[:, None] - pts[None], axis=2))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
