import numpy as np
import pytest

from iosrates.dgp import Dataset

WORKED_X = [-3, 4, -1, 2, 0.5, -0.2, 7, -5, 1.4, -0.7]
WORKED_Y = [2, -1, 0, 5, 1, 3, 4, -2, 6, 8]


@pytest.fixture
def worked():
    return Dataset(np.array(WORKED_X, dtype=float)[:, None], np.array(WORKED_Y, dtype=float))


@pytest.fixture
def worked_csv(tmp_path):
    path = tmp_path / "worked.csv"
    lines = ["x_1,y_1"] + [f"{x},{y}" for x, y in zip(WORKED_X, WORKED_Y)]
    path.write_text("\n".join(lines) + "\n")
    return path


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
