import numpy as np
import pytest

from cbm_encoding import Dataset, TaskKind

ACCEPTANCE_RESULTS = []


def record(criterion: str, passed, detail: str = "") -> None:
    """Log one acceptance line; printed in the terminal summary. ``passed=None`` means skipped."""
    ACCEPTANCE_RESULTS.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion}: {detail}")


@pytest.fixture
def toy_binary():
    """Levels a: y=[1,1,0], b: y=[0]."""
    return Dataset.from_columns({"col": ["a", "a", "a", "b"]}, target=[1, 1, 0, 0],
                                task=TaskKind.binary())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, task: TaskKind, n_rows=200, n_cat=2, n_num=1, n_levels=12):
    cat = {f"c{j}": [f"v{x}" for x in rng.integers(0, n_levels, n_rows)] for j in range(n_cat)}
    num = {f"x{j}": rng.normal(size=n_rows) for j in range(n_num)}
    if task.kind == "binary":
        y = rng.integers(0, 2, n_rows)
    elif task.kind == "multiclass":
        y = rng.integers(0, task.n_classes, n_rows)
    else:
        y = rng.normal(2.0, 3.0, n_rows)
    return Dataset.from_columns(cat, num, y, task)
