from __future__ import annotations

import numpy as np
import pytest

from rfisim.propagation import load_atmosphere
from rfisim.scenario import manhattan_grid, synthetic_city


@pytest.fixture(scope="session")
def city():
    return synthetic_city()


@pytest.fixture(scope="session")
def grid():
    return manhattan_grid()


@pytest.fixture(scope="session")
def atmosphere():
    return load_atmosphere()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE: dict[int, list] = {}


@pytest.fixture(scope="session")
def acceptance():
    """Outcome log for the numbered acceptance criteria, printed at the end."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        entries = _ACCEPTANCE[n]
        ok = all(passed for passed, _ in entries)
        title = entries[0][1]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
