import math
from pathlib import Path

import pytest

from oppwelfare import LOG, Society, TabulatedUtility

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def rich_poor():
    """Two types on incomes {1, 2}: R = (0.1, 0.9) with share 0.2, P = (0.6, 0.4) with share 0.8."""
    return Society.from_rows(
        [0.2, 0.8], [{1.0: 0.1, 2.0: 0.9}, {1.0: 0.6, 2.0: 0.4}], labels=["R", "P"], name="rich-poor example"
    )


@pytest.fixture
def two_level():
    """Equal shares, type utilities 0 and ln 2 under log utility."""
    return Society.from_rows([0.5, 0.5], [{1.0: 1.0}, {2.0: 1.0}], labels=["low", "high"])


@pytest.fixture
def equal_opportunity():
    return Society.from_rows(
        [0.3, 0.7], [{1.0: 0.25, 3.0: 0.75}, {1.0: 0.25, 3.0: 0.75}], labels=["a", "b"]
    )


@pytest.fixture
def log_u():
    return LOG


def table_utility(values):
    """Tabulated utility with ``u(y_i) = values[i]`` at incomes 1, 2, ..."""
    return TabulatedUtility(tuple(float(i + 1) for i in range(len(values))), tuple(values))


LN2 = math.log(2)


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion

_ACCEPTANCE: dict[int, str] = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "FAIL" if exc_type is not None else "PASS"
        detail = self.detail or (str(exc).splitlines()[0] if exc else "")
        line = f"{status} criterion {self.number:>2}: {self.title}" + (f" [{detail}]" if detail else "")
        _ACCEPTANCE[self.number] = line
        print(line)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
