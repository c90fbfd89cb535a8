import numpy as np
import pytest

from whiter.analytic_core import LineGrid


@pytest.fixture(scope="session")
def grid():
    return LineGrid(0.0, 200.0, 2**14)


@pytest.fixture(scope="session")
def small_grid():
    return LineGrid(0.0, 100.0, 2**12)


def rational(zeros, poles, scale=1.0):
    """Vectorised ``scale * prod(z - zk) / prod(z - pk)``."""

    def f(z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, complex(scale))
        for zk in zeros:
            out = out * (z - zk)
        for pk in poles:
            out = out / (z - pk)
        return out

    return f


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
