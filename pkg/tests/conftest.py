import numpy as np
import pytest

from dps_hybrid.config import DESK

_ACCEPTANCE = []


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def semi_orthogonal_rows(rng, rows, cols):
    Q, _ = np.linalg.qr(crandn(rng, cols, rows))
    return Q.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20170615)


@pytest.fixture
def desk():
    return DESK


@pytest.fixture
def acceptance_report():
    def record(criterion, passed, detail=""):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion:>2}: {detail}")
