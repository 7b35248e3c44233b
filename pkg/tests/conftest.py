import numpy as np
import pytest
from hypothesis import settings

from osync.manifold import StiefelTuple, random_stiefel

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def random_symmetric(n, d, rng):
    X = rng.standard_normal((n * d, n * d))
    return X + X.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def near_sync(n, d, p, scale, rng):
    """Stiefel tuple obtained by projecting a perturbation of [I_d | 0]."""
    M = np.eye(d, p)[None] + scale * rng.standard_normal((n, d, p))
    U, _, Vt = np.linalg.svd(M, full_matrices=False)
    return StiefelTuple(U @ Vt)


__all__ = ["random_symmetric", "near_sync", "random_stiefel"]


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
