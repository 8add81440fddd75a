import itertools

import numpy as np
import pytest

from dpsynth import Dataset, NoiseSource, ProbTable


def brute_cells(s):
    """All assignments of s bits in cell order (first bit least significant)."""
    return [tuple((c >> j) & 1 for j in range(s)) for c in range(1 << s)]


def random_table(rng, scope):
    vals = rng.random(1 << len(scope))
    return ProbTable(tuple(scope), vals / vals.sum())


def random_dataset(rng, n, d, p=0.5):
    return Dataset((rng.random((n, d)) < p).astype(np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def noise():
    return NoiseSource(2024)


def all_datasets(n, d):
    """Every dataset with n records of width d."""
    cells = list(itertools.product([0, 1], repeat=d))
    for combo in itertools.product(cells, repeat=n):
        yield np.array(combo, dtype=np.uint8)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, title, passed, detail, seconds, limit)."""

    def record(number, title, passed, detail, seconds, limit):
        within = seconds <= limit
        status = "PASS" if passed and within else "FAIL"
        line = f"[criterion {number:>2}] {status}  {title}: {detail} ({seconds:.1f}s, limit {limit:.0f}s)"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return status == "PASS"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
