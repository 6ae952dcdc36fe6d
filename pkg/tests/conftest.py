import numpy as np
import pytest

from dpanova import validate_dataset

_CRITERIA = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(ok, detail)``."""
    name = request.node.name

    def record(ok, detail=""):
        _CRITERIA.append((name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def small_dataset():
    return validate_dataset([("A", 0.2), ("A", 0.4), ("B", 0.6), ("B", 0.8)])


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240501)


def random_groups(rng, max_n=50, max_k=5):
    """Random valid group layout with n <= max_n and 2 <= k <= max_k."""
    k = int(rng.integers(2, max_k + 1))
    n = int(rng.integers(k + 1, max_n + 1))
    sizes = np.ones(k, dtype=int)
    extra = rng.multinomial(n - k, np.ones(k) / k)
    sizes += extra
    groups = []
    for i, size in enumerate(sizes):
        kind = rng.integers(3)
        if kind == 0:
            vals = rng.random(size)
        elif kind == 1:
            vals = rng.choice([0.0, 1.0], size)
        else:
            vals = np.clip(rng.normal(rng.random(), 0.2, size), 0.0, 1.0)
        groups.append((f"g{i}", vals.tolist()))
    return groups
