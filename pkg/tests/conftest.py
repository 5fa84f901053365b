import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("sca", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("sca")

THETA = math.pi / 24


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, shape):
    psi = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return psi / np.linalg.norm(psi)


# --- acceptance bookkeeping ---------------------------------------------------------

_RESULTS = pytest.StashKey[dict]()


class Criterion:
    """Collects the checks of one acceptance criterion and fails on any miss."""

    def __init__(self, results: dict, number: int, title: str):
        self.results, self.number, self.title = results, number, title
        self.checks: list[tuple[str, bool, str]] = []

    def check(self, label: str, ok, detail: str = "") -> None:
        self.checks.append((label, bool(ok), detail))

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc is None and all(c[1] for c in self.checks)
        parts = [f"{'ok' if c[1] else 'MISS'} {c[0]}" + (f" ({c[2]})" if c[2] else "") for c in self.checks]
        if exc is not None:
            parts.append(f"error {exc_type.__name__}: {exc}")
        line = f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}  {self.title}: " + "; ".join(parts)
        self.results[self.number] = line
        print(line)
        if exc is None and not ok:
            raise AssertionError(line)
        return False


@pytest.fixture
def criterion(request):
    results = request.config.stash.setdefault(_RESULTS, {})
    return lambda number, title: Criterion(results, number, title)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
