import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def brute_force_cost(arcs, s, t):
    """Cheapest simple path by enumerating every vertex ordering."""
    n = len(arcs)
    if s == t:
        return 0.0
    best = math.inf
    others = [v for v in range(n) if v not in (s, t)]
    for k in range(len(others) + 1):
        for mid in itertools.permutations(others, k):
            seq = (s, *mid, t)
            c = 0.0
            for a, b in zip(seq, seq[1:]):
                c += arcs[a][b]
                if c >= best:
                    break
            best = min(best, c)
    return best


def random_symmetric_arcs(rng, n, p=0.5, lo=1, hi=10):
    a = np.full((n, n), math.inf)
    np.fill_diagonal(a, 0.0)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                a[i, j] = a[j, i] = int(rng.integers(lo, hi + 1))
    return a


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
