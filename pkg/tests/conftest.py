import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from r4curv import fixtures

settings.register_profile("r4curv", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("r4curv")


@pytest.fixture(scope="session")
def surfaces():
    return {name: fixtures.load(name) for name in fixtures.ORDER}


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


def random_points(s, n, rng, margin=0.05):
    (u0, u1), (v0, v1) = s.u_range, s.v_range
    du, dv = margin * (u1 - u0), margin * (v1 - v0)
    return np.column_stack([rng.uniform(u0 + du, u1 - du, n), rng.uniform(v0 + dv, v1 - dv, n)])


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{name} {'ok' if passed else 'FAILED'}" for name, passed in checks)
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
