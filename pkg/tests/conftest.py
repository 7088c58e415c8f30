import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from msasep.bethe import SystemParams
from msasep.quadrature import max_radius

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def log(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def admissible_point(rng, n, params, fraction=0.9):
    r = fraction * max_radius(params)
    return r * np.exp(2j * np.pi * rng.random(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[0.3, 0.5, 0.7], ids=lambda p: f"p={p}")
def params(request):
    return SystemParams(request.param)
