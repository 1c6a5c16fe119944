import functools
import math

import pytest

from npspectra.discretize import assemble, build_grid
from npspectra.geometry import build_perturbed_curve, build_sphere_curve

ALPHA = math.pi / 2 - 0.08


@pytest.fixture(scope="session")
def sphere():
    return build_sphere_curve()


@pytest.fixture(scope="session")
def perturbed():
    return build_perturbed_curve(ALPHA)


@pytest.fixture(scope="session")
def sphere_grid(sphere):
    return build_grid(sphere, 256)


@pytest.fixture(scope="session")
def perturbed_grid(perturbed):
    return build_grid(perturbed, 256)


@pytest.fixture(scope="session")
def operator():
    """Cached ``assemble`` keyed by (n, curve, grid)."""
    return functools.lru_cache(maxsize=None)(assemble)


@pytest.fixture
def record(request):
    """Log one acceptance line; the terminal summary repeats the lines in order."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def _record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
