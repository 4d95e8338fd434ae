import sys

import numpy as np
import pytest
from hypothesis import settings

from curlforge.catalog import QUADRATIC, LINEAR, SINE, build_system
from curlforge.integrate import integrate

settings.register_profile("curlforge", max_examples=40, deadline=None)
settings.load_profile("curlforge")

T_DEFAULT = 10.0
DT_DEFAULT = 1e-3

# Witness found by scripts/thomson_tait_sweep.py over a, b in linspace(-2, 2, 9),
# s in linspace(0, 4, 9): marginal at c = 0, unstable at c = 0.01.
THOMSON_TAIT_WITNESS = {"a": 0.0, "b": 1.0, "s": 0.0}


@pytest.fixture(params=[LINEAR, QUADRATIC, SINE], ids=lambda u: u.name)
def potential(request):
    return request.param


@pytest.fixture(scope="session")
def long_run():
    """Cached T=10, dt=1e-3 trajectories keyed by (name, frozen params)."""
    cache = {}

    def run(name, params=None, x0=None, T=T_DEFAULT, dt=DT_DEFAULT):
        key = (name, tuple(sorted((params or {}).items())), None if x0 is None else tuple(x0), T, dt)
        if key not in cache:
            sys = build_system(name, params)
            start = sys.default_x0 if x0 is None else x0
            cache[key] = (sys, integrate(sys, np.array(start, dtype=float), 0.0, T, dt))
        return cache[key]

    return run


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
