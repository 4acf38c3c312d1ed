import numpy as np
import pytest

from crstego import _backend
from crstego.types import TERNARY, CostMap

BACKENDS = sorted(_backend.BACKENDS)

# lines recorded by the acceptance gate, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def ternary_map(pm):
    pm = np.asarray(pm, dtype=np.float64)
    return CostMap(np.stack([pm, np.zeros(pm.size), pm], axis=1), TERNARY)


def random_costs(rng, n, wet_frac=0.0):
    c = rng.random((n, 3)) + 0.01
    c[:, 1] = 0.0
    if wet_frac:
        wet = rng.random((n, 3)) < wet_frac
        wet[:, 1] = False
        c[wet] = np.inf
    return CostMap(c, TERNARY)
