import logging
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rdream import _accel  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"
BACKENDS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=BACKENDS)
def each_backend(request):
    old = _accel.backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(old)


@pytest.fixture(autouse=True)
def _quiet_q_warning():
    logging.getLogger("rdream.statistic").setLevel(logging.ERROR)
    yield
    logging.getLogger("rdream.statistic").setLevel(logging.NOTSET)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
