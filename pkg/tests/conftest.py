import pytest

from mimo_sinr import _kernels_py
from mimo_sinr.config import SystemConfig

try:
    from mimo_sinr import _kernels as _kernels_c
except ImportError:  # pragma: no cover - exercised only without a compiler
    _kernels_c = None

# Shared by unit and acceptance tests so the 1e6-draw channel sets are memoized once.
MC_SEED = 20240517
MC_COUNT = 1_000_000

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _kernels_c is not None:
    BACKENDS.append(pytest.param(_kernels_c, id="cython"))


@pytest.fixture(params=BACKENDS)
def kern(request):
    return request.param


@pytest.fixture
def cfg_16_8_10():
    return SystemConfig.from_snr_db(16, 8, 10.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
