import pytest

from turbsolve import _kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compilation is a fixed startup cost; keep it out of timed tests
    _kernels.warmup()
